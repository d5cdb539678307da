"""
Unit tests for dataset loading and synthetic generation.
"""

import numpy as np
import pytest

from semifed_har.data.dataset import TimeSeriesDataset, load_csv
from semifed_har.data.synthetic import (
    PRESETS,
    SynthConfig,
    markov_labels,
    nearest_template,
    signal_templates,
    synth_from_preset,
    synth_generate,
)
from semifed_har.errors import ConfigurationError, DataError, ParseError


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadCsv:
    """Test cases for CSV ingestion."""

    def test_valid_file(self, tmp_path):
        """Test loading a well-formed file."""
        path = _write(tmp_path, "f0,f1,label\n0.5,1.0,0\n-1,2e-3,2\n3,4,1\n")

        dataset = load_csv(path, sample_rate_hz=30, participants=4)

        assert len(dataset) == 3
        assert dataset.num_features == 2
        assert dataset.num_classes == 3
        assert dataset.features.dtype == np.float32
        np.testing.assert_array_equal(dataset.labels, [0, 2, 1])
        np.testing.assert_allclose(dataset.features[1], [-1.0, 0.002])
        assert dataset.sample_rate_hz == 30
        assert dataset.participants == 4

    def test_explicit_class_count(self, tmp_path):
        """Test that num_classes can exceed the labels present."""
        path = _write(tmp_path, "f0,label\n1,0\n2,0\n")

        assert load_csv(path, num_classes=5).num_classes == 5
        assert load_csv(path).num_classes == 2

    def test_empty_file(self, tmp_path):
        """Test that an empty file has no data rows."""
        with pytest.raises(ParseError, match="no data rows"):
            load_csv(_write(tmp_path, ""))

    def test_header_only(self, tmp_path):
        """Test that a header without rows has no data rows."""
        with pytest.raises(ParseError, match="no data rows"):
            load_csv(_write(tmp_path, "f0,f1,label\n"))

    def test_unknown_header(self, tmp_path):
        """Test that the header must be f0..f{n-1},label."""
        with pytest.raises(ParseError) as excinfo:
            load_csv(_write(tmp_path, "a,b,label\n1,2,0\n"))
        assert excinfo.value.line == 1

    def test_ragged_long_row(self, tmp_path):
        """Test that a row with too many cells is reported with its line."""
        with pytest.raises(ParseError) as excinfo:
            load_csv(_write(tmp_path, "f0,f1,label\n1,2,0\n1,2,3,0\n"))
        assert excinfo.value.line == 3
        assert "ragged" in str(excinfo.value)

    def test_short_row_is_ragged(self, tmp_path):
        """Test that a row with too few cells is reported as ragged with its line."""
        with pytest.raises(ParseError) as excinfo:
            load_csv(_write(tmp_path, "f0,f1,label\n1,2,0\n3,4,1\n5,6\n"))
        assert excinfo.value.line == 4
        assert "ragged" in str(excinfo.value)

    def test_empty_cell(self, tmp_path):
        """Test that an empty cell in a full-width row is a missing value."""
        with pytest.raises(ParseError, match="missing value in column f1") as excinfo:
            load_csv(_write(tmp_path, "f0,f1,label\n1,2,0\n3,,1\n"))
        assert excinfo.value.line == 3

    def test_blank_lines_keep_physical_line_numbers(self, tmp_path):
        """Test that blank lines are skipped but still counted in error lines."""
        text = "f0,f1,label\n\n1,2,0\n\n\n3,x,1\n"
        with pytest.raises(ParseError) as excinfo:
            load_csv(_write(tmp_path, text))
        assert excinfo.value.line == 6

        with pytest.raises(ParseError, match="non-integer label") as excinfo:
            load_csv(_write(tmp_path, "f0,label\n\n1,0\n\n2,0.5\n"))
        assert excinfo.value.line == 5

        with pytest.raises(ParseError, match="ragged") as excinfo:
            load_csv(_write(tmp_path, "\nf0,label\n1,0\n\n2\n"))
        assert excinfo.value.line == 5

    def test_blank_lines_are_ignored(self, tmp_path):
        """Test that blank lines do not become rows."""
        dataset = load_csv(_write(tmp_path, "f0,label\n1,0\n\n2,1\n\n"))

        assert dataset.labels.tolist() == [0, 1]

    def test_non_numeric_cell(self, tmp_path):
        """Test that text in a feature column is rejected."""
        with pytest.raises(ParseError) as excinfo:
            load_csv(_write(tmp_path, "f0,f1,label\n1,walking,0\n"))
        assert excinfo.value.line == 2
        assert "f1" in str(excinfo.value)

    def test_non_integer_label(self, tmp_path):
        """Test that fractional labels are rejected."""
        with pytest.raises(ParseError, match="non-integer label") as excinfo:
            load_csv(_write(tmp_path, "f0,label\n1,0\n2,1\n3,1.5\n"))
        assert excinfo.value.line == 4

    def test_label_beyond_class_count(self, tmp_path):
        """Test that a label >= num_classes is a data error naming the row."""
        with pytest.raises(DataError, match="row 1"):
            load_csv(_write(tmp_path, "f0,label\n1,0\n2,3\n"), num_classes=3)


class TestTimeSeriesDataset:
    """Test cases for the dataset container."""

    def test_label_shape_must_match(self):
        """Test that one label per row is required."""
        with pytest.raises(DataError):
            TimeSeriesDataset(features=np.zeros((4, 2)), labels=np.zeros(3), num_classes=2)

    def test_take_concatenates_in_order(self, toy_dataset):
        """Test that take joins ranges in the order given."""
        part = toy_dataset.take([range(100, 102), range(0, 2)])

        np.testing.assert_array_equal(part.labels, [1, 1, 0, 0])
        assert part.participants == toy_dataset.participants

    def test_take_records_breaks(self, toy_dataset):
        """Test that gaps between taken ranges become breaks and adjacent ranges merge."""
        part = toy_dataset.take([range(0, 10), range(10, 20), range(50, 55), range(5, 8)])

        assert part.breaks == (20, 25)
        assert part.segments() == [range(0, 20), range(20, 25), range(25, 28)]
        assert part.take([range(15, 27)]).breaks == (5, 10)
        assert toy_dataset.segments() == [range(0, 1000)]

    def test_label_histogram(self, toy_dataset):
        """Test class counts."""
        np.testing.assert_array_equal(toy_dataset.label_histogram(), [500, 500])


class TestSynthetic:
    """Test cases for synthetic data generation."""

    def test_same_seed_same_data(self):
        """Test that generation is deterministic."""
        cfg = SynthConfig(train_length=500, test_length=200, seed=9)
        train_a, test_a = synth_generate(cfg)
        train_b, test_b = synth_generate(cfg)

        np.testing.assert_array_equal(train_a.features, train_b.features)
        np.testing.assert_array_equal(test_a.labels, test_b.labels)
        assert not np.array_equal(train_a.features, synth_generate(SynthConfig(train_length=500, test_length=200, seed=10))[0].features)

    def test_shapes_follow_config(self, small_synth):
        """Test row and feature counts."""
        train, test = small_synth

        assert train.features.shape == (2000, 9)
        assert test.features.shape == (1000, 9)
        assert train.participants == 2
        assert train.num_classes == 3

    def test_presets(self):
        """Test the feature, class and participant counts of each preset."""
        assert (PRESETS["opp"].num_features, PRESETS["opp"].num_classes, PRESETS["opp"].participants) == (79, 18, 4)
        assert (PRESETS["pamap2"].num_features, PRESETS["pamap2"].num_classes, PRESETS["pamap2"].participants) == (52, 12, 9)
        assert (PRESETS["dg"].num_features, PRESETS["dg"].num_classes, PRESETS["dg"].participants) == (9, 3, 10)

    def test_preset_overrides(self):
        """Test that overrides replace preset fields."""
        cfg = synth_from_preset("opp", train_length=1000, seed=4)

        assert cfg.num_features == 79
        assert cfg.train_length == 1000
        with pytest.raises(ConfigurationError):
            synth_from_preset("wisdm")

    def test_invalid_dwell(self):
        """Test that dwell must exceed one row."""
        with pytest.raises(ConfigurationError):
            synth_generate(SynthConfig(dwell=1.0))

    def test_every_class_present(self):
        """Test that a long series visits every activity."""
        train, _ = synth_generate(SynthConfig(train_length=20000, test_length=100, dwell=50.0, seed=1))

        assert np.all(train.label_histogram() > 0)

    def test_dwell_sets_run_length(self):
        """Test that the number of activity switches matches the dwell time."""
        labels = markov_labels(20000, 3, 50.0, np.random.default_rng(0))
        switches = int(np.count_nonzero(np.diff(labels)))

        assert 300 < switches < 500

    def test_noise_free_oracle_is_exact(self):
        """Test that with no noise the nearest template recovers every label."""
        cfg = SynthConfig(train_length=300, test_length=300, noise=0.0, seed=2)
        train, test = synth_generate(cfg)
        templates = signal_templates(cfg)

        np.testing.assert_array_equal(nearest_template(templates, train.features), train.labels)
        np.testing.assert_array_equal(nearest_template(templates, test.features, t0=cfg.train_length), test.labels)
