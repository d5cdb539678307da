"""
Unit tests for label subsets and client partitions.
"""

import numpy as np
import pytest

from semifed_har.data.dataset import TimeSeriesDataset
from semifed_har.data.partition import (
    NUM_DIVISIONS,
    client_quota,
    divisions,
    partition_iid,
    partition_labeled,
    partition_noniid,
    repr_dim,
    sample_labeled_subset,
)
from semifed_har.errors import ConfigurationError, PartitionError


def _row_index_dataset(length=2000, participants=2):
    """Dataset whose single feature is the row number."""
    return TimeSeriesDataset(
        features=np.arange(length, dtype=np.float64)[:, None],
        labels=(np.arange(length) // 50) % 3,
        num_classes=3,
        participants=participants,
    )


class TestReprDim:
    """Test cases for the representation size."""

    @pytest.mark.parametrize(
        "num_features, ratio, expected",
        [(52, 0.5, 26), (79, 0.25, 20), (9, 0.125, 1), (9, 0.5, 5), (3, 0.1, 1)],
    )
    def test_round_half_up(self, num_features, ratio, expected):
        """Test d = max(1, round(r_f · N^f))."""
        assert repr_dim(num_features, ratio) == expected

    @pytest.mark.parametrize("ratio", [0.0, 1.0, -0.5, 1.5])
    def test_ratio_out_of_range(self, ratio):
        """Test that r_f must lie strictly between 0 and 1."""
        with pytest.raises(ConfigurationError):
            repr_dim(9, ratio)


class TestDivisions:
    """Test cases for division boundaries."""

    def test_cover_series_with_remainder_in_last(self):
        """Test that divisions are contiguous and the last takes the remainder."""
        parts = divisions(1050)

        assert len(parts) == NUM_DIVISIONS
        assert parts[0] == range(0, 10)
        assert parts[-1] == range(990, 1050)
        assert all(a.stop == b.start for a, b in zip(parts, parts[1:]))

    def test_too_short(self):
        """Test that fewer than 100 rows cannot be divided."""
        with pytest.raises(PartitionError):
            divisions(99)


class TestLabeledSubset:
    """Test cases for the server's labelled subset."""

    @pytest.mark.parametrize("ratio, count", [(0.5, 50), (1 / 16, 6), (1 / 32, 3), (0.001, 1)])
    def test_division_count(self, ratio, count):
        """Test that round(100·r_l) whole divisions are taken."""
        subset = sample_labeled_subset(_row_index_dataset(), ratio, seed=0)

        assert len(subset) == count * 20

    def test_divisions_are_whole_and_ordered(self):
        """Test that chosen rows form whole divisions in temporal order."""
        rows = sample_labeled_subset(_row_index_dataset(), 0.1, seed=5).features[:, 0].astype(int)

        assert np.all(np.diff(rows) > 0)
        blocks = rows.reshape(-1, 20)
        assert np.all(blocks[:, 0] % 20 == 0)
        np.testing.assert_array_equal(blocks - blocks[:, :1], np.tile(np.arange(20), (len(blocks), 1)))

    def test_segments_follow_gaps_in_time(self):
        """Test that segments are exactly the runs of consecutive original rows."""
        subset = sample_labeled_subset(_row_index_dataset(), 0.1, seed=5)
        rows = subset.features[:, 0].astype(int)

        for segment in subset.segments():
            assert np.all(np.diff(rows[segment.start:segment.stop]) == 1)
        for b in subset.breaks:
            assert rows[b] > rows[b - 1] + 1
        assert sum(len(s) for s in subset.segments()) == len(subset)

    def test_full_ratio_has_no_breaks(self):
        """Test that taking every division leaves one contiguous segment."""
        assert sample_labeled_subset(_row_index_dataset(), 1.0, seed=0).breaks == ()

    def test_full_ratio_is_whole_set(self):
        """Test that r_l = 1 keeps every row."""
        train = _row_index_dataset()
        subset = sample_labeled_subset(train, 1.0, seed=0)

        np.testing.assert_array_equal(subset.features, train.features.astype(np.float32))
        np.testing.assert_array_equal(subset.labels, train.labels)

    def test_seed_changes_selection(self):
        """Test that the subset depends on the seed only."""
        train = _row_index_dataset()
        a = sample_labeled_subset(train, 0.1, seed=1).features
        b = sample_labeled_subset(train, 0.1, seed=1).features
        c = sample_labeled_subset(train, 0.1, seed=2).features

        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    @pytest.mark.parametrize("ratio", [0.0, 1.01])
    def test_ratio_out_of_range(self, ratio):
        """Test that r_l must lie in (0, 1]."""
        with pytest.raises(PartitionError):
            sample_labeled_subset(_row_index_dataset(), ratio, seed=0)


class TestClientPartitions:
    """Test cases for IID and non-IID client partitions."""

    def test_quota(self):
        """Test n_k = floor(n^o / n^p)."""
        assert client_quota(651000, 4) == 162750
        assert client_quota(2001, 2) == 1000

    def test_iid_takes_one_window_per_division(self):
        """Test that each IID fragment lies inside its own division."""
        train = _row_index_dataset()
        parts = divisions(len(train))
        (client,) = partition_iid(train, num_clients=1, participants=2, seed=0)

        assert client.n_k == 1000
        assert len(client.fragments) == NUM_DIVISIONS
        for fragment, part in zip(client.fragments, parts):
            rows = fragment[:, 0].astype(int)
            assert len(rows) == 10
            assert part.start <= rows[0] and rows[-1] < part.stop
            np.testing.assert_array_equal(np.diff(rows), 1)

    def test_iid_clients_differ(self):
        """Test that clients draw their windows independently."""
        a, b = partition_iid(_row_index_dataset(), num_clients=2, participants=2, seed=0)

        assert not np.array_equal(a.features, b.features)
        assert a.client_id == 0 and b.client_id == 1

    def test_client_partition_depends_on_its_id_only(self):
        """Test that adding clients does not change existing ones."""
        small = partition_iid(_row_index_dataset(), num_clients=2, participants=2, seed=3)
        large = partition_iid(_row_index_dataset(), num_clients=5, participants=2, seed=3)

        np.testing.assert_array_equal(small[1].features, large[1].features)

    def test_iid_needs_hundred_rows(self):
        """Test that n_k < 100 is infeasible for IID."""
        with pytest.raises(PartitionError):
            partition_iid(_row_index_dataset(length=150), num_clients=1, participants=2, seed=0)

    def test_noniid_is_one_contiguous_window(self):
        """Test the non-IID window length and bounds."""
        train = _row_index_dataset(participants=4)
        for client in partition_noniid(train, num_clients=8, participants=4, seed=0):
            rows = client.features[:, 0].astype(int)
            assert len(client.fragments) == 1
            assert client.n_k == 500
            assert rows[0] >= 0 and rows[-1] < len(train)
            np.testing.assert_array_equal(np.diff(rows), 1)

    def test_noniid_spans_fewer_divisions(self):
        """Test that a non-IID client sees a much narrower slice of time."""
        train = _row_index_dataset(participants=4)
        iid = partition_iid(train, num_clients=3, participants=4, seed=0)
        noniid = partition_noniid(train, num_clients=3, participants=4, seed=0)

        for a, b in zip(iid, noniid):
            assert len(np.unique(a.features[:, 0] // 20)) == NUM_DIVISIONS
            assert len(np.unique(b.features[:, 0] // 20)) <= 26

    def test_to_dict_has_no_labels(self):
        """Test that unlabelled partitions never carry labels."""
        (client,) = partition_noniid(_row_index_dataset(), num_clients=1, participants=2, seed=0)
        data = client.to_dict()

        assert "labels" not in data
        assert data["n_k"] == 1000

    def test_labeled_partition_matches_unlabelled_windows(self):
        """Test that the supervised baseline sees the same rows with their labels."""
        train = _row_index_dataset()
        unlabeled = partition_iid(train, num_clients=2, participants=2, seed=4)
        labeled = partition_labeled(train, num_clients=2, participants=2, seed=4, iid=True)

        for u, lab in zip(unlabeled, labeled):
            np.testing.assert_array_equal(u.features, lab.features)
            rows = lab.features[:, 0].astype(int)
            np.testing.assert_array_equal(lab.labels, train.labels[rows])
            assert lab.n_k == u.n_k
