"""
Unit tests for the checkpoint format and result writers.
"""

import json
import math
import struct

import pytest

from semifed_har.errors import (
    CheckpointChecksumError,
    CheckpointError,
    CheckpointFormatError,
    CheckpointMagicError,
    CheckpointTruncatedError,
    ConfigError,
)
from semifed_har.infrastructure.checkpoint import (
    CHECKSUM_SIZE,
    checksum,
    decode_checkpoint,
    encode_checkpoint,
    inspect_checkpoint,
    load_checkpoint,
    save_checkpoint,
    serialized_size,
)
from semifed_har.infrastructure.results import (
    error_record,
    read_csv,
    write_aggregate,
    write_latency,
    write_metrics,
)
from semifed_har.models.autoencoders import build_autoencoder
from semifed_har.models.classifiers import build_classifier
from semifed_har.models.records import AggregateMetrics, RoundMetrics
from semifed_har.models.specs import (
    AutoencoderSpec,
    AutoencoderVariant,
    ClassifierHead,
    ClassifierSpec,
)


FINGERPRINT = "0123456789abcdef0123456789abcdef"


def _models(variant=AutoencoderVariant.CNN):
    return {
        "autoencoder": build_autoencoder(AutoencoderSpec(variant, input_dim=9, repr_dim=4), seed=1),
        "classifier": build_classifier(ClassifierSpec(ClassifierHead.LSTM, input_dim=4, num_classes=3), seed=1),
    }


class TestCheckpointRoundTrip:
    """Test cases for encode/decode."""

    @pytest.mark.parametrize("variant", list(AutoencoderVariant))
    def test_bit_exact(self, variant):
        """Test that every model variant survives a round trip bit-exactly."""
        models = _models(variant)

        checkpoint = decode_checkpoint(encode_checkpoint(models, FINGERPRINT))

        assert checkpoint.fingerprint == FINGERPRINT
        assert sorted(checkpoint.models) == ["autoencoder", "classifier"]
        for name, params in models.items():
            assert checkpoint.models[name].equals(params)

    def test_batchnorm_buffers_stay_buffers(self):
        """Test that running statistics are restored as buffers, not parameters."""
        restored = decode_checkpoint(encode_checkpoint(_models()))

        ae = restored.models["autoencoder"]
        assert "bn.running_var" in ae.buffers
        assert "bn.running_var" not in ae.params

    def test_empty_checkpoint(self):
        """Test that an empty checkpoint is 26 bytes and decodes to nothing."""
        data = encode_checkpoint({})

        assert len(data) == 26
        checkpoint = decode_checkpoint(data)
        assert checkpoint.models == {}
        assert checkpoint.fingerprint == ""

    def test_encoding_is_deterministic(self):
        """Test that identical models give identical bytes."""
        assert encode_checkpoint(_models(), FINGERPRINT) == encode_checkpoint(_models(), FINGERPRINT)

    def test_serialized_size(self):
        """Test that size grows with parameter count."""
        small = build_autoencoder(AutoencoderSpec(AutoencoderVariant.FC, input_dim=9, repr_dim=2), seed=0)
        large = build_autoencoder(AutoencoderSpec(AutoencoderVariant.FC, input_dim=9, repr_dim=6), seed=0)

        assert serialized_size(small) < serialized_size(large)
        assert serialized_size(small) == len(encode_checkpoint({"model": small}))


def _record_offsets(data):
    """Byte offsets of the header fields and the first tensor record."""
    (meta_len,) = struct.unpack("<I", data[12:16])
    first = 16 + meta_len
    (name_len,) = struct.unpack("<H", data[first:first + 2])
    rank_at = first + 2 + name_len
    return {
        "version": 4,
        "tensor_count": 8,
        "metadata_length": 12,
        "metadata": 16,
        "name_length": first,
        "name": first + 2,
        "rank": rank_at,
        "dims": rank_at + 4,
        "data": len(data) - 9,
    }


class TestCheckpointCorruption:
    """Test cases for rejecting damaged checkpoints."""

    @pytest.mark.parametrize(
        "field, mask",
        [
            ("version", 0x01),
            ("tensor_count", 0x01),
            ("metadata_length", 0x01),
            ("metadata", 0x01),
            ("name_length", 0x01),
            ("name", 0x80),
            ("rank", 0x01),
            ("dims", 0x01),
            ("data", 0x01),
        ],
    )
    def test_flipped_byte(self, field, mask):
        """Test that one flipped byte anywhere after the magic fails the checksum."""
        data = bytearray(encode_checkpoint(_models(), FINGERPRINT))
        data[_record_offsets(data)[field]] ^= mask

        with pytest.raises(CheckpointChecksumError):
            decode_checkpoint(bytes(data))

    def test_flipped_byte_in_fc_name(self):
        """Test that a non-UTF-8 tensor name is a checksum error, not a decode crash."""
        models = {"autoencoder": build_autoencoder(AutoencoderSpec(AutoencoderVariant.FC, 9, 4), seed=0)}
        data = bytearray(encode_checkpoint(models, FINGERPRINT))
        data[_record_offsets(data)["name"]] ^= 0x80

        with pytest.raises(CheckpointChecksumError):
            decode_checkpoint(bytes(data))

    def test_malformed_body_with_valid_checksum(self):
        """Test that records which do not parse are a format error."""
        data = bytearray(encode_checkpoint(_models(), FINGERPRINT))
        data[_record_offsets(data)["name"]] ^= 0x80
        body = bytes(data[:-CHECKSUM_SIZE])

        with pytest.raises(CheckpointFormatError):
            decode_checkpoint(body + checksum(body))

    def test_overlong_count_with_valid_checksum(self):
        """Test that a count past the last tensor is a format error."""
        data = bytearray(encode_checkpoint(_models(), FINGERPRINT))
        data[8] += 1
        body = bytes(data[:-CHECKSUM_SIZE])

        with pytest.raises(CheckpointFormatError):
            decode_checkpoint(body + checksum(body))

    def test_bad_magic(self):
        """Test that foreign files are rejected by their magic."""
        data = b"NOPE" + encode_checkpoint(_models())[4:]

        with pytest.raises(CheckpointMagicError):
            decode_checkpoint(data)

    @pytest.mark.parametrize("keep", [2, 10, 23])
    def test_truncated_header(self, keep):
        """Test that a file shorter than an empty checkpoint is reported as truncated."""
        data = encode_checkpoint(_models(), FINGERPRINT)

        with pytest.raises(CheckpointTruncatedError):
            decode_checkpoint(data[:keep])

    @pytest.mark.parametrize("cut", [1, 9, 100])
    def test_truncated_body(self, cut):
        """Test that a file missing its tail no longer matches its checksum."""
        data = encode_checkpoint(_models(), FINGERPRINT)

        with pytest.raises(CheckpointChecksumError):
            decode_checkpoint(data[:-cut])

    def test_trailing_bytes(self):
        """Test that extra bytes after the checksum are rejected."""
        with pytest.raises(CheckpointChecksumError):
            decode_checkpoint(encode_checkpoint(_models()) + b"\x00")

    def test_errors_are_value_errors(self):
        """Test the checkpoint error hierarchy."""
        assert issubclass(CheckpointChecksumError, CheckpointError)
        assert issubclass(CheckpointFormatError, CheckpointError)
        assert issubclass(CheckpointError, ValueError)


class TestCheckpointFiles:
    """Test cases for saving, loading and inspecting files."""

    def test_save_load_inspect(self, tmp_path):
        """Test the file round trip and the inspection summary."""
        path = tmp_path / "checkpoints" / "replicate_000.fsfl"
        models = _models(AutoencoderVariant.LSTM)

        size = save_checkpoint(models, path, FINGERPRINT)

        assert path.stat().st_size == size
        assert load_checkpoint(path).models["classifier"].equals(models["classifier"])

        summary = inspect_checkpoint(path)
        assert summary["bytes"] == size
        assert summary["fingerprint"] == FINGERPRINT
        assert summary["models"]["autoencoder"]["parameter_count"] == models["autoencoder"].parameter_count()
        assert summary["models"]["autoencoder"]["spec"]["variant"] == "LSTM"
        json.dumps(summary)


class TestResultWriters:
    """Test cases for the CSV and error writers."""

    def test_metrics_sorted_with_crlf(self, tmp_path):
        """Test row order, line endings and float formatting."""
        path = tmp_path / "metrics.csv"
        rows = [
            RoundMetrics(replicate_id=1, scheme="SEMI", round=0, accuracy=0.25, windows_evaluated=1),
            RoundMetrics(replicate_id=0, scheme="SEMI", round=2, accuracy=0.1, windows_evaluated=1),
            RoundMetrics(replicate_id=0, scheme="SEMI", round=0, accuracy=1 / 3, windows_evaluated=1),
        ]

        assert write_metrics(path, rows) == 3

        raw = path.read_bytes().decode("utf-8")
        assert raw.startswith("replicate_id,scheme,round,accuracy\r\n")
        assert raw.count("\r\n") == 4
        parsed = read_csv(path)
        assert [(r["replicate_id"], r["round"]) for r in parsed] == [("0", "0"), ("0", "2"), ("1", "0")]
        assert float(parsed[0]["accuracy"]) == 1 / 3

    def test_aggregate_and_latency(self, tmp_path):
        """Test the aggregate and latency tables."""
        write_aggregate(tmp_path / "aggregate.csv", [AggregateMetrics("SEMI", 2, 0.6, 0.1, 2)])

        class _Report:
            scheme = "SEMI"
            latencies_us = [12.5, 13.0]

        assert write_latency(tmp_path / "latency.csv", [_Report()]) == 2
        assert read_csv(tmp_path / "aggregate.csv")[0] == {
            "scheme": "SEMI", "round": "2", "mean": "0.6", "stderr": "0.1", "n": "2"
        }
        assert read_csv(tmp_path / "latency.csv")[1] == {"scheme": "SEMI", "window_index": "1", "micros": "13.0"}

    def test_error_record_names_key(self):
        """Test that config errors carry their key into the record."""
        record = error_record(ConfigError("lr_a", "must be > 0"))

        assert record["status"] == "error"
        assert record["kind"] == "ConfigError"
        assert record["key"] == "lr_a"
        assert "key" not in error_record(RuntimeError("boom"))

    def test_round_metrics_rejects_bad_accuracy(self):
        """Test the accuracy range check."""
        with pytest.raises(ValueError):
            RoundMetrics(replicate_id=0, scheme="SEMI", round=0, accuracy=1.5, windows_evaluated=1)
        assert math.isnan(RoundMetrics(0, "CS", 0, 0.5, 1).server_loss)
