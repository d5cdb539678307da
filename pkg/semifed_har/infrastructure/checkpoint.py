"""
Binary checkpoint format for trained models.

Layout (all integers little-endian):

    b"FSFL"                       magic
    u32  version (1)
    u32  tensor count
    u32  metadata length, then UTF-8 JSON metadata
    per tensor:
        u16  name length, UTF-8 name
        u32  rank, then rank × u32 dims
        float32 data, C order
    u64  checksum (BLAKE2b, 8-byte digest) of every preceding byte

Tensor names are ``<model>/<tensor>`` (e.g. ``autoencoder/encoder.weight``).
The metadata block holds the model specs, which tensors are buffers, and the
experiment config fingerprint; it is ``{}`` when there is nothing to record,
so an empty checkpoint is 18 bytes plus the checksum.
"""

import hashlib
import io
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Tuple, Union

import numpy as np
from jsonschema import ValidationError

from semifed_har.errors import (
    CheckpointChecksumError,
    CheckpointError,
    CheckpointFormatError,
    CheckpointMagicError,
    CheckpointTruncatedError,
)
from semifed_har.models.schemas import validate_checkpoint_metadata
from semifed_har.models.specs import ModelParams, spec_from_dict


logger = logging.getLogger(__name__)

MAGIC = b"FSFL"
VERSION = 1
CHECKSUM_SIZE = 8
HEADER_SIZE = 16
MIN_SIZE = HEADER_SIZE + CHECKSUM_SIZE


def checksum(payload: bytes) -> bytes:
    return hashlib.blake2b(payload, digest_size=CHECKSUM_SIZE).digest()


@dataclass
class Checkpoint:
    """Decoded checkpoint: models by name plus the config fingerprint."""
    models: Dict[str, ModelParams] = field(default_factory=dict)
    fingerprint: str = ""

    def tensors(self) -> Dict[str, np.ndarray]:
        """Flat ``<model>/<tensor>`` view of every array."""
        return {f"{m}/{k}": v for m, params in self.models.items() for k, v in params.tensors().items()}


def _metadata(models: Mapping[str, ModelParams], fingerprint: str) -> Dict[str, Any]:
    meta: Dict[str, Any] = {}
    if fingerprint:
        meta["fingerprint"] = fingerprint
    if models:
        meta["models"] = {
            name: {"spec": params.spec.to_dict(), "buffers": list(params.buffers)}
            for name, params in models.items()
        }
    return meta


def encode_checkpoint(models: Mapping[str, ModelParams], fingerprint: str = "") -> bytes:
    """
    Serialize models into the checkpoint format.

    Arrays are stored as float32.
    """
    entries: List[Tuple[str, np.ndarray]] = []
    for model_name, params in models.items():
        for tensor_name, array in params.tensors().items():
            entries.append((f"{model_name}/{tensor_name}", array))

    meta = json.dumps(_metadata(models, fingerprint), sort_keys=True, separators=(",", ":")).encode("utf-8")

    buffer = io.BytesIO()
    buffer.write(MAGIC)
    buffer.write(struct.pack("<II", VERSION, len(entries)))
    buffer.write(struct.pack("<I", len(meta)))
    buffer.write(meta)
    for name, array in entries:
        raw_name = name.encode("utf-8")
        data = np.ascontiguousarray(array, dtype="<f4")
        buffer.write(struct.pack("<H", len(raw_name)))
        buffer.write(raw_name)
        buffer.write(struct.pack("<I", data.ndim))
        buffer.write(struct.pack(f"<{data.ndim}I", *data.shape))
        buffer.write(data.tobytes(order="C"))

    payload = buffer.getvalue()
    return payload + checksum(payload)


class _Reader:
    """Bounds-checked cursor over the checkpoint body (checksum excluded)."""

    def __init__(self, data: bytes, limit: int):
        self._data = data
        self._limit = limit
        self.offset = 0

    def read(self, size: int, what: str) -> bytes:
        end = self.offset + size
        if end > self._limit:
            raise CheckpointFormatError(f"{what} at byte {self.offset} runs past the body")
        chunk = self._data[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt: str, what: str) -> tuple:
        return struct.unpack(fmt, self.read(struct.calcsize(fmt), what))


def decode_checkpoint(data: bytes) -> Checkpoint:
    """
    Verify and parse checkpoint bytes.

    The checksum is checked before any record is read, so a damaged byte
    anywhere after the magic surfaces as a checksum error.

    Raises:
        CheckpointMagicError: If the magic is wrong.
        CheckpointTruncatedError: If the file is shorter than an empty checkpoint.
        CheckpointChecksumError: If the trailing checksum does not match.
        CheckpointFormatError: If a checksummed body has malformed records.
        CheckpointError: For an unsupported version or bad metadata.
    """
    if len(data) < len(MAGIC):
        raise CheckpointTruncatedError(f"file is {len(data)} bytes, shorter than the magic")
    if data[: len(MAGIC)] != MAGIC:
        raise CheckpointMagicError(f"bad magic {data[:len(MAGIC)]!r}, expected {MAGIC!r}")
    if len(data) < MIN_SIZE:
        raise CheckpointTruncatedError(f"file is {len(data)} bytes, shorter than the {MIN_SIZE}-byte minimum")

    body_end = len(data) - CHECKSUM_SIZE
    if checksum(data[:body_end]) != data[body_end:]:
        raise CheckpointChecksumError("checksum mismatch")

    reader = _Reader(data, body_end)
    reader.read(len(MAGIC), "magic")
    version, count = reader.unpack("<II", "header")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    (meta_len,) = reader.unpack("<I", "metadata length")
    meta_raw = reader.read(meta_len, "metadata")

    arrays: Dict[str, np.ndarray] = {}
    for index in range(count):
        (name_len,) = reader.unpack("<H", f"tensor {index} name length")
        try:
            name = reader.read(name_len, f"tensor {index} name").decode("utf-8")
        except UnicodeDecodeError as e:
            raise CheckpointFormatError(f"tensor {index} name is not UTF-8: {e}")
        (rank,) = reader.unpack("<I", f"tensor {name} rank")
        dims = reader.unpack(f"<{rank}I", f"tensor {name} dims") if rank else ()
        size = int(np.prod(dims, dtype=np.int64)) if rank else 1
        raw = reader.read(4 * size, f"tensor {name} data")
        arrays[name] = np.frombuffer(raw, dtype="<f4").reshape(dims).astype(np.float32)

    if reader.offset != body_end:
        raise CheckpointFormatError(f"{body_end - reader.offset} unexpected bytes after the last tensor")

    try:
        meta = json.loads(meta_raw.decode("utf-8"))
        validate_checkpoint_metadata(meta)
    except (UnicodeDecodeError, json.JSONDecodeError, ValidationError) as e:
        raise CheckpointError(f"invalid metadata: {e}")

    models: Dict[str, ModelParams] = {}
    for model_name, info in meta.get("models", {}).items():
        prefix = f"{model_name}/"
        tensors = {k[len(prefix):]: v for k, v in arrays.items() if k.startswith(prefix)}
        buffers = set(info.get("buffers", []))
        try:
            spec = spec_from_dict(info["spec"])
        except (KeyError, TypeError, ValueError) as e:
            raise CheckpointError(f"invalid spec for model {model_name}: {e}")
        models[model_name] = ModelParams(
            spec=spec,
            params={k: v for k, v in tensors.items() if k not in buffers},
            buffers={k: v for k, v in tensors.items() if k in buffers},
        )
    return Checkpoint(models=models, fingerprint=meta.get("fingerprint", ""))


def save_checkpoint(models: Mapping[str, ModelParams], path: Union[str, Path], fingerprint: str = "") -> int:
    """Write a checkpoint file; returns its size in bytes."""
    payload = encode_checkpoint(models, fingerprint)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)
    logger.debug(f"Saved checkpoint {path} ({len(payload)} bytes)")
    return len(payload)


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """Read and verify a checkpoint file."""
    return decode_checkpoint(Path(path).read_bytes())


def serialized_size(params: ModelParams) -> int:
    """Bytes a single model occupies in the checkpoint format."""
    return len(encode_checkpoint({"model": params}))


def inspect_checkpoint(path: Union[str, Path]) -> Dict[str, Any]:
    """Summary of a checkpoint: tensor shapes, parameter counts and fingerprint."""
    path = Path(path)
    checkpoint = load_checkpoint(path)
    return {
        "path": str(path),
        "bytes": path.stat().st_size,
        "fingerprint": checkpoint.fingerprint,
        "models": {
            name: {
                "spec": params.spec.to_dict(),
                "parameter_count": params.parameter_count(),
                "tensors": {k: list(v.shape) for k, v in params.tensors().items()},
            }
            for name, params in checkpoint.models.items()
        },
    }
