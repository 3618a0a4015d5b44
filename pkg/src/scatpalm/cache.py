"""SCF1 binary feature cache.

Layout, all integers little-endian u32::

    b"SCF1" | version=1 | N | d | n_classes
    N*d float32 feature rows (row-major)
    N u32 labels
    u32 byte length | UTF-8 JSON header (schema, sample ids, class names, ...)
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"SCF1"
VERSION = 1
_HEAD = struct.Struct("<4sIIII")


class CacheFormatError(ValueError):
    pass


@dataclass(eq=False)
class FeatureCache:
    schema: dict
    vectors: np.ndarray  # (N, d) float32
    labels: np.ndarray  # (N,) uint32
    sample_ids: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vectors = np.ascontiguousarray(self.vectors, dtype="<f4")
        self.labels = np.ascontiguousarray(self.labels, dtype="<u4")
        if self.vectors.ndim != 2 or len(self.vectors) != len(self.labels):
            raise ValueError(
                f"vectors {self.vectors.shape} and labels {self.labels.shape} are inconsistent"
            )
        if not self.sample_ids:
            self.sample_ids = list(range(len(self.labels)))
        if "dim" in self.schema and self.schema["dim"] != self.vectors.shape[1]:
            raise ValueError(f"schema dim {self.schema['dim']} != vector dim {self.vectors.shape[1]}")

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def to_bytes(self) -> bytes:
        header = {"schema": self.schema, "sample_ids": [int(s) for s in self.sample_ids],
                  "meta": self.meta}
        text = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
        n_classes = len(np.unique(self.labels))
        return b"".join([
            _HEAD.pack(MAGIC, VERSION, self.n, self.dim, n_classes),
            self.vectors.tobytes(),
            self.labels.tobytes(),
            struct.pack("<I", len(text)),
            text,
        ])

    @classmethod
    def from_bytes(cls, buf: bytes) -> "FeatureCache":
        if len(buf) < _HEAD.size:
            raise CacheFormatError("truncated header")
        magic, version, n, d, n_classes = _HEAD.unpack_from(buf, 0)
        if magic != MAGIC:
            raise CacheFormatError(f"bad magic {magic!r}")
        if version != VERSION:
            raise CacheFormatError(f"unsupported version {version}")
        off = _HEAD.size
        vec_bytes, lab_bytes = 4 * n * d, 4 * n
        if len(buf) < off + vec_bytes + lab_bytes + 4:
            raise CacheFormatError("truncated payload")
        vectors = np.frombuffer(buf, dtype="<f4", count=n * d, offset=off).reshape(n, d)
        off += vec_bytes
        labels = np.frombuffer(buf, dtype="<u4", count=n, offset=off)
        off += lab_bytes
        (length,) = struct.unpack_from("<I", buf, off)
        off += 4
        if len(buf) != off + length:
            raise CacheFormatError("header length does not match file size")
        header = json.loads(buf[off:off + length].decode("utf-8"))
        if len(np.unique(labels)) != n_classes:
            raise CacheFormatError("class count does not match labels")
        sample_ids = header.get("sample_ids", [])
        if len(sample_ids) != n:
            raise CacheFormatError("sample id count does not match N")
        return cls(header["schema"], vectors.copy(), labels.copy(), sample_ids,
                   header.get("meta", {}))


def atomic_write(path: str, data: bytes) -> None:
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_cache(path: str, cache: FeatureCache) -> None:
    atomic_write(path, cache.to_bytes())


def read_cache(path: str) -> FeatureCache:
    with open(path, "rb") as fh:
        return FeatureCache.from_bytes(fh.read())
