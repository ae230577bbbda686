"""Little-endian binary container helpers used by every on-disk format.

Each file is ``magic (4 bytes) | version (u32) | header fields (u32 ...) |
payload``.  Readers validate magic, version and exact payload length so a
corrupted file always raises a :class:`~corrnet.errors.FormatError` subclass.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import BadMagicError, FormatError, TruncationError, VersionMismatchError

_U32 = struct.Struct("<I")


class Reader:
    """Cursor over an in-memory file body with truncation checks."""

    def __init__(self, data: bytes, path: str | Path = "<bytes>"):
        self.data = data
        self.pos = 0
        self.path = str(path)

    def take(self, nbytes: int) -> bytes:
        end = self.pos + nbytes
        if end > len(self.data):
            raise TruncationError(
                f"truncation: {self.path} ends at byte {len(self.data)}, "
                f"expected at least {end}"
            )
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]

    def u32s(self, count: int) -> list[int]:
        return [int(v) for v in self.array("<u4", count)]

    def array(self, dtype: str, count: int, shape: tuple[int, ...] | None = None) -> np.ndarray:
        dt = np.dtype(dtype)
        raw = self.take(dt.itemsize * count)
        arr = np.frombuffer(raw, dtype=dt).astype(dt.newbyteorder("="), copy=True)
        return arr.reshape(shape) if shape is not None else arr

    def finish(self) -> None:
        if self.pos != len(self.data):
            raise FormatError(
                f"{self.path}: {len(self.data) - self.pos} trailing bytes after payload"
            )


def open_reader(path: str | Path, magic: bytes, version: int, what: str) -> Reader:
    data = Path(path).read_bytes()
    reader = Reader(data, path)
    if len(data) < 4:
        raise TruncationError(f"truncation: {path} is too short to hold a header")
    if data[:4] != magic:
        raise BadMagicError(f"not a {what} file: {path} (magic {data[:4]!r})")
    reader.pos = 4
    found = reader.u32()
    if found != version:
        raise VersionMismatchError(
            f"{what} file {path} has version {found}, this reader supports {version}"
        )
    return reader


def pack_header(magic: bytes, version: int, fields: list[int]) -> bytes:
    if len(magic) != 4:
        raise ValueError("magic must be 4 bytes")
    return magic + _U32.pack(version) + np.asarray(fields, dtype="<u4").tobytes()


def pack_array(arr: np.ndarray, dtype: str) -> bytes:
    return np.ascontiguousarray(arr, dtype=np.dtype(dtype)).tobytes()


def write_atomic(path: str | Path, payload: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    tmp.replace(path)
