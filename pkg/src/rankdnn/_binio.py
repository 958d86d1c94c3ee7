"""Shared helpers for the little-endian binary file formats.

All formats follow the same conventions: a 4-byte ASCII magic, u32 header
fields, float32 payloads in row-major order, no padding anywhere.  Floats
are widened to float64 when loaded; training math runs in float64.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError, TruncationError

_U32 = struct.Struct("<I")


class Writer:
    """Accumulates a format payload in memory before writing it out."""

    def __init__(self, magic: bytes):
        if len(magic) != 4:
            raise ValueError("magic must be 4 bytes")
        self._parts = [magic]

    def u32(self, value: int) -> None:
        if value < 0 or value > 0xFFFFFFFF:
            raise ValueError(f"u32 field out of range: {value}")
        self._parts.append(_U32.pack(value))

    def f32_array(self, arr) -> None:
        self._parts.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())

    def u32_array(self, arr) -> None:
        self._parts.append(np.ascontiguousarray(arr, dtype="<u4").tobytes())

    def to_file(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(b"".join(self._parts))


class Reader:
    """Cursor over a fully loaded artifact; short reads raise TruncationError."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    @classmethod
    def from_file(cls, path) -> "Reader":
        with open(path, "rb") as fh:
            return cls(fh.read())

    def _take(self, n: int) -> bytes:
        remaining = len(self._data) - self._pos
        if n > remaining:
            raise TruncationError(n, remaining)
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def magic(self, expected: bytes) -> None:
        actual = self._take(4)
        if actual != expected:
            raise FormatError("magic", f"expected {expected!r}, found {actual!r}")

    def u32(self) -> int:
        return _U32.unpack(self._take(4))[0]

    def version(self, expected: int) -> None:
        actual = self.u32()
        if actual != expected:
            raise FormatError("version", f"expected {expected}, found {actual}")

    def f32_array(self, count: int) -> np.ndarray:
        raw = self._take(4 * count)
        return np.frombuffer(raw, dtype="<f4").astype(np.float64)

    def u32_array(self, count: int) -> np.ndarray:
        raw = self._take(4 * count)
        return np.frombuffer(raw, dtype="<u4").astype(np.int64)

    def done(self) -> None:
        extra = len(self._data) - self._pos
        if extra:
            raise FormatError("trailing data", f"{extra} unexpected bytes")
