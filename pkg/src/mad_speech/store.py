"""Binary embedding container (``.mads``).

Layout, little-endian::

    b"MADS"  version:u32  dim:u32  count:u64
    count x (utf-8 id, NUL-terminated)
    count x dim float32, row-major
    crc32 of everything above : u32

Structure is validated before the checksum, so a truncated file is always
reported as such rather than relying on a CRC coincidence.
"""

import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import (
    ChecksumMismatch,
    CorruptHeader,
    DimMismatch,
    DuplicateId,
    InvalidRow,
    MissingEmbedding,
    VersionUnsupported,
)
from .fileio import atomic_write_bytes

STORE_MAGIC = b"MADS"
STORE_VERSION = 1
_HEADER = struct.Struct("<4sIIQ")


class EmbeddingStore:
    """Utterance embeddings addressed by id."""

    def __init__(self, ids, rows):
        rows = np.ascontiguousarray(rows, dtype=np.float32)
        ids = [str(i) for i in ids]
        if rows.ndim != 2 or rows.shape[1] == 0:
            raise DimMismatch(f"rows must be count x dim with dim > 0, got {rows.shape}")
        if len(ids) != rows.shape[0]:
            raise DimMismatch(f"{len(ids)} ids for {rows.shape[0]} rows")
        index = {}
        for i, uid in enumerate(ids):
            if not uid or "\x00" in uid:
                raise InvalidRow(f"row {i}: id must be non-empty and NUL-free")
            if uid in index:
                raise DuplicateId(f"duplicate id {uid!r} (rows {index[uid]} and {i})")
            index[uid] = i
        bad_finite = ~np.all(np.isfinite(rows), axis=1)
        if bad_finite.any():
            names = [ids[i] for i in np.flatnonzero(bad_finite)[:5]]
            raise InvalidRow(f"non-finite values in rows {names}")
        zero = np.linalg.norm(rows.astype(np.float64), axis=1) == 0.0
        if zero.any():
            names = [ids[i] for i in np.flatnonzero(zero)[:5]]
            raise InvalidRow(f"zero-norm rows {names}")
        self.ids = ids
        self.rows = rows
        self.id_index = index

    @property
    def dim(self):
        return self.rows.shape[1]

    @property
    def count(self):
        return self.rows.shape[0]

    def __len__(self):
        return self.count

    def __contains__(self, uid):
        return uid in self.id_index

    def get(self, ids):
        """Rows for ``ids`` as a float64 array, in the given order."""
        try:
            idx = [self.id_index[i] for i in ids]
        except KeyError as exc:
            raise MissingEmbedding(exc.args[0]) from None
        return self.rows[idx].astype(np.float64)

    def __eq__(self, other):
        return (
            isinstance(other, EmbeddingStore)
            and self.ids == other.ids
            and self.rows.shape == other.rows.shape
            and self.rows.tobytes() == other.rows.tobytes()
        )


def store_to_bytes(store):
    parts = [_HEADER.pack(STORE_MAGIC, STORE_VERSION, store.dim, store.count)]
    parts += [uid.encode("utf-8") + b"\x00" for uid in store.ids]
    parts.append(store.rows.astype("<f4", copy=False).tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def store_from_bytes(data):
    data = bytes(data)
    total = len(data)
    if total < _HEADER.size + 4:
        raise CorruptHeader(f"file too short for a header ({total} bytes)", offset=total)
    magic, version, dim, count = _HEADER.unpack_from(data, 0)
    if magic != STORE_MAGIC:
        raise CorruptHeader("bad magic, not an embedding store", offset=0)
    if version != STORE_VERSION:
        raise VersionUnsupported(f"store version {version} (supported: {STORE_VERSION})", offset=4)
    if dim == 0:
        raise CorruptHeader("dim is zero", offset=8)
    end = total - 4
    if count > end - _HEADER.size:
        raise CorruptHeader(f"count {count} cannot fit in {total} bytes", offset=12)

    pos = _HEADER.size
    ids = []
    for i in range(count):
        nul = data.find(b"\x00", pos, end)
        if nul < 0:
            raise CorruptHeader(f"id {i} is not NUL-terminated", offset=pos)
        try:
            ids.append(data[pos:nul].decode("utf-8"))
        except UnicodeDecodeError:
            raise CorruptHeader(f"id {i} is not valid UTF-8", offset=pos) from None
        pos = nul + 1

    payload = 4 * dim * count
    if pos + payload != end:
        raise CorruptHeader(
            f"expected {pos + payload + 4} bytes for {count}x{dim} rows, file has {total}", offset=pos
        )
    (stored,) = struct.unpack_from("<I", data, end)
    actual = zlib.crc32(memoryview(data)[:end])
    if stored != actual:
        raise ChecksumMismatch(f"CRC32 {actual:08x} != stored {stored:08x}", offset=end)

    rows = np.frombuffer(data, dtype="<f4", count=dim * count, offset=pos).reshape(count, dim)
    try:
        return EmbeddingStore(ids, rows.astype(np.float32))
    except DuplicateId as exc:
        raise DuplicateId(str(exc), offset=_HEADER.size) from None
    except InvalidRow as exc:
        raise InvalidRow(str(exc), offset=pos) from None


def store_write(path, store):
    atomic_write_bytes(path, store_to_bytes(store))


def store_read(path):
    return store_from_bytes(Path(path).read_bytes())
