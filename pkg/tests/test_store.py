import struct
import threading
import zlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mad_speech.errors import (
    ChecksumMismatch,
    CorruptHeader,
    DimMismatch,
    DuplicateId,
    FormatError,
    InvalidRow,
    MissingEmbedding,
    VersionUnsupported,
)
from mad_speech.fileio import atomic_write_bytes, dumps, format_float, thread_count
from mad_speech.store import EmbeddingStore, store_from_bytes, store_read, store_to_bytes, store_write


def make_store(n=3, dim=192, seed=0):
    rng = np.random.default_rng(seed)
    return EmbeddingStore([f"utt{i}" for i in range(n)], rng.normal(size=(n, dim)))


def test_round_trip_bitwise(tmp_path):
    store = make_store()
    path = tmp_path / "e.mads"
    store_write(path, store)
    first = path.read_bytes()
    loaded = store_read(path)
    assert loaded == store
    store_write(path, loaded)
    assert path.read_bytes() == first


def test_header_fields():
    store = make_store()
    blob = store_to_bytes(store)
    magic, version, dim, count = struct.unpack_from("<4sIIQ", blob)
    assert (magic, version, dim, count) == (b"MADS", 1, 192, 3)
    loaded = store_from_bytes(blob)
    assert all(uid in loaded for uid in ["utt0", "utt1", "utt2"])
    assert np.array_equal(loaded.get(["utt2", "utt0"]), store.rows[[2, 0]].astype(np.float64))
    assert struct.unpack("<I", blob[-4:])[0] == zlib.crc32(blob[:-4])


def test_flipped_payload_byte():
    blob = bytearray(store_to_bytes(make_store()))
    blob[-10] ^= 0x40
    with pytest.raises(ChecksumMismatch):
        store_from_bytes(bytes(blob))


def test_structural_errors():
    blob = store_to_bytes(make_store(dim=4))
    with pytest.raises(CorruptHeader) as info:
        store_from_bytes(b"NOPE" + blob[4:])
    assert info.value.offset == 0
    with pytest.raises(VersionUnsupported):
        store_from_bytes(blob[:4] + struct.pack("<I", 2) + blob[8:])
    with pytest.raises(CorruptHeader):
        store_from_bytes(blob[:10])
    with pytest.raises(CorruptHeader):
        store_from_bytes(blob[:-5])


def test_store_validation():
    with pytest.raises(DuplicateId):
        EmbeddingStore(["a", "a"], np.ones((2, 2)))
    with pytest.raises(InvalidRow, match="b"):
        EmbeddingStore(["a", "b"], [[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(InvalidRow):
        EmbeddingStore(["a", "b"], [[1.0, 0.0], [np.nan, 0.0]])
    with pytest.raises(InvalidRow):
        EmbeddingStore([""], [[1.0]])
    with pytest.raises(DimMismatch):
        EmbeddingStore(["a"], np.ones((2, 2)))
    with pytest.raises(MissingEmbedding) as info:
        make_store().get(["nope"])
    assert info.value.utterance_id == "nope"


def test_duplicate_id_on_disk_reported():
    # hand-build a well-checksummed file with two equal ids
    body = struct.pack("<4sIIQ", b"MADS", 1, 1, 2) + b"x\x00x\x00" + np.ones(2, "<f4").tobytes()
    with pytest.raises(DuplicateId):
        store_from_bytes(body + struct.pack("<I", zlib.crc32(body)))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.text(alphabet=st.characters(blacklist_characters="\x00", blacklist_categories=("Cs",)),
                        min_size=1, max_size=8), min_size=1, max_size=6, unique=True),
       st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_round_trip_property(ids, dim, seed):
    rows = np.random.default_rng(seed).normal(size=(len(ids), dim)) + 0.1
    store = EmbeddingStore(ids, rows)
    assert store_from_bytes(store_to_bytes(store)) == store


def test_fault_injection_sample():
    rng = np.random.default_rng(0)
    blob = store_to_bytes(make_store(n=4, dim=3))
    for _ in range(300):
        bad = bytearray(blob)
        if rng.random() < 0.5:
            bad = bad[: rng.integers(0, len(bad))]
        else:
            pos = rng.integers(0, len(bad))
            bad[pos] ^= 1 << int(rng.integers(0, 8))
        with pytest.raises(FormatError):
            store_from_bytes(bytes(bad))


# --- file helpers

def test_format_float_round_trips():
    for x in [0.1, 1 / 3, 1e-300, 4.0, -2.5e17]:
        assert float(format_float(x)) == x
    assert dumps({"a": [1.0, 2.5], "b": {"c": None}}) == '{\n  "a": [1.0, 2.5],\n  "b": {\n    "c": null\n  }\n}'


def test_atomic_write_never_exposes_partial_file(tmp_path):
    path = tmp_path / "f.bin"
    payloads = [bytes([i]) * 200_000 for i in range(4)]
    seen = []

    def reader():
        for _ in range(200):
            if path.exists():
                data = path.read_bytes()
                seen.append(data in payloads)

    t = threading.Thread(target=reader)
    t.start()
    for _ in range(20):
        for p in payloads:
            atomic_write_bytes(path, p)
    t.join()
    assert all(seen)
    assert [p.name for p in tmp_path.iterdir()] == ["f.bin"]


def test_thread_count(monkeypatch):
    monkeypatch.setenv("MADS_THREADS", "3")
    assert thread_count() == 3
    assert thread_count(5) == 5
    monkeypatch.delenv("MADS_THREADS")
    assert thread_count() >= 1
