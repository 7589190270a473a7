import hashlib
import json
import os
import random
import struct
import threading

import pytest

from matproof.ledger import GENESIS, IntegrityError, LedgerEntry, LedgerError, Store, audit, fetch, publish


@pytest.fixture
def store(tmp_path):
    return Store(tmp_path / "ledger")


def test_genesis(store):
    e = store.publish(b"hello", "comm")
    assert e.index == 0 and e.prev_hash == "00" * 32
    assert e.payload_hash == hashlib.sha256(b"hello").hexdigest()
    assert e.payload_ref == f"payloads/{e.payload_hash}"
    assert (store.root / "HEAD").read_text() == e.hash.hex()
    assert store.audit()


def test_entry_hash_preimage():
    e = LedgerEntry(3, "11" * 32, "22" * 32, "proof", 1700000000000000000, "payloads/" + "22" * 32)
    pre = bytes.fromhex("11" * 32) + struct.pack(">Q", 3) + struct.pack(">I", 5) + b"proof"
    pre += bytes.fromhex("22" * 32) + struct.pack(">Q", 1700000000000000000)
    assert e.hash == hashlib.sha256(pre).digest()
    assert LedgerEntry.from_line(e.to_line()) == e
    with pytest.raises(IntegrityError):
        LedgerEntry.from_line(json.dumps(json.loads(e.to_line()), indent=1))


def test_identical_payload_twice(store):
    a = publish(store, b"same", "record")
    b = publish(store, b"same", "record")
    assert a.payload_hash == b.payload_hash and a.hash != b.hash
    assert b.prev_hash == a.hash.hex() and b.index == 1
    assert len(list(store.payloads.iterdir())) == 1
    assert audit(store)


def test_large_payload_roundtrip(store):
    blob = random.Random(1).randbytes(1 << 20)
    e = store.publish(blob, "proof")
    data, got = fetch(store, e.index)
    assert data == blob and got == e


def test_fetch_errors(store):
    e = store.publish(b"abc", "comm")
    with pytest.raises(LedgerError):
        store.fetch(1)
    with pytest.raises(LedgerError):
        store.fetch(-1)
    with pytest.raises(LedgerError):
        store.publish(b"x", "weights")
    path = store.root / e.payload_ref
    raw = bytearray(path.read_bytes())
    raw[0] ^= 1
    path.write_bytes(bytes(raw))
    with pytest.raises(IntegrityError):
        store.fetch(0)
    assert not store.audit()


def test_audit_detects_edits(store):
    for i in range(3):
        store.publish(bytes([i]) * 10, "record")
    assert store.audit()
    lines = store.index_path.read_text().splitlines()
    d = json.loads(lines[1])
    d["payload_type"] = "comm"
    lines[1] = json.dumps(d, sort_keys=True, separators=(",", ":"))
    store.index_path.write_text("\n".join(lines) + "\n")
    assert not store.audit()


def test_audit_detects_truncation_and_deletion(store):
    for i in range(3):
        store.publish(bytes([i]), "record")
    lines = store.index_path.read_text().splitlines()
    store.index_path.write_text("\n".join(lines[:2]) + "\n")
    assert not store.audit()  # HEAD still names the dropped entry
    store.index_path.write_text("\n".join(lines) + "\n")
    assert store.audit()
    os.remove(store.root / json.loads(lines[2])["payload_ref"])
    assert not store.audit()


def test_randomized_corruption(tmp_path):
    rng = random.Random(7)
    for trial in range(100):
        s = Store(tmp_path / f"s{trial}")
        for _ in range(rng.randint(1, 4)):
            s.publish(rng.randbytes(rng.randint(1, 64)), rng.choice(("comm", "proof", "record")))
        files = [s.index_path, s.head_path] + sorted(s.payloads.iterdir())
        target = rng.choice(files)
        raw = bytearray(target.read_bytes())
        pos = rng.randrange(len(raw))
        raw[pos] ^= 1 << rng.randrange(8)
        target.write_bytes(bytes(raw))
        assert not s.audit(), (trial, target.name, pos)


def test_concurrent_publish(store):
    def worker(k):
        for i in range(10):
            store.publish(f"{k}-{i}".encode(), "record")

    threads = [threading.Thread(target=worker, args=(k,)) for k in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(store) == 40 and store.audit()
    assert [e.index for e in store.entries()] == list(range(40))


def test_reopen(store):
    store.publish(b"a", "comm")
    again = Store(store.root)
    e = again.publish(b"b", "proof")
    assert e.index == 1 and again.audit()
    assert bytes.fromhex(again.entries()[0].prev_hash) == GENESIS


def test_hex_case_is_canonical(store):
    e = store.publish(b"abc", "comm")
    line = e.to_line().replace(e.payload_hash, e.payload_hash.upper(), 1)
    with pytest.raises(IntegrityError):
        LedgerEntry.from_line(line)
    store.index_path.write_text(line + "\n")
    assert not store.audit()
