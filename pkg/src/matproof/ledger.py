"""Append-only, hash-chained, content-addressed publication store.

Layout of a store directory::

    payloads/<sha256 hex>   payload bytes
    index.jsonl             one canonical JSON entry per line
    HEAD                    hex hash of the newest entry
    .lock                   writer lock

An entry's hash is SHA-256 over prev_hash | u64 index | u32 len(type) | type |
payload_hash | u64 timestamp_ns. Genesis prev_hash is 32 zero bytes.
"""
from __future__ import annotations

import fcntl
import hashlib
import json
import os
import re
import struct
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields
from pathlib import Path

PAYLOAD_TYPES = ("comm", "proof", "record")
GENESIS = bytes(32)
_HEX64 = re.compile("[0-9a-f]{64}")


class LedgerError(Exception):
    pass


class IntegrityError(LedgerError):
    pass


@dataclass(frozen=True)
class LedgerEntry:
    index: int
    prev_hash: str
    payload_hash: str
    payload_type: str
    timestamp: int
    payload_ref: str

    @property
    def hash(self) -> bytes:
        t = self.payload_type.encode()
        pre = (bytes.fromhex(self.prev_hash) + struct.pack(">Q", self.index) + struct.pack(">I", len(t)) + t
               + bytes.fromhex(self.payload_hash) + struct.pack(">Q", self.timestamp))
        return hashlib.sha256(pre).digest()

    def to_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_line(cls, line: str) -> LedgerEntry:
        try:
            d = json.loads(line)
        except ValueError as exc:
            raise IntegrityError(f"unreadable index line: {exc}") from None
        if not isinstance(d, dict) or set(d) != _FIELDS:
            raise IntegrityError("entry has unexpected fields")
        if not all(isinstance(d[k], int) and not isinstance(d[k], bool) for k in ("index", "timestamp")):
            raise IntegrityError("entry index and timestamp must be integers")
        if not all(isinstance(d[k], str) for k in _FIELDS - {"index", "timestamp"}):
            raise IntegrityError("entry hash and reference fields must be strings")
        if not all(_HEX64.fullmatch(d[k]) for k in ("prev_hash", "payload_hash")):
            raise IntegrityError("hashes must be 64 lowercase hex digits")
        entry = cls(**d)
        if entry.to_line() != line:
            raise IntegrityError(f"entry {entry.index} is not in canonical form")
        return entry


_FIELDS = frozenset(f.name for f in fields(LedgerEntry))


class Store:
    """A local store; the only mutating operation is ``publish``."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.payloads = self.root / "payloads"
        self.index_path = self.root / "index.jsonl"
        self.head_path = self.root / "HEAD"
        self.payloads.mkdir(parents=True, exist_ok=True)
        self.index_path.touch(exist_ok=True)

    @contextmanager
    def _locked(self):
        with open(self.root / ".lock", "a") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)

    def entries(self) -> list[LedgerEntry]:
        text = self.index_path.read_text()
        return [LedgerEntry.from_line(line) for line in text.splitlines()]

    def __len__(self):
        return len(self.index_path.read_text().splitlines())

    def publish(self, payload: bytes, payload_type: str) -> LedgerEntry:
        if payload_type not in PAYLOAD_TYPES:
            raise LedgerError(f"payload type must be one of {PAYLOAD_TYPES}")
        digest = hashlib.sha256(payload).hexdigest()
        with self._locked():
            entries = self.entries()
            prev = entries[-1].hash if entries else GENESIS
            path = self.payloads / digest
            if not path.exists():
                tmp = path.with_suffix(".tmp")
                tmp.write_bytes(payload)
                os.replace(tmp, path)
            entry = LedgerEntry(len(entries), prev.hex(), digest, payload_type, time.time_ns(),
                                f"payloads/{digest}")
            with open(self.index_path, "a") as fh:
                fh.write(entry.to_line() + "\n")
            self.head_path.write_text(entry.hash.hex())
        return entry

    def fetch(self, index: int) -> tuple[bytes, LedgerEntry]:
        entries = self.entries()
        if not 0 <= index < len(entries):
            raise LedgerError(f"no entry {index}")
        entry = entries[index]
        try:
            data = (self.root / entry.payload_ref).read_bytes()
        except OSError as exc:
            raise IntegrityError(f"payload of entry {index} is missing: {exc}") from None
        if hashlib.sha256(data).hexdigest() != entry.payload_hash:
            raise IntegrityError(f"payload of entry {index} does not match its hash")
        return data, entry

    def audit(self) -> bool:
        try:
            entries = self.entries()
            prev = GENESIS
            for i, e in enumerate(entries):
                if e.index != i or bytes.fromhex(e.prev_hash) != prev:
                    return False
                if e.payload_type not in PAYLOAD_TYPES or e.payload_ref != f"payloads/{e.payload_hash}":
                    return False
                data = (self.root / e.payload_ref).read_bytes()
                if hashlib.sha256(data).hexdigest() != e.payload_hash:
                    return False
                prev = e.hash
            head = self.head_path.read_text() if self.head_path.exists() else ""
            return head == (prev.hex() if entries else head)
        except (LedgerError, ValueError, OSError, TypeError):
            return False


def publish(store: Store, payload: bytes, payload_type: str) -> LedgerEntry:
    return store.publish(payload, payload_type)


def fetch(store: Store, index: int) -> tuple[bytes, LedgerEntry]:
    return store.fetch(index)


def audit(store: Store) -> bool:
    return store.audit()
