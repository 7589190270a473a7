"""Fiat-Shamir transcript over SHA-256.

Framing (all lengths big-endian):

    absorb:     state <- H(0x01 | state | u32 len(label) | label | u64 len(data) | data)
    challenge:  block_b = H(0x02 | state | u32 len(label) | label | u64 counter | u32 b)
                x = int.from_bytes(block_0 | block_1 | ..., "big") >> (excess bits)
                r = x mod p, keeping 2 * bitlen(p) bits
                state <- H(0x03 | state | x bytes); counter += 1
    init:       state = H(0x00 | u32 len(domain) | domain)

Every call takes a label. The protocol uses the schedule in ``LABELS``.
"""
from __future__ import annotations

import hashlib
import struct

from .field import FieldElement, FieldParams

HASH_ID_SHA256 = 1
DIGEST_SIZE = 32

LABELS = (
    "header",        # protocol parameters and dimensions
    "comm",          # each layer commitment
    "input",         # public input matrix
    "layer-output",  # digest of each layer output
    "rij",           # row/column evaluation point
    "round-poly",    # each sumcheck round polynomial, and the round challenge
    "w-eval",        # prover's claimed weight MLE value
    "kzg-u",         # KZG opening point
    "kzg-open",      # KZG opening (v and quotient commitment)
    "kzg-batch",     # verifier weights for the batched opening check
)
LABEL_SCHEDULE_ID = 1


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def _frame(label: str) -> bytes:
    raw = label.encode("ascii")
    return struct.pack(">I", len(raw)) + raw


class Transcript:
    def __init__(self, domain: str = "matproof-v1"):
        if not domain:
            raise ValueError("domain label required")
        self.domain = domain
        self.state = sha256(b"\x00" + _frame(domain))
        self.counter = 0
        self.log: list[tuple[str, str]] = []  # (label, hex) of every squeeze

    def clone(self) -> Transcript:
        t = Transcript.__new__(Transcript)
        t.domain, t.state, t.counter = self.domain, self.state, self.counter
        t.log = list(self.log)
        return t

    def absorb(self, label: str, data: bytes) -> Transcript:
        if not label:
            raise ValueError("label required")
        self.state = sha256(b"\x01" + self.state + _frame(label) + struct.pack(">Q", len(data)) + data)
        return self

    def absorb_field(self, label: str, elems) -> Transcript:
        if isinstance(elems, FieldElement):
            elems = [elems]
        return self.absorb(label, b"".join(e.to_bytes() for e in elems))

    def challenge_bytes(self, label: str, nbytes: int) -> bytes:
        if not label:
            raise ValueError("label required")
        prefix = b"\x02" + self.state + _frame(label) + struct.pack(">Q", self.counter)
        out = b""
        block = 0
        while len(out) < nbytes:
            out += sha256(prefix + struct.pack(">I", block))
            block += 1
        out = out[:nbytes]
        self.log.append((label, out.hex()))
        self.state = sha256(b"\x03" + self.state + out)
        self.counter += 1
        return out

    def challenge_field(self, label: str, params: FieldParams) -> FieldElement:
        nbits = 2 * params.bits
        raw = self.challenge_bytes(label, (nbits + 7) // 8)
        x = int.from_bytes(raw, "big") >> (8 * len(raw) - nbits)
        return FieldElement(x % params.modulus, params)

    def challenge_vector(self, label: str, params: FieldParams, n: int) -> list[FieldElement]:
        return [self.challenge_field(label, params) for _ in range(n)]
