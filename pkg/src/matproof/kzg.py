"""KZG polynomial commitments over an abstract pairing group.

Two backends ship: ``MockGroup`` where every group is the scalar field itself
and the pairing is multiplication (insecure, for exhaustive tests), and
``Bls12381Group`` backed by py_ecc.
"""
from __future__ import annotations

import abc
import hashlib
import secrets
import struct
from dataclasses import dataclass
from typing import Any, Sequence

from .field import BLS12_381_R, FieldElement, FieldParams, profile

MAX_DEGREE = 1 << 20
KEY_MAGIC = b"ZKFG"
FORMAT_VERSION = 1


class KzgError(ValueError):
    pass


class PairingGroup(abc.ABC):
    backend_id: int
    name: str
    scalar: FieldParams
    g1_size: int
    g2_size: int

    @property
    @abc.abstractmethod
    def g1_gen(self) -> Any: ...

    @property
    @abc.abstractmethod
    def g2_gen(self) -> Any: ...

    @property
    @abc.abstractmethod
    def g1_zero(self) -> Any: ...

    @abc.abstractmethod
    def g1_add(self, a, b): ...

    @abc.abstractmethod
    def g1_mul(self, a, k: int): ...

    @abc.abstractmethod
    def g2_add(self, a, b): ...

    @abc.abstractmethod
    def g2_mul(self, a, k: int): ...

    @abc.abstractmethod
    def g1_eq(self, a, b) -> bool: ...

    @abc.abstractmethod
    def pairing(self, a, b): ...

    @abc.abstractmethod
    def gt_mul(self, x, y): ...

    @abc.abstractmethod
    def gt_pow(self, x, k: int): ...

    @abc.abstractmethod
    def gt_eq(self, x, y) -> bool: ...

    @abc.abstractmethod
    def encode_g1(self, a) -> bytes: ...

    @abc.abstractmethod
    def decode_g1(self, data: bytes, check: bool = True): ...

    @abc.abstractmethod
    def encode_g2(self, a) -> bytes: ...

    @abc.abstractmethod
    def decode_g2(self, data: bytes): ...

    def check_g2(self, a) -> bool:
        """Prime-order subgroup membership."""
        return True

    def g2_neg(self, a):
        return self.g2_mul(a, self.scalar.modulus - 1)

    def msm(self, points: Sequence, scalars: Sequence[int]):
        acc = self.g1_zero
        for pt, k in zip(points, scalars):
            if k:
                acc = self.g1_add(acc, self.g1_mul(pt, k))
        return acc


class MockGroup(PairingGroup):
    """G1 = G2 = GT = the scalar field, generators 1, e(a, b) = a * b.

    Discrete logs are the points themselves, so this hides nothing.
    """

    backend_id = 1
    name = "mock"

    def __init__(self, scalar: FieldParams):
        self.scalar = scalar
        self.g1_size = self.g2_size = scalar.byte_width
        self._p = scalar.modulus

    g1_gen = property(lambda self: 1)
    g2_gen = property(lambda self: 1)
    g1_zero = property(lambda self: 0)

    def g1_add(self, a, b):
        return (a + b) % self._p

    def g1_mul(self, a, k):
        return a * k % self._p

    g2_add, g2_mul = g1_add, g1_mul

    def g1_eq(self, a, b):
        return a % self._p == b % self._p

    def pairing(self, a, b):
        return a * b % self._p

    def gt_mul(self, x, y):
        return (x + y) % self._p

    def gt_pow(self, x, k):
        return x * k % self._p

    def gt_eq(self, x, y):
        return x % self._p == y % self._p

    def msm(self, points, scalars):
        return sum(a * k for a, k in zip(points, scalars)) % self._p

    def encode_g1(self, a):
        return a.to_bytes(self.g1_size, "little")

    def decode_g1(self, data, check=True):
        if len(data) != self.g1_size:
            raise KzgError("bad group element width")
        v = int.from_bytes(data, "little")
        if v >= self._p:
            raise KzgError("non-canonical group element")
        return v

    encode_g2 = encode_g1

    def decode_g2(self, data):
        return self.decode_g1(data)


class Bls12381Group(PairingGroup):
    """BLS12-381 via py_ecc's optimized module.

    Points are encoded uncompressed and affine, big-endian coordinates
    (G1: x | y, 96 bytes; G2: x.c0 | x.c1 | y.c0 | y.c1, 192 bytes); the
    point at infinity is all zero bytes.
    """

    backend_id = 2
    name = "bls12-381"
    g1_size = 96
    g2_size = 192

    def __init__(self):
        from py_ecc import optimized_bls12_381 as bls

        self._b = bls
        self.scalar = BLS12_381_R
        if bls.curve_order != self.scalar.modulus:
            raise KzgError("py_ecc curve order does not match the scalar field")

    g1_gen = property(lambda self: self._b.G1)
    g2_gen = property(lambda self: self._b.G2)
    g1_zero = property(lambda self: self._b.Z1)

    def g1_add(self, a, b):
        return self._b.add(a, b)

    def g1_mul(self, a, k):
        return self._b.multiply(a, k % self.scalar.modulus)

    g2_add, g2_mul = g1_add, g1_mul

    def g1_eq(self, a, b):
        return self._b.eq(a, b)

    def pairing(self, a, b):
        return self._b.pairing(b, a)

    def gt_mul(self, x, y):
        return x * y

    def gt_pow(self, x, k):
        return x ** (k % self.scalar.modulus)

    def gt_eq(self, x, y):
        return x == y

    def encode_g1(self, a):
        if self._b.is_inf(a):
            return bytes(self.g1_size)
        x, y = self._b.normalize(a)
        return x.n.to_bytes(48, "big") + y.n.to_bytes(48, "big")

    def decode_g1(self, data, check=True):
        b = self._b
        if len(data) != self.g1_size:
            raise KzgError("bad G1 width")
        if not any(data):
            return b.Z1
        x, y = (int.from_bytes(data[i:i + 48], "big") for i in (0, 48))
        if max(x, y) >= b.field_modulus:
            raise KzgError("G1 coordinate out of range")
        pt = (b.FQ(x), b.FQ(y), b.FQ.one())
        if not b.is_on_curve(pt, b.b):
            raise KzgError("point not on G1")
        if check and not b.is_inf(b.multiply(pt, self.scalar.modulus)):
            raise KzgError("point outside the prime-order subgroup of G1")
        return pt

    def encode_g2(self, a):
        if self._b.is_inf(a):
            return bytes(self.g2_size)
        x, y = self._b.normalize(a)
        return b"".join(c.to_bytes(48, "big") for c in (*x.coeffs, *y.coeffs))

    def decode_g2(self, data):
        b = self._b
        if len(data) != self.g2_size:
            raise KzgError("bad G2 width")
        if not any(data):
            return b.Z2
        c = [int.from_bytes(data[i:i + 48], "big") for i in range(0, 192, 48)]
        if max(c) >= b.field_modulus:
            raise KzgError("G2 coordinate out of range")
        pt = (b.FQ2(c[:2]), b.FQ2(c[2:]), b.FQ2.one())
        if not b.is_on_curve(pt, b.b2):
            raise KzgError("point not on G2")
        return pt

    def check_g2(self, a) -> bool:
        return self._b.is_inf(self._b.multiply(a, self.scalar.modulus))


_GROUP_CACHE: dict = {}


def group_for(backend: int | str, scalar: FieldParams | None = None) -> PairingGroup:
    if backend in (1, "mock"):
        if scalar is None:
            raise KzgError("mock backend needs a scalar field")
        key = ("mock", scalar.modulus)
        if key not in _GROUP_CACHE:
            _GROUP_CACHE[key] = MockGroup(scalar)
        return _GROUP_CACHE[key]
    if backend in (2, "bls12-381"):
        if scalar is not None and scalar.modulus != BLS12_381_R.modulus:
            raise KzgError("bls12-381 backend requires the bls12-381 scalar field")
        if "bls" not in _GROUP_CACHE:
            _GROUP_CACHE["bls"] = Bls12381Group()
        return _GROUP_CACHE["bls"]
    raise KzgError(f"unknown backend {backend!r}")


@dataclass(frozen=True)
class ProverKey:
    group: PairingGroup
    powers: tuple  # s^i G in G1

    @property
    def degree_bound(self) -> int:
        return len(self.powers) - 1


@dataclass(frozen=True)
class VerifierKey:
    group: PairingGroup
    powers: tuple  # s^i H in G2

    @property
    def degree_bound(self) -> int:
        return len(self.powers) - 1


@dataclass(frozen=True)
class KzgKeys:
    pk: ProverKey
    vk: VerifierKey
    n: int
    secret: int | None = None  # kept only when insecure retention was requested


@dataclass(frozen=True)
class Commitment:
    point: Any


@dataclass(frozen=True)
class Opening:
    u: FieldElement
    v: FieldElement
    point: Any


def _derive_secret(seed, r: int) -> int:
    if isinstance(seed, int):
        seed = seed.to_bytes(max(1, (seed.bit_length() + 8) // 8), "big", signed=True)
    elif isinstance(seed, str):
        seed = seed.encode()
    ctr = 0
    while True:
        h = hashlib.sha512(b"matproof-kzg-setup" + struct.pack(">I", ctr) + seed).digest()
        s = int.from_bytes(h, "big") % r
        if s > 1:
            return s
        ctr += 1


def key_gen(group: PairingGroup, n: int, seed=None, *, secret: int | None = None,
            retain_secret: bool = False) -> KzgKeys:
    """Powers of a fresh secret s on both generators.

    ``seed`` makes setup reproducible (test use); ``secret`` pins s outright.
    """
    if n < 0:
        raise KzgError("degree bound must be non-negative")
    if n > MAX_DEGREE:
        raise KzgError(f"degree bound {n} exceeds backend limit {MAX_DEGREE}")
    r = group.scalar.modulus
    if secret is None:
        secret = _derive_secret(seed, r) if seed is not None else secrets.randbelow(r - 2) + 2
    s = secret % r
    pows = [pow(s, i, r) for i in range(n + 1)]
    pk = ProverKey(group, tuple(group.g1_mul(group.g1_gen, k) for k in pows))
    vk = VerifierKey(group, tuple(group.g2_mul(group.g2_gen, k) for k in pows))
    return KzgKeys(pk, vk, n, s if retain_secret else None)


def _ints(coeffs) -> list[int]:
    return [c.value if isinstance(c, FieldElement) else int(c) for c in coeffs]


def commit(pk: ProverKey, coeffs: Sequence[FieldElement]) -> Commitment:
    if len(coeffs) > len(pk.powers):
        raise KzgError(f"polynomial has {len(coeffs)} coefficients, key supports {len(pk.powers)}")
    return Commitment(pk.group.msm(pk.powers[:len(coeffs)], _ints(coeffs)))


def horner(coeffs: Sequence[FieldElement], x: FieldElement) -> FieldElement:
    acc = x.params.zero()
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def divide_linear(coeffs: Sequence[FieldElement], u: FieldElement) -> tuple[list[FieldElement], FieldElement]:
    """Synthetic division by (x - u): returns (quotient, remainder)."""
    if not coeffs:
        return [], u.params.zero()
    q = [u.params.zero()] * (len(coeffs) - 1)
    carry = u.params.zero()
    for i in range(len(coeffs) - 1, 0, -1):
        carry = coeffs[i] + carry * u
        q[i - 1] = carry
    rem = coeffs[0] + carry * u if len(coeffs) > 1 else coeffs[0]
    return q, rem


def open(pk: ProverKey, coeffs: Sequence[FieldElement], u: FieldElement) -> Opening:  # noqa: A001
    v = horner(coeffs, u)
    shifted = list(coeffs)
    if shifted:
        shifted[0] = shifted[0] - v
    q, rem = divide_linear(shifted, u)
    if rem != 0:
        raise AssertionError("division by (x - u) left a remainder")
    return Opening(u, v, commit(pk, q).point)


def verify_opening(vk: VerifierKey, comm: Commitment, opening: Opening) -> bool:
    """e(comm, H) == e(opening, sH - uH) * e(G, H)^v."""
    g = vk.group
    if len(vk.powers) < 2:
        # degree-0 keys: only constants can be committed, opening must be trivial
        return g.g1_eq(comm.point, g.g1_mul(g.g1_gen, opening.v.value)) and g.g1_eq(opening.point, g.g1_zero)
    H, sH = vk.powers[0], vk.powers[1]
    lhs = g.pairing(comm.point, H)
    shifted = g.g2_add(sH, g.g2_mul(H, (-opening.u).value))
    rhs = g.gt_mul(g.pairing(opening.point, shifted), g.gt_pow(g.pairing(g.g1_gen, H), opening.v.value))
    return g.gt_eq(lhs, rhs)


def batch_verify_openings(vk: VerifierKey, items: Sequence[tuple[Commitment, Opening]],
                          weights: Sequence[FieldElement]) -> bool:
    """All openings at once, two pairings total.

    Each check e(C, H) = e(pi, sH - uH) e(G, H)^v is rearranged to
    e(C - vG + u pi, H) = e(pi, sH) and the instances are summed with random
    weights; a false instance survives with probability at most 1/|F|.
    """
    g = vk.group
    if len(weights) != len(items):
        raise KzgError("one batching weight per opening required")
    if len(vk.powers) < 2:
        return all(verify_opening(vk, c, o) for c, o in items)
    lhs_pts, lhs_k, rhs_pts, rhs_k = [], [], [], []
    for (comm, op), rho in zip(items, weights):
        r = rho.value
        lhs_pts += [comm.point, g.g1_gen, op.point]
        lhs_k += [r, (-op.v * r).value, (op.u * r).value]
        rhs_pts.append(op.point)
        rhs_k.append(r)
    H, sH = vk.powers[0], vk.powers[1]
    return g.gt_eq(g.pairing(g.msm(lhs_pts, lhs_k), H), g.pairing(g.msm(rhs_pts, rhs_k), sH))


# key files: magic | version | backend | field profile | field width | kind | u32 n+1 | points
def _key_header(group: PairingGroup, kind: bytes, count: int) -> bytes:
    return (KEY_MAGIC + bytes([FORMAT_VERSION, group.backend_id, group.scalar.profile_id,
                               group.scalar.byte_width]) + kind + struct.pack(">I", count))


def encode_pk(pk: ProverKey) -> bytes:
    g = pk.group
    return _key_header(g, b"P", len(pk.powers)) + b"".join(g.encode_g1(p) for p in pk.powers)


def encode_vk(vk: VerifierKey) -> bytes:
    g = vk.group
    return _key_header(g, b"V", len(vk.powers)) + b"".join(g.encode_g2(p) for p in vk.powers)


def read_header(data: bytes, magic: bytes) -> tuple[PairingGroup, int]:
    """Parse magic | version | backend | profile | width; returns (group, offset)."""
    n = len(magic)
    if data[:n] != magic:
        raise KzgError(f"bad magic, expected {magic!r}")
    if len(data) < n + 4:
        raise KzgError("truncated header")
    version, backend, prof, width = data[n:n + 4]
    if version != FORMAT_VERSION:
        raise KzgError(f"unsupported format version {version}")
    params = profile(prof)
    if params.byte_width != width:
        raise KzgError("field width does not match profile")
    return group_for(backend, params), n + 4


def _decode_key(data: bytes, kind: bytes):
    group, off = read_header(data, KEY_MAGIC)
    if data[off:off + 1] != kind:
        raise KzgError(f"expected key kind {kind!r}")
    (count,) = struct.unpack_from(">I", data, off + 1)
    off += 5
    size = group.g1_size if kind == b"P" else group.g2_size
    # the prover's own key comes from setup; skip per-point subgroup checks there
    dec = (lambda d: group.decode_g1(d, check=False)) if kind == b"P" else group.decode_g2
    if len(data) != off + size * count:
        raise KzgError("key file length mismatch")
    points = tuple(dec(data[off + i * size:off + (i + 1) * size]) for i in range(count))
    # verification only touches H and sH
    if kind == b"V" and not all(group.check_g2(p) for p in points[:2]):
        raise KzgError("verifier key point outside the prime-order subgroup")
    return group, points


def decode_pk(data: bytes) -> ProverKey:
    return ProverKey(*_decode_key(data, b"P"))


def decode_vk(data: bytes) -> VerifierKey:
    return VerifierKey(*_decode_key(data, b"V"))
