"""Prime field arithmetic.

Elements are always kept in canonical form ``0 <= value < p``. Nothing here is
constant time, so none of it should be used where side channels matter.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field


class FieldError(ValueError):
    pass


class FieldMismatchError(FieldError):
    pass


class NoInverseError(FieldError, ZeroDivisionError):
    pass


def is_probable_prime(n: int, rounds: int = 40) -> bool:
    """Miller-Rabin with fixed small-prime bases plus random witnesses."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    rng = random.Random(n)
    witnesses = list(small) + [rng.randrange(2, n - 1) for _ in range(rounds)]
    for a in witnesses:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldParams:
    modulus: int
    lam: int = 128
    insecure: bool = False
    name: str = "custom"
    profile_id: int = 0
    byte_width: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = self.modulus
        if not is_probable_prime(p):
            raise FieldError(f"modulus {p} is not prime")
        if p.bit_length() < self.lam and not self.insecure:
            raise FieldError(
                f"modulus has {p.bit_length()} bits, below security parameter {self.lam}; "
                "pass insecure=True for test profiles"
            )
        object.__setattr__(self, "byte_width", (p.bit_length() + 7) // 8)

    @property
    def bits(self) -> int:
        return self.modulus.bit_length()

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(value, self)

    def zero(self) -> FieldElement:
        return FieldElement(0, self)

    def one(self) -> FieldElement:
        return FieldElement(1, self)

    def from_signed(self, n: int) -> FieldElement:
        """Embed a signed integer; negatives land in the upper half of the field."""
        if 2 * abs(n) >= self.modulus:
            raise FieldError(f"|{n}| does not fit below p/2")
        return FieldElement(n % self.modulus, self)

    def random(self, rng: random.Random | None = None) -> FieldElement:
        rng = rng or random
        return FieldElement(rng.randrange(self.modulus), self)

    def decode(self, data: bytes) -> FieldElement:
        if len(data) != self.byte_width:
            raise FieldError(f"expected {self.byte_width} bytes, got {len(data)}")
        v = int.from_bytes(data, "little")
        if v >= self.modulus:
            raise FieldError("encoding is not canonical")
        return FieldElement(v, self)

    def decode_many(self, data: bytes, count: int) -> list[FieldElement]:
        w = self.byte_width
        if len(data) != w * count:
            raise FieldError(f"expected {w * count} bytes, got {len(data)}")
        return [self.decode(data[i * w:(i + 1) * w]) for i in range(count)]


# 2^64 - 59
TEST64 = FieldParams(0xFFFFFFFFFFFFFFC5, lam=64, insecure=True, name="test64", profile_id=1)
# scalar field of BLS12-381
BLS12_381_R = FieldParams(
    0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001,
    lam=128, name="bls12-381-r", profile_id=2,
)
# toy field for hand-checkable examples
TOY97 = FieldParams(97, lam=7, insecure=True, name="toy97", profile_id=3)

PROFILES = {p.profile_id: p for p in (TEST64, BLS12_381_R, TOY97)}
PROFILE_NAMES = {p.name: p for p in PROFILES.values()}


def profile(key: int | str) -> FieldParams:
    table = PROFILES if isinstance(key, int) else PROFILE_NAMES
    try:
        return table[key]
    except KeyError:
        raise FieldError(f"unknown field profile {key!r}") from None


class FieldElement:
    __slots__ = ("value", "params")

    def __init__(self, value: int, params: FieldParams):
        self.value = value % params.modulus
        self.params = params

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.params is not self.params and other.params != self.params:
                raise FieldMismatchError(
                    f"cannot mix elements of {self.params.name} and {other.params.name}"
                )
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def _new(self, v: int) -> FieldElement:
        return FieldElement(v, self.params)

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(o - self.value)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value * o)

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.value)

    def inv(self) -> FieldElement:
        if self.value == 0:
            raise NoInverseError("zero has no inverse")
        return self._new(pow(self.value, -1, self.params.modulus))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * self._new(o).inv()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self.inv() * o

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        return self._new(pow(self.value, e, self.params.modulus))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.value == other.value and self.params.modulus == other.params.modulus
        if isinstance(other, int):
            return self.value == other % self.params.modulus
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.params.modulus))

    def __int__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"F{self.params.name}({self.value})"

    def signed(self) -> int:
        """Lift back to (-p/2, p/2)."""
        p = self.params.modulus
        return self.value - p if 2 * self.value > p else self.value

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(self.params.byte_width, "little")


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def sub(a: FieldElement, b: FieldElement) -> FieldElement:
    return a - b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def neg(a: FieldElement) -> FieldElement:
    return -a


def inv(a: FieldElement) -> FieldElement:
    return a.inv()


def from_signed(n: int, params: FieldParams) -> FieldElement:
    return params.from_signed(n)


def encode_many(elems) -> bytes:
    return b"".join(e.to_bytes() for e in elems)
