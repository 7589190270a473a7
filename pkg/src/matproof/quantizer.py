"""Fixed-point quantization of real matrices into field elements.

A real x becomes round(x * 2^b), rounding half away from zero, embedded with
the signed map. Scale exponents are tracked outside the field: a product of
two quantized operands carries exponent 2.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .field import FieldElement, FieldError, FieldParams, profile
from .mle import FieldMatrix

QUANT_MAGIC = b"ZKFGQ"
QUANT_VERSION = 1
DEFAULT_BITS = 16


class QuantizationError(FieldError):
    pass


@dataclass(frozen=True)
class QuantScheme:
    params: FieldParams
    bits: int = DEFAULT_BITS

    def __post_init__(self):
        if self.bits < 0:
            raise QuantizationError("fractional bits must be non-negative")

    @property
    def scale(self) -> int:
        return 1 << self.bits


def round_half_away(x: Fraction) -> int:
    n = math.floor(abs(x) + Fraction(1, 2))
    return n if x >= 0 else -n


def quantize(x: float, scheme: QuantScheme) -> FieldElement:
    if not math.isfinite(x):
        raise QuantizationError(f"cannot quantize {x}")
    n = round_half_away(Fraction(x) * scheme.scale)
    if 2 * abs(n) >= scheme.params.modulus:
        raise QuantizationError(f"{x} overflows the field at {scheme.bits} fractional bits")
    return scheme.params.from_signed(n)


def dequantize(f: FieldElement, scheme: QuantScheme, exponent: int = 1) -> float:
    return f.signed() / float(scheme.scale) ** exponent


def quantize_matrix(rows: Sequence[Sequence[float]], scheme: QuantScheme) -> FieldMatrix:
    rows = [list(r) for r in rows]
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise QuantizationError("expected a non-empty rectangular matrix")
    entries = tuple(quantize(float(v), scheme) for r in rows for v in r)
    return FieldMatrix(len(rows), len(rows[0]), entries, scheme.params)


def dequantize_matrix(m: FieldMatrix, scheme: QuantScheme, exponent: int = 1) -> list[list[float]]:
    return [[dequantize(e, scheme, exponent) for e in m.row(i)] for i in range(m.rows)]


# file: magic | version | profile | width | bits | exponent | u32 rows | u32 cols | entries
def encode_matrix(m: FieldMatrix, bits: int = 0, exponent: int = 1) -> bytes:
    header = QUANT_MAGIC + bytes([QUANT_VERSION, m.params.profile_id, m.params.byte_width, bits, exponent])
    return header + struct.pack(">II", m.rows, m.cols) + m.to_bytes()


def decode_matrix(data: bytes) -> tuple[FieldMatrix, int, int]:
    """Returns (matrix, fractional bits, scale exponent)."""
    m, bits, exponent, end = _decode_at(data, 0)
    if end != len(data):
        raise QuantizationError("trailing bytes after matrix")
    return m, bits, exponent


def decode_matrices(data: bytes) -> list[FieldMatrix]:
    """Split a concatenation of matrix files."""
    out, off = [], 0
    while off < len(data):
        m, _, _, off = _decode_at(data, off)
        out.append(m)
    return out


def _decode_at(data: bytes, off: int):
    n = len(QUANT_MAGIC)
    data = memoryview(data)[off:].tobytes()
    if data[:n] != QUANT_MAGIC or len(data) < n + 13:
        raise QuantizationError("not a matrix file")
    version, prof, width, bits, exponent = data[n:n + 5]
    if version != QUANT_VERSION:
        raise QuantizationError(f"unsupported matrix file version {version}")
    params = profile(prof)
    if width != params.byte_width:
        raise QuantizationError("field width does not match profile")
    rows, cols = struct.unpack_from(">II", data, n + 5)
    end = n + 13 + rows * cols * width
    if end > len(data):
        raise QuantizationError("truncated matrix file")
    return FieldMatrix.from_bytes(rows, cols, data[n + 13:end], params), bits, exponent, off + end
