"""Multilinear extensions of matrices over the boolean hypercube.

Tables are stored as evaluations, first variable = most significant bit of the
index. For a matrix the row bits come first, then the column bits.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .field import FieldElement, FieldParams


def log2_ceil(n: int) -> int:
    if n < 1:
        raise ValueError("dimension must be positive")
    return (n - 1).bit_length()


@dataclass(frozen=True)
class FieldMatrix:
    rows: int
    cols: int
    entries: tuple  # row-major FieldElements
    params: FieldParams

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("matrix dimensions must be positive")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(f"expected {self.rows * self.cols} entries, got {len(self.entries)}")

    @classmethod
    def from_ints(cls, rows: Sequence[Sequence[int]], params: FieldParams) -> FieldMatrix:
        rows = [list(r) for r in rows]
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged matrix")
        entries = tuple(params.from_signed(v) if v < 0 else params(v) for r in rows for v in r)
        return cls(len(rows), ncols, entries, params)

    @classmethod
    def random(cls, rows: int, cols: int, params: FieldParams, rng) -> FieldMatrix:
        return cls(rows, cols, tuple(params.random(rng) for _ in range(rows * cols)), params)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij: tuple[int, int]) -> FieldElement:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_ints(self) -> list[list[int]]:
        return [[e.value for e in self.row(i)] for i in range(self.rows)]

    def to_signed(self) -> list[list[int]]:
        return [[e.signed() for e in self.row(i)] for i in range(self.rows)]

    def __matmul__(self, other: FieldMatrix) -> FieldMatrix:
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        p = self.params.modulus
        a = [[e.value for e in self.row(i)] for i in range(self.rows)]
        b = [[other[k, j].value for k in range(other.rows)] for j in range(other.cols)]
        out = []
        for i in range(self.rows):
            ai = a[i]
            for j in range(other.cols):
                out.append(self.params(sum(x * y for x, y in zip(ai, b[j])) % p))
        return FieldMatrix(self.rows, other.cols, tuple(out), self.params)

    def to_bytes(self) -> bytes:
        return b"".join(e.to_bytes() for e in self.entries)

    @classmethod
    def from_bytes(cls, rows: int, cols: int, data: bytes, params: FieldParams) -> FieldMatrix:
        return cls(rows, cols, tuple(params.decode_many(data, rows * cols)), params)


@dataclass(frozen=True)
class MlePoly:
    num_vars: int
    evals: tuple
    params: FieldParams

    def __post_init__(self):
        if len(self.evals) != 1 << self.num_vars:
            raise ValueError(f"need 2^{self.num_vars} evaluations, got {len(self.evals)}")

    def __call__(self, point: Sequence[FieldElement]) -> FieldElement:
        return evaluate(self, point)


def from_matrix(m: FieldMatrix) -> MlePoly:
    rb, cb = log2_ceil(m.rows), log2_ceil(m.cols)
    width = 1 << cb
    zero = m.params.zero()
    evals = [zero] * ((1 << rb) * width)
    for i in range(m.rows):
        base = i * width
        for j in range(m.cols):
            evals[base + j] = m.entries[i * m.cols + j]
    return MlePoly(rb + cb, tuple(evals), m.params)


def from_evals(values: Sequence, params: FieldParams) -> MlePoly:
    values = [v if isinstance(v, FieldElement) else params(v) for v in values]
    n = len(values)
    m = log2_ceil(n)
    values += [params.zero()] * ((1 << m) - n)
    return MlePoly(m, tuple(values), params)


def fix_first_var(poly: MlePoly, r: FieldElement) -> MlePoly:
    if poly.num_vars == 0:
        raise ValueError("no variable left to fix")
    half = len(poly.evals) // 2
    lo, hi = poly.evals[:half], poly.evals[half:]
    return MlePoly(poly.num_vars - 1, tuple(a + r * (b - a) for a, b in zip(lo, hi)), poly.params)


def evaluate(poly: MlePoly, point: Sequence[FieldElement]) -> FieldElement:
    if len(point) != poly.num_vars:
        raise ValueError(f"point has {len(point)} coordinates, polynomial has {poly.num_vars} variables")
    p = poly.params.modulus
    table = [e.value for e in poly.evals]
    for r in point:
        rv = r.value if isinstance(r, FieldElement) else r % p
        half = len(table) // 2
        table = [(a + rv * (b - a)) % p for a, b in zip(table[:half], table[half:])]
    return poly.params(table[0])


def sum_over_hypercube(poly: MlePoly) -> FieldElement:
    return poly.params(sum(e.value for e in poly.evals))


def eq_table(point: Sequence[FieldElement], params: FieldParams) -> list[FieldElement]:
    """eq(point, b) for every b in {0,1}^len(point), same bit order as MlePoly."""
    table = [params.one()]
    for r in point:
        table = [t * x for t in table for x in (1 - r, r)]
    return table


def fix_row_vars(m: FieldMatrix, point: Sequence[FieldElement]) -> MlePoly:
    """Restrict the row variables of the matrix MLE to ``point``; result is over column bits."""
    mle = from_matrix(m)
    for r in point:
        mle = fix_first_var(mle, r)
    return mle


def fix_col_vars(m: FieldMatrix, point: Sequence[FieldElement]) -> MlePoly:
    """Restrict the column variables of the matrix MLE to ``point``; result is over row bits."""
    p = m.params.modulus
    cb = log2_ceil(m.cols)
    if len(point) != cb:
        raise ValueError("column point has wrong length")
    eq = [e.value for e in eq_table(point, m.params)]
    rows = [m.params(sum(eq[j] * m.entries[i * m.cols + j].value for j in range(m.cols)) % p)
            for i in range(m.rows)]
    return from_evals(rows, m.params)
