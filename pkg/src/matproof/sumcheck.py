"""Sumcheck for the matrix product statement Y = W X.

Two statement modes:

``SOUND_RANDOM_POINT`` (default)
    The verifier draws a row point ri and column point rj, sets the claim
    C = Y~(ri, rj), and the rounds run over the inner index k of
    sum_k W~(ri, k) X~(k, rj). Round polynomials have degree 2.

``EXAMPLE_TOTAL_SUM``
    Sums g(i, k, j) = Y~(i, j) / 2^|k| - W~(i, k) X~(k, j) over every variable,
    ordered (i, k, j), with g multilinearized (k^2 -> k on the cube) so rounds
    are linear. The claim is C = 0. A zero total does not pin every entry of
    Y, so this mode only reproduces the hand-worked transcript; it is not a
    sound check of the product.
"""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .field import FieldElement, FieldParams
from .mle import FieldMatrix, MlePoly, eq_table, evaluate, fix_col_vars, fix_row_vars, from_matrix, log2_ceil
from .transcript import Transcript


class Mode(enum.Enum):
    EXAMPLE_TOTAL_SUM = 0
    SOUND_RANDOM_POINT = 1

    @property
    def degree_bound(self) -> int:
        return 1 if self is Mode.EXAMPLE_TOTAL_SUM else 2


class SumcheckError(ValueError):
    pass


@dataclass(frozen=True)
class RoundPolynomial:
    coeffs: tuple  # ascending degree

    def __post_init__(self):
        if not 1 <= len(self.coeffs) <= 3:
            raise SumcheckError("round polynomial must have 1 to 3 coefficients")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x) -> FieldElement:
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def to_bytes(self) -> bytes:
        return bytes([self.degree]) + b"".join(c.to_bytes() for c in self.coeffs)

    @classmethod
    def from_evals_012(cls, e0: FieldElement, e1: FieldElement, e2: FieldElement) -> RoundPolynomial:
        half = e0.params(2).inv()
        c2 = (e2 - e1 - e1 + e0) * half
        return cls((e0, e1 - e0 - c2, c2))


@dataclass(frozen=True)
class SumcheckProof:
    claimed_sum: FieldElement | None
    rounds: tuple
    final_eval: FieldElement

    def to_bytes(self) -> bytes:
        out = struct.pack(">I", len(self.rounds))
        out += b"".join(r.to_bytes() for r in self.rounds)
        return out + self.final_eval.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes, params: FieldParams, offset: int = 0) -> tuple[SumcheckProof, int]:
        """Decode at ``offset``; returns the proof and the offset just past it.

        The claimed sum is not on the wire; verifiers recompute it.
        """
        w = params.byte_width
        try:
            (n,) = struct.unpack_from(">I", data, offset)
            offset += 4
            if n > 64:
                raise SumcheckError(f"implausible round count {n}")
            rounds = []
            for _ in range(n):
                deg = data[offset]
                offset += 1
                if deg > 2:
                    raise SumcheckError(f"round degree {deg} exceeds 2")
                coeffs = params.decode_many(data[offset:offset + w * (deg + 1)], deg + 1)
                offset += w * (deg + 1)
                rounds.append(RoundPolynomial(tuple(coeffs)))
            final = params.decode(data[offset:offset + w])
        except (struct.error, IndexError) as exc:
            raise SumcheckError("truncated sumcheck proof") from exc
        return cls(None, tuple(rounds), final), offset + w


@dataclass(frozen=True)
class MatmulStatement:
    """Y = W X with W: d1 x d2, X: d2 x d3. ``w`` is absent on the verifier side."""

    mode: Mode
    x: FieldMatrix
    y: FieldMatrix
    w: FieldMatrix | None = None
    row_point: tuple | None = None
    col_point: tuple | None = None

    def __post_init__(self):
        d1, d3 = self.y.shape
        if self.x.cols != d3:
            raise SumcheckError(f"X has {self.x.cols} columns, Y has {d3}")
        if self.w is not None and (self.w.rows != d1 or self.w.cols != self.x.rows):
            raise SumcheckError(f"W shape {self.w.shape} does not fit X {self.x.shape} / Y {self.y.shape}")

    @property
    def params(self) -> FieldParams:
        return self.x.params

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.y.rows, self.x.rows, self.y.cols

    @property
    def bits(self) -> tuple[int, int, int]:
        return tuple(log2_ceil(d) for d in self.dims)

    @property
    def num_vars(self) -> int:
        a, b, c = self.bits
        return a + b + c if self.mode is Mode.EXAMPLE_TOTAL_SUM else b

    @property
    def w_mle(self) -> MlePoly:
        return from_matrix(self.w)

    @property
    def x_mle(self) -> MlePoly:
        return from_matrix(self.x)

    @property
    def y_mle(self) -> MlePoly:
        return from_matrix(self.y)

    def public(self) -> MatmulStatement:
        return replace(self, w=None)

    def at(self, row_point: Sequence[FieldElement], col_point: Sequence[FieldElement]) -> MatmulStatement:
        a, _, c = self.bits
        if len(row_point) != a or len(col_point) != c:
            raise SumcheckError("evaluation point has wrong length")
        return replace(self, row_point=tuple(row_point), col_point=tuple(col_point))

    def claim(self) -> FieldElement:
        """The value the sum must equal."""
        if self.mode is Mode.EXAMPLE_TOTAL_SUM:
            return self.params.zero()
        return evaluate(self.y_mle, self.row_point + self.col_point)


@dataclass
class ProverState:
    statement: MatmulStatement
    tables: list  # lists of ints; one table (example mode) or two (W row, X column)
    challenges: list = field(default_factory=list)

    @classmethod
    def start(cls, statement: MatmulStatement) -> ProverState:
        if statement.w is None:
            raise SumcheckError("prover needs the weights")
        p = statement.params.modulus
        if statement.mode is Mode.EXAMPLE_TOTAL_SUM:
            return cls(statement, [_total_sum_table(statement)])
        if statement.row_point is None:
            raise SumcheckError("statement not bound to an evaluation point")
        a = fix_row_vars(statement.w, statement.row_point)
        b = fix_col_vars(statement.x, statement.col_point)
        return cls(statement, [[e.value % p for e in a.evals], [e.value % p for e in b.evals]])

    def current_sum(self) -> FieldElement:
        p = self.statement.params.modulus
        if len(self.tables) == 1:
            return self.statement.params(sum(self.tables[0]))
        return self.statement.params(sum(x * y for x, y in zip(*self.tables)) % p)

    def final_values(self) -> list[FieldElement]:
        if any(len(t) != 1 for t in self.tables):
            raise SumcheckError("rounds not finished")
        return [self.statement.params(t[0]) for t in self.tables]

    def bind(self, r: FieldElement):
        p = self.statement.params.modulus
        rv = r.value
        new = []
        for t in self.tables:
            half = len(t) // 2
            new.append([(lo + rv * (hi - lo)) % p for lo, hi in zip(t[:half], t[half:])])
        self.tables = new
        self.challenges.append(r)


def _total_sum_table(st: MatmulStatement) -> list[int]:
    """g on the cube, index bits ordered (i, k, j)."""
    params = st.params
    p = params.modulus
    a, b, c = st.bits
    scale = params(1 << b).inv().value
    d1, d2, d3 = st.dims
    table = [0] * (1 << (a + b + c))
    for i in range(1 << a):
        for k in range(1 << b):
            for j in range(1 << c):
                y = st.y[i, j].value if i < d1 and j < d3 else 0
                wx = st.w[i, k].value * st.x[k, j].value if i < d1 and k < d2 and j < d3 else 0
                table[(((i << b) | k) << c) | j] = (scale * y - wx) % p
    return table


def prover_round(state: ProverState, round_index: int) -> RoundPolynomial:
    if round_index != len(state.challenges):
        raise SumcheckError(f"round {round_index} requested, prover is at round {len(state.challenges)}")
    if round_index >= state.statement.num_vars:
        raise SumcheckError("no rounds left")
    params = state.statement.params
    p = params.modulus
    if len(state.tables) == 1:
        t = state.tables[0]
        half = len(t) // 2
        e0, e1 = sum(t[:half]) % p, sum(t[half:]) % p
        return RoundPolynomial((params(e0), params(e1 - e0)))
    fa, fb = state.tables
    half = len(fa) // 2
    e0 = e1 = e2 = 0
    for a0, a1, b0, b1 in zip(fa[:half], fa[half:], fb[:half], fb[half:]):
        e0 += a0 * b0
        e1 += a1 * b1
        e2 += (2 * a1 - a0) * (2 * b1 - b0)
    return RoundPolynomial.from_evals_012(params(e0), params(e1), params(e2))


def verifier_round(prev_value: FieldElement, poly: RoundPolynomial,
                   degree_bound: int) -> tuple[bool, Callable]:
    ok = poly.degree <= degree_bound and poly(0) + poly(1) == prev_value
    return ok, poly


def statement_value(st: MatmulStatement, challenges: Sequence[FieldElement],
                    weight_eval: FieldElement | None = None) -> FieldElement:
    """The statement polynomial at the challenge point, via the MLEs."""
    params = st.params
    a, b, c = st.bits
    if st.mode is Mode.EXAMPLE_TOTAL_SUM:
        ri, rk, rj = challenges[:a], challenges[a:a + b], challenges[a + b:]
        scale = params(1 << b).inv()
        w_rows = fix_row_vars(st.w, ri)
        x_cols = fix_col_vars(st.x, rj)
        prod = params(sum((e * wv * xv).value for e, wv, xv in
                          zip(eq_table(rk, params), w_rows.evals, x_cols.evals)))
        return scale * evaluate(st.y_mle, list(ri) + list(rj)) - prod
    if weight_eval is None:
        if st.w is None:
            raise SumcheckError("need the weights or a claimed weight evaluation")
        weight_eval = evaluate(st.w_mle, st.row_point + tuple(challenges))
    x_val = evaluate(st.x_mle, tuple(challenges) + st.col_point)
    return weight_eval * x_val


def final_check(st: MatmulStatement, challenges: Sequence[FieldElement],
                last_poly: RoundPolynomial | None, claim: FieldElement | None = None,
                weight_eval: FieldElement | None = None) -> bool:
    """last_poly(r_m) == g(r_1..r_m); with zero rounds the claim is compared directly."""
    if len(challenges) != st.num_vars:
        return False
    target = last_poly(challenges[-1]) if last_poly is not None else claim
    if target is None:
        raise SumcheckError("zero-round statement needs the claim")
    return target == statement_value(st, challenges, weight_eval)


@dataclass(frozen=True)
class SumcheckRun:
    """Side data from a prover or verifier run, not part of the wire proof."""

    statement: MatmulStatement
    challenges: tuple
    weight_eval: FieldElement | None = None


def _bind_point(st: MatmulStatement, transcript: Transcript, point) -> MatmulStatement:
    if st.mode is Mode.EXAMPLE_TOTAL_SUM:
        return st
    if point is not None:
        return st.at(*point)
    a, _, c = st.bits
    rij = transcript.challenge_vector("rij", st.params, a + c)
    return st.at(rij[:a], rij[a:])


def _next_challenge(transcript: Transcript, params: FieldParams, forced, idx: int) -> FieldElement:
    r = transcript.challenge_field("round-poly", params)
    if forced is not None:
        f = forced[idx]
        r = f if isinstance(f, FieldElement) else params(f)
    return r


def run_prover(statement: MatmulStatement, transcript: Transcript, challenges=None,
               point=None) -> tuple[SumcheckProof, SumcheckRun]:
    st = _bind_point(statement, transcript, point)
    state = ProverState.start(st)
    if challenges is not None and len(challenges) != st.num_vars:
        raise SumcheckError("forced challenge count does not match the variable count")
    claimed = state.current_sum()
    transcript.absorb_field("round-poly", claimed)
    rounds = []
    for i in range(st.num_vars):
        poly = prover_round(state, i)
        rounds.append(poly)
        transcript.absorb("round-poly", poly.to_bytes())
        state.bind(_next_challenge(transcript, st.params, challenges, i))
    finals = state.final_values()
    if len(finals) == 1:
        final, weight_eval = finals[0], None
    else:
        final, weight_eval = finals[0] * finals[1], finals[0]
    proof = SumcheckProof(claimed, tuple(rounds), final)
    return proof, SumcheckRun(st, tuple(state.challenges), weight_eval)


def prove(statement: MatmulStatement, transcript: Transcript, challenges=None, point=None) -> SumcheckProof:
    return run_prover(statement, transcript, challenges, point)[0]


def run_verifier(statement: MatmulStatement, proof: SumcheckProof, transcript: Transcript,
                 challenges=None, point=None,
                 weight_eval: FieldElement | None = None) -> tuple[bool, SumcheckRun]:
    st = _bind_point(statement, transcript, point)
    claim = st.claim()
    bad = SumcheckRun(st, ())
    if proof.claimed_sum is not None and proof.claimed_sum != claim:
        return False, bad
    if len(proof.rounds) != st.num_vars:
        return False, bad
    if challenges is not None and len(challenges) != st.num_vars:
        return False, bad
    transcript.absorb_field("round-poly", claim)
    value = claim
    rs = []
    for i, poly in enumerate(proof.rounds):
        ok, poly_fn = verifier_round(value, poly, st.mode.degree_bound)
        if not ok:
            return False, SumcheckRun(st, tuple(rs))
        transcript.absorb("round-poly", poly.to_bytes())
        r = _next_challenge(transcript, st.params, challenges, i)
        rs.append(r)
        value = poly_fn(r)
    run = SumcheckRun(st, tuple(rs), weight_eval)
    if value != proof.final_eval:
        return False, run
    if st.mode is Mode.SOUND_RANDOM_POINT and st.w is not None:
        honest = evaluate(st.w_mle, st.row_point + tuple(rs))
        if weight_eval is not None and weight_eval != honest:
            return False, run
        weight_eval = honest
    if st.mode is Mode.SOUND_RANDOM_POINT and weight_eval is None:
        return False, run
    last = proof.rounds[-1] if proof.rounds else None
    ok = final_check(st, rs, last, claim=claim, weight_eval=weight_eval)
    return ok, run


def verify(statement: MatmulStatement, proof: SumcheckProof, transcript: Transcript,
           challenges=None, point=None, weight_eval: FieldElement | None = None) -> bool:
    return run_verifier(statement, proof, transcript, challenges, point, weight_eval)[0]
