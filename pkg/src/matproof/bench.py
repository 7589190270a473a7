"""Timing harness: commit/prove/verify cost against layer count and parameter count."""
from __future__ import annotations

import csv
import io
import random
import statistics
import time
from dataclasses import astuple, dataclass, fields
from typing import Callable, Sequence

from . import scheme
from .field import FieldParams
from .mle import FieldMatrix


@dataclass(frozen=True)
class BenchRecord:
    model: str
    layers: int
    params: int
    commit_s: float
    prove_s: float
    verify_s: float
    commitment_bytes: int
    proof_bytes: int


CSV_COLUMNS = tuple(f.name for f in fields(BenchRecord))


def _median_time(fn: Callable, reps: int):
    times, result = [], None
    for _ in range(reps):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def measure(weights: scheme.ModelWeights, x: FieldMatrix, keys, reps: int, label: str) -> BenchRecord:
    """Times each stage as a separate party would run it, artifacts crossing as bytes."""
    pk, vk = keys.pk, keys.vk
    group = pk.group

    def do_commit():
        return scheme.encode_commitments(group, scheme.commit_model(pk, weights))

    commit_s, comm_bytes = _median_time(do_commit, reps)
    comms = scheme.decode_commitments(comm_bytes)[1]

    def do_prove():
        y, bundle = scheme.prove(pk, weights, x, comms)
        return y, scheme.encode_bundle(bundle)

    prove_s, (y, bundle_bytes) = _median_time(do_prove, reps)

    def do_verify():
        return scheme.verify(vk, comms, scheme.decode_bundle(bundle_bytes), x, y)

    verify_s, verdict = _median_time(do_verify, reps)
    if not verdict:
        raise RuntimeError(f"benchmark proof for {label} did not verify: {verdict}")
    return BenchRecord(label, len(weights.layers), weights.num_params, commit_s, prove_s, verify_s,
                       len(comm_bytes), len(bundle_bytes))


def random_model(n_layers: int, dim: int, params: FieldParams, rng: random.Random, in_dim: int | None = None):
    in_dim = in_dim or dim
    layers = [FieldMatrix.random(dim, in_dim if i == 0 else dim, params, rng) for i in range(n_layers)]
    return scheme.ModelWeights(tuple(layers), name=f"rand-{n_layers}x{dim}")


def layer_sweep(layer_schedule: Sequence[int], dim: int, reps: int, backend: str = "mock",
                seed: int = 0, lam: int = 128) -> list[BenchRecord]:
    rng = random.Random(seed)
    keys = scheme.keygen(lam, seed, dim * dim, backend)
    params = keys.pk.group.scalar
    x = FieldMatrix.random(dim, dim, params, rng)
    out = []
    for n in layer_schedule:
        w = random_model(n, dim, params, rng)
        out.append(measure(w, x, keys, reps, f"layers-{n}"))
    return out


def param_sweep(dims: Sequence[int], reps: int, backend: str = "mock", seed: int = 0,
                lam: int = 128, cols: int = 1) -> list[BenchRecord]:
    """One square layer per point, M = d^2 weights."""
    rng = random.Random(seed)
    keys = scheme.keygen(lam, seed, max(dims) ** 2, backend)
    params = keys.pk.group.scalar
    out = []
    for d in dims:
        w = random_model(1, d, params, rng)
        x = FieldMatrix.random(d, cols, params, rng)
        out.append(measure(w, x, keys, reps, f"params-{d * d}"))
    return out


def bench(dims: Sequence[int], layer_schedule: Sequence[int], reps: int, backend: str = "mock",
          layer_dim: int = 8, seed: int = 0) -> list[BenchRecord]:
    if not dims or not layer_schedule:
        raise ValueError("schedules must be non-empty")
    return layer_sweep(layer_schedule, layer_dim, reps, backend, seed) + param_sweep(dims, reps, backend, seed)


def r_squared(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(set(ys)) == 1:
        return 1.0
    return statistics.correlation(xs, ys) ** 2


def to_csv(records: Sequence[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(astuple(r))
    return buf.getvalue()


def from_csv(text: str) -> list[BenchRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {rows[0]}")
    kinds = [f.type for f in fields(BenchRecord)]
    conv = {"str": str, "int": int, "float": float}
    return [BenchRecord(*(conv[k](v) for k, v in zip(kinds, row))) for row in rows[1:]]
