"""Scripted publish-and-verify flows for the three use cases.

case1  an operator proves an inference log entry (X, Y) against committed weights
case2  a contestant proves an output came from the claimed model on the stated dataset
case3  a trader proves actions came from a committed two-layer strategy

The flows share one pipeline (commit, publish, prove, publish, fetch, verify)
and differ in which records are published.
"""
from __future__ import annotations

import json
import random
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import scheme
from .ledger import Store
from .mle import FieldMatrix
from .quantizer import QuantScheme, decode_matrices, decode_matrix, encode_matrix, quantize_matrix

CASES = ("case1", "case2", "case3")


class StageError(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage


@dataclass
class ScenarioConfig:
    workdir: str | None = None
    seed: int = 0
    tamper: bool = False
    backend: str = "mock"
    lam: int = 128
    bits: int = 8
    dim: int = 4
    weights: list | None = None  # real-valued layers, overrides the random fixture
    inputs: list | None = None


@dataclass
class ScenarioReport:
    case: str
    verdict: str
    status: int
    stage: str = ""
    artifacts: dict = field(default_factory=dict)  # name -> sha256 hex on the ledger
    weights_leaked: bool = False
    detail: str = ""

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True)


def _fixture(case: str, cfg: ScenarioConfig):
    rng = random.Random(cfg.seed)
    if cfg.weights is not None:
        return [list(map(list, w)) for w in cfg.weights], [list(r) for r in cfg.inputs]
    n_layers = 2 if case == "case3" else 1
    d = cfg.dim

    def real(r, c):
        return [[rng.randint(-64, 64) / 16 for _ in range(c)] for _ in range(r)]

    return [real(d, d) for _ in range(n_layers)], real(d, d)


def _weights_in(blob: bytes, weights: scheme.ModelWeights) -> bool:
    return any(m.to_bytes() in blob for m in weights.layers)


def run_scenario(case: str, cfg: ScenarioConfig | None = None) -> ScenarioReport:
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}; expected one of {CASES}")
    cfg = cfg or ScenarioConfig()
    tmp = None
    if cfg.workdir is None:
        tmp = tempfile.TemporaryDirectory()
        root = Path(tmp.name)
    else:
        root = Path(cfg.workdir)
        root.mkdir(parents=True, exist_ok=True)
    try:
        return _run(case, cfg, root)
    except StageError as exc:
        return ScenarioReport(case, "error", 2, exc.stage, detail=str(exc))
    finally:
        if tmp is not None:
            tmp.cleanup()


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except Exception as exc:  # report which stage broke, not a traceback
        raise StageError(name, exc) from exc


def _run(case: str, cfg: ScenarioConfig, root: Path) -> ScenarioReport:
    store = Store(root / "ledger")
    real_w, real_x = _fixture(case, cfg)
    params = scheme.default_params(cfg.lam, cfg.backend)
    qs = QuantScheme(params, cfg.bits)

    # prover side
    weights = _stage("quantize", lambda: scheme.ModelWeights(
        tuple(quantize_matrix(w, qs) for w in real_w), name=case, bits=cfg.bits))
    x = _stage("quantize", quantize_matrix, real_x, qs)
    keys = _stage("keygen", scheme.keygen, cfg.lam, cfg.seed, weights.max_layer_params, cfg.backend, params)
    comms = _stage("commit", scheme.commit_model, keys.pk, weights)
    comm_bytes = scheme.encode_commitments(keys.pk.group, comms)
    published = {"comm": _stage("publish", store.publish, comm_bytes, "comm")}
    y, bundle = _stage("prove", scheme.prove, keys.pk, weights, x, comms)
    exponent = len(weights.layers) + 1
    if cfg.tamper:
        entries = list(y.entries)
        entries[0] = entries[0] + 1
        y = FieldMatrix(y.rows, y.cols, tuple(entries), y.params)
    published["proof"] = _stage("publish", store.publish, scheme.encode_bundle(bundle), "proof")
    if case == "case2":
        published["dataset"] = _stage("publish", store.publish, encode_matrix(x, cfg.bits, 1), "record")
        published["output"] = _stage("publish", store.publish, encode_matrix(y, cfg.bits, exponent), "record")
    elif case == "case3":
        # market data X is public already; only the actions go on the ledger
        published["actions"] = _stage("publish", store.publish, encode_matrix(y, cfg.bits, exponent), "record")
    else:
        record = encode_matrix(x, cfg.bits, 1) + encode_matrix(y, cfg.bits, exponent)
        published["log"] = _stage("publish", store.publish, record, "record")

    # verifier side: only the ledger and the public key
    if not _stage("audit", store.audit):
        raise StageError("audit", RuntimeError("ledger audit failed"))
    fetched = {k: _stage("fetch", store.fetch, e.index)[0] for k, e in published.items()}
    _, f_comms = _stage("fetch", scheme.decode_commitments, fetched["comm"])
    f_bundle = _stage("fetch", scheme.decode_bundle, fetched["proof"])
    if case == "case1":
        f_x, f_y = _stage("fetch", decode_matrices, fetched["log"])
    elif case == "case2":
        f_x, f_y = decode_matrix(fetched["dataset"])[0], decode_matrix(fetched["output"])[0]
    else:
        f_x, f_y = x, decode_matrix(fetched["actions"])[0]
    vk = scheme.kzg.decode_vk(scheme.kzg.encode_vk(keys.vk))
    verdict = scheme.verify(vk, f_comms, f_bundle, f_x, f_y)

    leaked = any(_weights_in(b, weights) for b in fetched.values())
    leaked |= any(_weights_in(p.read_bytes(), weights) for p in store.payloads.iterdir())
    return ScenarioReport(
        case, "Yes" if verdict else "No", 0 if verdict else 1, "verify",
        {k: e.payload_hash for k, e in published.items()}, leaked, verdict.reason,
    )
