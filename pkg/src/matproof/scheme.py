"""Commit, prove and verify Y = W_L ... W_1 X for private weights.

The prover commits each layer's weights with KZG (row-major flattening as
coefficients), then proves every layer's product with sumcheck at a
transcript-derived point. One transcript runs through all layers, so each
layer's challenges depend on every earlier output digest.

Inner activations are public: they travel with the bundle as auxiliary data
and are bound to the records through their digests.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from typing import Sequence

from . import kzg
from .field import BLS12_381_R, TEST64, FieldElement, FieldParams, profile
from .kzg import Commitment, KzgKeys, Opening, PairingGroup, ProverKey, VerifierKey
from .mle import FieldMatrix
from .sumcheck import MatmulStatement, Mode, SumcheckError, SumcheckProof, run_prover, run_verifier
from .transcript import HASH_ID_SHA256, LABEL_SCHEDULE_ID, Transcript

BUNDLE_MAGIC = b"ZKFGPI"
COMM_MAGIC = b"ZKFGC"
VERSION = 1
DOMAIN = "matproof-v1"


class SchemeError(ValueError):
    pass


@dataclass(frozen=True)
class ModelWeights:
    layers: tuple
    name: str = "model"
    bits: int = 0

    def __post_init__(self):
        if not self.layers:
            raise SchemeError("model has no layers")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if nxt.cols != prev.rows:
                raise SchemeError(f"layer shapes {prev.shape} -> {nxt.shape} do not compose")
        mods = {m.params.modulus for m in self.layers}
        if len(mods) != 1:
            raise SchemeError("layers use different fields")

    @property
    def params(self) -> FieldParams:
        return self.layers[0].params

    @property
    def num_params(self) -> int:
        return sum(m.rows * m.cols for m in self.layers)

    @property
    def max_layer_params(self) -> int:
        return max(m.rows * m.cols for m in self.layers)


@dataclass(frozen=True)
class LayerRecord:
    index: int
    dims: tuple  # (d1, d2, d3)
    output_digest: bytes
    sumcheck: SumcheckProof
    weight_eval: FieldElement
    opening: Opening


@dataclass(frozen=True)
class ProofBundle:
    backend_id: int
    profile_id: int
    commitments_digest: bytes
    layers: tuple
    aux: tuple = ()  # inner layer outputs, len(layers) - 1 of them
    version: int = VERSION


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""
    challenges: tuple = field(default=(), compare=False)

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "Yes" if self.ok else f"No ({self.reason})"


def matrix_digest(m: FieldMatrix) -> bytes:
    return hashlib.sha256(struct.pack(">II", m.rows, m.cols) + m.to_bytes()).digest()


def default_params(lam: int, backend: str) -> FieldParams:
    if backend == "bls12-381" or lam > 64:
        return BLS12_381_R
    return TEST64


def keygen(lam: int, seed, max_params: int, backend: str = "mock", params: FieldParams | None = None,
           retain_secret: bool = False, secret: int | None = None) -> KzgKeys:
    """Setup sized so the largest flattened layer (max_params weights) fits."""
    if max_params < 1:
        raise SchemeError("max_params must be positive")
    params = params or default_params(lam, backend)
    if params.bits < lam and not params.insecure:
        raise SchemeError(f"field too small for lambda={lam}")
    group = kzg.group_for(backend, params)
    return kzg.key_gen(group, max_params - 1, seed, secret=secret, retain_secret=retain_secret)


def flatten(m: FieldMatrix) -> list[FieldElement]:
    return list(m.entries)


def commit_model(pk: ProverKey, weights: ModelWeights) -> list[Commitment]:
    if weights.params.modulus != pk.group.scalar.modulus:
        raise SchemeError("weights and key use different fields")
    return [kzg.commit(pk, flatten(m)) for m in weights.layers]


def encode_commitments(group: PairingGroup, comms: Sequence[Commitment]) -> bytes:
    s = group.scalar
    head = COMM_MAGIC + bytes([VERSION, group.backend_id, s.profile_id, s.byte_width])
    return head + struct.pack(">I", len(comms)) + b"".join(group.encode_g1(c.point) for c in comms)


def decode_commitments(data: bytes) -> tuple[PairingGroup, list[Commitment]]:
    group, off = kzg.read_header(data, COMM_MAGIC)
    (n,) = struct.unpack_from(">I", data, off)
    off += 4
    size = group.g1_size
    if len(data) != off + n * size:
        raise SchemeError("commitment file length mismatch")
    return group, [Commitment(group.decode_g1(data[off + i * size:off + (i + 1) * size])) for i in range(n)]


def _seed_transcript(t: Transcript, group: PairingGroup, comms, x: FieldMatrix, dims: Sequence):
    s = group.scalar
    header = bytes([VERSION, group.backend_id, s.profile_id, HASH_ID_SHA256, LABEL_SCHEDULE_ID])
    header += struct.pack(">I", len(dims)) + b"".join(struct.pack(">III", *d) for d in dims)
    t.absorb("header", header)
    for c in comms:
        t.absorb("comm", group.encode_g1(c.point))
    t.absorb("input", struct.pack(">II", x.rows, x.cols) + x.to_bytes())


def _absorb_opening(t: Transcript, group: PairingGroup, op: Opening):
    t.absorb("kzg-open", op.v.to_bytes() + group.encode_g1(op.point))


def prove(pk: ProverKey, weights: ModelWeights, x: FieldMatrix, comms: Sequence[Commitment] | None = None,
          transcript: Transcript | None = None) -> tuple[FieldMatrix, ProofBundle]:
    group = pk.group
    if x.params.modulus != group.scalar.modulus or weights.params.modulus != group.scalar.modulus:
        raise SchemeError("input, weights and key must share the scalar field")
    if weights.layers[0].cols != x.rows:
        raise SchemeError(f"input shape {x.shape} does not fit first layer {weights.layers[0].shape}")
    if weights.max_layer_params > len(pk.powers):
        raise SchemeError(f"layer with {weights.max_layer_params} weights exceeds key size {len(pk.powers)}")
    if comms is None:
        comms = commit_model(pk, weights)
    t = transcript or Transcript(DOMAIN)
    dims = [(m.rows, m.cols, x.cols) for m in weights.layers]
    _seed_transcript(t, group, comms, x, dims)

    records, outputs = [], []
    cur = x
    for idx, w in enumerate(weights.layers):
        y = w @ cur
        digest = matrix_digest(y)
        t.absorb("layer-output", digest)
        st = MatmulStatement(Mode.SOUND_RANDOM_POINT, cur, y, w)
        proof, run = run_prover(st, t)
        t.absorb_field("w-eval", run.weight_eval)
        u = t.challenge_field("kzg-u", group.scalar)
        opening = kzg.open(pk, flatten(w), u)
        _absorb_opening(t, group, opening)
        records.append(LayerRecord(idx, (w.rows, w.cols, cur.cols), digest,
                                   SumcheckProof(None, proof.rounds, proof.final_eval),
                                   run.weight_eval, opening))
        outputs.append(y)
        cur = y
    comm_digest = hashlib.sha256(encode_commitments(group, comms)).digest()
    bundle = ProofBundle(group.backend_id, group.scalar.profile_id, comm_digest, tuple(records),
                         tuple(outputs[:-1]))
    return cur, bundle


def verify(vk: VerifierKey, comms: Sequence[Commitment], bundle: ProofBundle, x: FieldMatrix,
           y: FieldMatrix, transcript: Transcript | None = None) -> Verdict:
    """Replays the transcript from public data only; never sees the weights."""
    group = vk.group
    t = transcript or Transcript(DOMAIN)
    try:
        return _verify(group, vk, comms, bundle, x, y, t)
    except (SchemeError, SumcheckError, kzg.KzgError, ValueError) as exc:
        return Verdict(False, f"malformed: {exc}", tuple(t.log))


def _verify(group, vk, comms, bundle, x, y, t) -> Verdict:
    def no(reason):
        return Verdict(False, reason, tuple(t.log))

    if bundle.version != VERSION:
        return no(f"unsupported bundle version {bundle.version}")
    if bundle.backend_id != group.backend_id or bundle.profile_id != group.scalar.profile_id:
        return no("bundle backend/field does not match the verifier key")
    if x.params.modulus != group.scalar.modulus or y.params.modulus != group.scalar.modulus:
        return no("input/output field does not match the verifier key")
    n = len(bundle.layers)
    if n == 0 or len(comms) != n:
        return no(f"{len(comms)} commitments for {n} layer records")
    if len(bundle.aux) != n - 1:
        return no("wrong number of inner activations")
    if hashlib.sha256(encode_commitments(group, comms)).digest() != bundle.commitments_digest:
        return no("bundle was made for different commitments")

    outputs = list(bundle.aux) + [y]
    dims = []
    cur = x
    for i, (rec, out) in enumerate(zip(bundle.layers, outputs)):
        d1, d2, d3 = rec.dims
        if rec.index != i or (d2, d3) != cur.shape or (d1, d3) != out.shape:
            return no(f"layer {i}: dimensions do not chain")
        if d1 * d2 > len(vk.powers):
            return no(f"layer {i}: exceeds key degree bound")
        dims.append(rec.dims)
        cur = out
    _seed_transcript(t, group, comms, x, dims)

    cur = x
    for rec, out, comm in zip(bundle.layers, outputs, comms):
        i = rec.index
        if matrix_digest(out) != rec.output_digest:
            return no(f"layer {i}: output digest mismatch")
        t.absorb("layer-output", rec.output_digest)
        st = MatmulStatement(Mode.SOUND_RANDOM_POINT, cur, out)
        ok, _ = run_verifier(st, rec.sumcheck, t, weight_eval=rec.weight_eval)
        if not ok:
            return no(f"layer {i}: sumcheck rejected")
        t.absorb_field("w-eval", rec.weight_eval)
        u = t.challenge_field("kzg-u", group.scalar)
        if rec.opening.u != u:
            return no(f"layer {i}: opening point was not transcript-derived")
        _absorb_opening(t, group, rec.opening)
        cur = out
    items = [(comm, rec.opening) for rec, comm in zip(bundle.layers, comms)]
    rhos = t.challenge_vector("kzg-batch", group.scalar, len(items))
    if not kzg.batch_verify_openings(vk, items, rhos):
        for rec, (comm, op) in zip(bundle.layers, items):
            if not kzg.verify_opening(vk, comm, op):
                return no(f"layer {rec.index}: KZG opening rejected")
        return no("batched KZG check rejected")
    return Verdict(True, "", tuple(t.log))


# bundle file
#   magic "ZKFGPI" | version | backend | profile | width | hash id | label schedule id
#   | u32 layer count | commitments digest (32)
#   | per layer: u32 record length | record
#   | u32 aux count | per aux matrix: u32 rows | u32 cols | entries
# record: u32 index | u32 d1 | u32 d2 | u32 d3 | output digest (32) | sumcheck proof
#   | weight eval | u | v | opening point
def encode_bundle(bundle: ProofBundle) -> bytes:
    params = profile(bundle.profile_id)
    group = kzg.group_for(bundle.backend_id, params)
    out = bytearray(BUNDLE_MAGIC)
    out += bytes([bundle.version, bundle.backend_id, bundle.profile_id, params.byte_width,
                  HASH_ID_SHA256, LABEL_SCHEDULE_ID])
    out += struct.pack(">I", len(bundle.layers)) + bundle.commitments_digest
    for rec in bundle.layers:
        body = struct.pack(">IIII", rec.index, *rec.dims) + rec.output_digest
        body += rec.sumcheck.to_bytes()
        body += rec.weight_eval.to_bytes() + rec.opening.u.to_bytes() + rec.opening.v.to_bytes()
        body += group.encode_g1(rec.opening.point)
        out += struct.pack(">I", len(body)) + body
    out += struct.pack(">I", len(bundle.aux))
    for m in bundle.aux:
        out += struct.pack(">II", m.rows, m.cols) + m.to_bytes()
    return bytes(out)


def decode_bundle(data: bytes) -> ProofBundle:
    try:
        return _decode_bundle(data)
    except (struct.error, IndexError) as exc:
        raise SchemeError("truncated bundle") from exc


def _decode_bundle(data: bytes) -> ProofBundle:
    n = len(BUNDLE_MAGIC)
    if data[:n] != BUNDLE_MAGIC:
        raise SchemeError("not a proof bundle")
    version, backend, prof, width, hash_id, schedule = data[n:n + 6]
    if version != VERSION:
        raise SchemeError(f"unsupported bundle version {version}")
    if hash_id != HASH_ID_SHA256 or schedule != LABEL_SCHEDULE_ID:
        raise SchemeError("unknown transcript hash or label schedule")
    params = profile(prof)
    if width != params.byte_width:
        raise SchemeError("field width does not match profile")
    group = kzg.group_for(backend, params)
    off = n + 6
    (count,) = struct.unpack_from(">I", data, off)
    off += 4
    comm_digest = data[off:off + 32]
    off += 32
    w = params.byte_width
    records = []
    for _ in range(count):
        (length,) = struct.unpack_from(">I", data, off)
        off += 4
        body = data[off:off + length]
        if len(body) != length:
            raise SchemeError("truncated layer record")
        off += length
        idx, d1, d2, d3 = struct.unpack_from(">IIII", body, 0)
        digest = body[16:48]
        proof, p = SumcheckProof.from_bytes(body, params, 48)
        weight_eval, u, v = (params.decode(body[p + i * w:p + (i + 1) * w]) for i in range(3))
        p += 3 * w
        point = group.decode_g1(body[p:])
        records.append(LayerRecord(idx, (d1, d2, d3), digest, proof, weight_eval, Opening(u, v, point)))
    (naux,) = struct.unpack_from(">I", data, off)
    off += 4
    aux = []
    for _ in range(naux):
        r, c = struct.unpack_from(">II", data, off)
        off += 8
        if r * c > len(data):
            raise SchemeError("implausible auxiliary matrix size")
        aux.append(FieldMatrix.from_bytes(r, c, data[off:off + r * c * w], params))
        off += r * c * w
    if off != len(data):
        raise SchemeError("trailing bytes after bundle")
    return ProofBundle(backend, prof, comm_digest, tuple(records), tuple(aux), version)
