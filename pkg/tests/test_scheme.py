import hashlib
import inspect
import random

import pytest

from conftest import needs_bls
from matproof import kzg, scheme
from matproof.field import BLS12_381_R, TEST64
from matproof.kzg import Opening
from matproof.mle import FieldMatrix
from matproof.scheme import LayerRecord, ModelWeights, ProofBundle, SchemeError
from matproof.sumcheck import MatmulStatement, Mode, SumcheckProof, run_prover
from matproof.transcript import Transcript

F = BLS12_381_R


def mock_keys(max_params=16, params=F, seed=1):
    return scheme.keygen(128 if params is F else 64, seed, max_params, "mock", params)


def model(*layers, params=F):
    return ModelWeights(tuple(FieldMatrix.from_ints(m, params) for m in layers))


def test_keygen_sizes_and_seed():
    keys = mock_keys(4)
    assert len(keys.pk.powers) == 4 and len(keys.vk.powers) == 4
    assert mock_keys(4).pk.powers == keys.pk.powers
    with pytest.raises(SchemeError):
        scheme.keygen(128, 1, 0)
    # the 64-bit profile is flagged insecure, so it is allowed below lambda for testing
    assert TEST64.insecure and scheme.keygen(128, 1, 4, "mock", TEST64).n == 3


def test_commit_example_with_known_secret():
    keys = scheme.keygen(128, None, 4, "mock", secret=3, retain_secret=True)
    assert keys.secret == 3 and keys.pk.powers == (1, 3, 9, 27)
    comms = scheme.commit_model(keys.pk, model([[1, 2], [3, 4]]))
    assert [c.point for c in comms] == [1 + 2 * 3 + 3 * 9 + 4 * 27]
    twice = scheme.commit_model(keys.pk, model([[1, 2], [3, 4]], [[1, 2], [3, 4]]))
    assert twice[0] == twice[1] == comms[0]


def test_empty_and_mismatched_models():
    with pytest.raises(SchemeError):
        ModelWeights(())
    with pytest.raises(SchemeError):
        model([[1, 2, 3]], [[1, 2]])  # 1x3 then 1x2: inner dims 1 vs 2
    with pytest.raises(SchemeError):
        ModelWeights((FieldMatrix.from_ints([[1]], F), FieldMatrix.from_ints([[1]], TEST64)))


def test_example_end_to_end(example):
    w, x, y = example
    keys = mock_keys(4)
    weights = ModelWeights((w,))
    comms = scheme.commit_model(keys.pk, weights)
    out, bundle = scheme.prove(keys.pk, weights, x, comms)
    assert out.to_ints() == [[19, 22], [43, 50]]
    assert len(bundle.layers) == 1 and bundle.aux == ()
    verdict = scheme.verify(keys.vk, comms, bundle, x, y)
    assert verdict and str(verdict) == "Yes"
    labels = [lbl for lbl, _ in verdict.challenges]
    assert labels == ["rij", "rij", "round-poly", "kzg-u", "kzg-batch"]


def test_identity_and_chain():
    rng = random.Random(2)
    keys = mock_keys(16)
    x = FieldMatrix.random(4, 3, F, rng)
    ident = model([[int(i == j) for j in range(4)] for i in range(4)])
    out, bundle = scheme.prove(keys.pk, ident, x)
    assert out == x
    assert scheme.verify(keys.vk, scheme.commit_model(keys.pk, ident), bundle, x, out)

    w1, w2 = FieldMatrix.random(2, 4, F, rng), FieldMatrix.random(3, 2, F, rng)
    chain = ModelWeights((w1, w2))
    comms = scheme.commit_model(keys.pk, chain)
    out, bundle = scheme.prove(keys.pk, chain, x, comms)
    assert out == w2 @ (w1 @ x)
    assert len(bundle.layers) == 2 and bundle.aux == (w1 @ x,)
    assert scheme.verify(keys.vk, comms, bundle, x, out)


def test_prove_preconditions(example):
    w, x, _ = example
    keys = mock_keys(4)
    with pytest.raises(SchemeError):
        scheme.prove(keys.pk, ModelWeights((w,)), FieldMatrix.from_ints([[1, 2, 3]], F))
    with pytest.raises(SchemeError):
        scheme.prove(mock_keys(2).pk, ModelWeights((w,)), x)
    with pytest.raises(SchemeError):
        scheme.prove(keys.pk, model([[1, 2], [3, 4]], params=TEST64), x)


def setup_example(example):
    w, x, y = example
    keys = mock_keys(4)
    weights = ModelWeights((w,))
    comms = scheme.commit_model(keys.pk, weights)
    out, bundle = scheme.prove(keys.pk, weights, x, comms)
    return keys, comms, bundle, x, out


def test_tampered_output_rejected(example):
    keys, comms, bundle, x, y = setup_example(example)
    bad = FieldMatrix.from_ints([[20, 22], [43, 50]], F)
    v = scheme.verify(keys.vk, comms, bundle, x, bad)
    assert not v and "digest" in v.reason
    # a bundle whose record carries the tampered digest fails in the sumcheck instead
    rec = bundle.layers[0]
    forged = ProofBundle(bundle.backend_id, bundle.profile_id, bundle.commitments_digest,
                         (LayerRecord(0, rec.dims, scheme.matrix_digest(bad), rec.sumcheck,
                                      rec.weight_eval, rec.opening),))
    v = scheme.verify(keys.vk, comms, forged, x, bad)
    assert not v and "sumcheck" in v.reason


def replace_record(bundle, **changes):
    rec = bundle.layers[0]
    fields = dict(index=rec.index, dims=rec.dims, output_digest=rec.output_digest, sumcheck=rec.sumcheck,
                  weight_eval=rec.weight_eval, opening=rec.opening)
    fields.update(changes)
    return ProofBundle(bundle.backend_id, bundle.profile_id, bundle.commitments_digest,
                       (LayerRecord(**fields),) + bundle.layers[1:], bundle.aux)


def test_tampered_bundle_fields_rejected(example):
    keys, comms, bundle, x, y = setup_example(example)
    op = bundle.layers[0].opening
    cases = {
        "v": replace_record(bundle, opening=Opening(op.u, op.v + 1, op.point)),
        "u": replace_record(bundle, opening=Opening(op.u + 1, op.v, op.point)),
        "point": replace_record(bundle, opening=Opening(op.u, op.v, op.point + 1)),
        "weight_eval": replace_record(bundle, weight_eval=bundle.layers[0].weight_eval + 1),
        "final": replace_record(bundle, sumcheck=SumcheckProof(
            None, bundle.layers[0].sumcheck.rounds, bundle.layers[0].sumcheck.final_eval + 1)),
        "dims": replace_record(bundle, dims=(2, 2, 1)),
        "index": replace_record(bundle, index=1),
    }
    for name, b in cases.items():
        assert not scheme.verify(keys.vk, comms, b, x, y), name
    assert "KZG" in scheme.verify(keys.vk, comms, cases["v"], x, y).reason
    other = scheme.commit_model(keys.pk, model([[1, 2], [3, 5]]))
    assert not scheme.verify(keys.vk, other, bundle, x, y)
    assert not scheme.verify(keys.vk, comms + comms, bundle, x, y)
    assert not scheme.verify(keys.vk, comms, bundle, FieldMatrix.from_ints([[5, 6], [7, 9]], F), y)


def test_tampered_inner_activation_rejected():
    rng = random.Random(3)
    keys = mock_keys(16)
    w1, w2 = FieldMatrix.random(4, 4, F, rng), FieldMatrix.random(4, 4, F, rng)
    x = FieldMatrix.random(4, 2, F, rng)
    weights = ModelWeights((w1, w2))
    comms = scheme.commit_model(keys.pk, weights)
    y, bundle = scheme.prove(keys.pk, weights, x, comms)
    inner = bundle.aux[0]
    entries = list(inner.entries)
    entries[5] = entries[5] + 1
    bad = FieldMatrix(inner.rows, inner.cols, tuple(entries), F)
    b2 = ProofBundle(bundle.backend_id, bundle.profile_id, bundle.commitments_digest, bundle.layers, (bad,))
    assert not scheme.verify(keys.vk, comms, b2, x, y)
    b3 = ProofBundle(bundle.backend_id, bundle.profile_id, bundle.commitments_digest, bundle.layers, ())
    assert not scheme.verify(keys.vk, comms, b3, x, y)


def test_completeness_randomized():
    rng = random.Random(4)
    keys = mock_keys(64, TEST64)
    for _ in range(100):
        n = rng.choice((1, 2, 4))
        dims = [rng.choice((1, 2, 4, 8)) for _ in range(n + 1)]
        layers = tuple(FieldMatrix.random(dims[i + 1], dims[i], TEST64, rng) for i in range(n))
        x = FieldMatrix.random(dims[0], rng.choice((1, 2, 4, 8)), TEST64, rng)
        weights = ModelWeights(layers)
        comms = scheme.commit_model(keys.pk, weights)
        y, bundle = scheme.prove(keys.pk, weights, x, comms)
        back = scheme.decode_bundle(scheme.encode_bundle(bundle))
        assert scheme.verify(keys.vk, comms, back, x, y)


def test_bundle_roundtrip_and_format(example):
    keys, comms, bundle, x, y = setup_example(example)
    data = scheme.encode_bundle(bundle)
    assert data[:6] == b"ZKFGPI" and data[6] == scheme.VERSION and data[7] == 1
    assert scheme.decode_bundle(data) == bundle
    for cut in (5, 20, len(data) - 1):
        with pytest.raises(SchemeError):
            scheme.decode_bundle(data[:cut])
    with pytest.raises(SchemeError):
        scheme.decode_bundle(data + b"\0")
    cdata = scheme.encode_commitments(keys.pk.group, comms)
    assert cdata[:5] == b"ZKFGC"
    assert scheme.decode_commitments(cdata)[1] == comms


def test_verify_has_no_weights_parameter():
    params = inspect.signature(scheme.verify).parameters
    assert list(params)[:5] == ["vk", "comms", "bundle", "x", "y"]
    assert not any("weight" in p for p in params)


def test_zero_knowledge_smoke():
    rng = random.Random(5)
    keys = mock_keys(64)
    x = FieldMatrix.random(8, 4, F, rng)
    blobs = []
    for _ in range(2):
        w = ModelWeights((FieldMatrix.random(8, 8, F, rng),))
        comms = scheme.commit_model(keys.pk, w)
        _, bundle = scheme.prove(keys.pk, w, x, comms)
        data = scheme.encode_bundle(bundle) + scheme.encode_commitments(keys.pk.group, comms)
        blobs.append(data)
        assert w.layers[0].to_bytes() not in data
        # no single row of weights either
        for i in range(8):
            assert b"".join(e.to_bytes() for e in w.layers[0].row(i)) not in data
    assert len(blobs[0]) == len(blobs[1])


def test_weight_claim_is_not_bound_by_commitment(example):
    """Known limitation, kept as a regression marker.

    The opening at u checks the committed W but nothing ties W(ri, rk) to it, so a
    prover holding any W' with W'X = Y' can pass. This test fails the day that gap is closed.
    """
    w, x, _ = example
    keys = mock_keys(4)
    weights = ModelWeights((w,))
    comms = scheme.commit_model(keys.pk, weights)
    fake_y = FieldMatrix.from_ints([[20, 22], [43, 50]], F)
    # W' = Y' X^-1 with X = [[5,6],[7,8]], det = -2
    inv_det = F.from_signed(-2).inv()
    xinv = FieldMatrix(2, 2, tuple(e * inv_det for e in FieldMatrix.from_ints([[8, -6], [-7, 5]], F).entries), F)
    fake_w = fake_y @ xinv
    assert fake_w @ x == fake_y

    group = keys.pk.group
    t = Transcript(scheme.DOMAIN)
    scheme._seed_transcript(t, group, comms, x, [(2, 2, 2)])
    digest = scheme.matrix_digest(fake_y)
    t.absorb("layer-output", digest)
    proof, run = run_prover(MatmulStatement(Mode.SOUND_RANDOM_POINT, x, fake_y, fake_w), t)
    t.absorb_field("w-eval", run.weight_eval)
    u = t.challenge_field("kzg-u", F)
    opening = kzg.open(keys.pk, scheme.flatten(w), u)
    rec = LayerRecord(0, (2, 2, 2), digest, SumcheckProof(None, proof.rounds, proof.final_eval),
                      run.weight_eval, opening)
    cdigest = hashlib.sha256(scheme.encode_commitments(group, comms)).digest()
    bundle = ProofBundle(group.backend_id, F.profile_id, cdigest, (rec,))
    assert scheme.verify(keys.vk, comms, bundle, x, fake_y)


@needs_bls
@pytest.mark.slow
def test_bls_end_to_end(example):
    w, x, y = example
    keys = scheme.keygen(128, 7, 4, "bls12-381")
    weights = ModelWeights((w,))
    comms = scheme.commit_model(keys.pk, weights)
    out, bundle = scheme.prove(keys.pk, weights, x, comms)
    assert out == y
    vk = kzg.decode_vk(kzg.encode_vk(keys.vk))
    back = scheme.decode_bundle(scheme.encode_bundle(bundle))
    assert scheme.verify(vk, comms, back, x, y)
    op = bundle.layers[0].opening
    assert not scheme.verify(vk, comms, replace_record(bundle, opening=Opening(op.u, op.v + 1, op.point)), x, y)
