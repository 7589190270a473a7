"""Proofs that Y = W X for committed private weights W and public input X."""
from .field import BLS12_381_R, TEST64, TOY97, FieldElement, FieldParams
from .mle import FieldMatrix, MlePoly
from .scheme import ModelWeights, ProofBundle, Verdict, commit_model, keygen, prove, verify

__all__ = [
    "BLS12_381_R", "TEST64", "TOY97", "FieldElement", "FieldParams", "FieldMatrix", "MlePoly",
    "ModelWeights", "ProofBundle", "Verdict", "commit_model", "keygen", "prove", "verify",
]
