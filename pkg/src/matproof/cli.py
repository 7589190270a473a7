"""Command-line front end.

Exit codes: 0 success / Yes, 1 No / reject, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as benchmod
from . import kzg, scheme
from .field import PROFILE_NAMES, profile
from .ledger import PAYLOAD_TYPES, LedgerError, Store
from .quantizer import QuantScheme, decode_matrix, encode_matrix, quantize_matrix
from .scenarios import CASES, ScenarioConfig, run_scenario


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _read(path: str) -> bytes:
    return Path(path).read_bytes()


def _write(path: str, data: bytes):
    Path(path).write_bytes(data)


def _load_weights(paths) -> scheme.ModelWeights:
    layers = []
    bits = 0
    for p in paths:
        m, bits, _ = decode_matrix(_read(p))
        layers.append(m)
    return scheme.ModelWeights(tuple(layers), name=Path(paths[0]).stem, bits=bits)


def cmd_keygen(args) -> int:
    params = profile(args.profile) if args.profile else None
    keys = scheme.keygen(args.lam, args.seed, args.max_params, args.backend, params)
    _write(args.out + ".pk", kzg.encode_pk(keys.pk))
    _write(args.out + ".vk", kzg.encode_vk(keys.vk))
    print(f"wrote {args.out}.pk and {args.out}.vk (degree bound {keys.n}, backend {args.backend})")
    return 0


def cmd_quantize(args) -> int:
    real = json.loads(Path(args.input).read_text())
    m = quantize_matrix(real, QuantScheme(profile(args.profile), args.bits))
    _write(args.out, encode_matrix(m, args.bits, 1))
    print(f"wrote {m.rows}x{m.cols} matrix to {args.out}")
    return 0


def cmd_commit(args) -> int:
    pk = kzg.decode_pk(_read(args.pk))
    comms = scheme.commit_model(pk, _load_weights(args.weights))
    _write(args.out, scheme.encode_commitments(pk.group, comms))
    print(f"wrote {len(comms)} commitment(s) to {args.out}")
    return 0


def cmd_prove(args) -> int:
    pk = kzg.decode_pk(_read(args.pk))
    weights = _load_weights(args.weights)
    x, bits, _ = decode_matrix(_read(args.input))
    comms = scheme.decode_commitments(_read(args.comm))[1] if args.comm else None
    y, bundle = scheme.prove(pk, weights, x, comms)
    _write(args.out_bundle, scheme.encode_bundle(bundle))
    _write(args.out_output, encode_matrix(y, bits, len(weights.layers) + 1))
    print(f"wrote proof to {args.out_bundle} and output to {args.out_output}")
    return 0


def verify_files(vk_path, comm_path, bundle_path, input_path, output_path) -> scheme.Verdict:
    vk = kzg.decode_vk(_read(vk_path))
    _, comms = scheme.decode_commitments(_read(comm_path))
    x = decode_matrix(_read(input_path))[0]
    y = decode_matrix(_read(output_path))[0]
    try:
        bundle = scheme.decode_bundle(_read(bundle_path))
    except (scheme.SchemeError, ValueError) as exc:
        return scheme.Verdict(False, f"malformed bundle: {exc}")
    return scheme.verify(vk, comms, bundle, x, y)


def cmd_verify(args) -> int:
    verdict = verify_files(args.vk, args.comm, args.bundle, args.input, args.output)
    print(verdict)
    if args.challenges:
        for label, hexval in verdict.challenges:
            print(f"{label} {hexval}")
    return 0 if verdict else 1


def cmd_publish(args) -> int:
    entry = Store(args.store).publish(_read(args.file), args.type)
    print(entry.to_line())
    return 0


def cmd_fetch(args) -> int:
    data, entry = Store(args.store).fetch(args.index)
    if args.out:
        _write(args.out, data)
    print(entry.to_line())
    return 0


def cmd_audit(args) -> int:
    ok = Store(args.store).audit()
    print("intact" if ok else "CORRUPTED")
    return 0 if ok else 1


def cmd_bench(args) -> int:
    records = benchmod.bench(args.dims, args.layers, args.reps, args.backend, args.layer_dim, args.seed)
    text = benchmod.to_csv(records)
    if args.csv:
        Path(args.csv).write_text(text)
    print(text, end="")
    return 0


def cmd_scenario(args) -> int:
    cfg = ScenarioConfig(workdir=args.workdir, seed=args.seed, tamper=args.tamper, backend=args.backend)
    if args.config:
        extra = json.loads(Path(args.config).read_text())
        cfg.weights, cfg.inputs = extra.get("weights"), extra.get("inputs")
    report = run_scenario(args.case, cfg)
    print(report.to_json())
    return report.status


def cmd_serve(args) -> int:
    from .service import serve

    serve(args.host, args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="matproof", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    backends = ("mock", "bls12-381")

    s = sub.add_parser("keygen", help="trusted setup")
    s.add_argument("--lambda", dest="lam", type=int, default=128)
    s.add_argument("--max-params", type=int, required=True, help="largest flattened layer size")
    s.add_argument("--seed", default=None, help="deterministic setup (testing only)")
    s.add_argument("--backend", choices=backends, default="mock")
    s.add_argument("--profile", choices=sorted(PROFILE_NAMES), default=None)
    s.add_argument("--out", required=True, help="output prefix; writes PREFIX.pk and PREFIX.vk")
    s.set_defaults(fn=cmd_keygen)

    s = sub.add_parser("quantize", help="real JSON matrix -> field matrix file")
    s.add_argument("--bits", type=int, default=16)
    s.add_argument("--profile", choices=sorted(PROFILE_NAMES), default="bls12-381-r")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_quantize)

    s = sub.add_parser("commit", help="commit to model weights")
    s.add_argument("--pk", required=True)
    s.add_argument("--weights", nargs="+", required=True, help="layer matrix files, input side first")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_commit)

    s = sub.add_parser("prove", help="run inference and prove it")
    s.add_argument("--pk", required=True)
    s.add_argument("--weights", nargs="+", required=True)
    s.add_argument("--input", required=True)
    s.add_argument("--comm", help="reuse a commitment file instead of recommitting")
    s.add_argument("--out-bundle", required=True)
    s.add_argument("--out-output", required=True)
    s.set_defaults(fn=cmd_prove)

    s = sub.add_parser("verify", help="check a proof bundle")
    s.add_argument("--vk", required=True)
    s.add_argument("--comm", required=True)
    s.add_argument("--bundle", required=True)
    s.add_argument("--input", required=True)
    s.add_argument("--output", required=True)
    s.add_argument("--challenges", action="store_true", help="print the derived challenge sequence")
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("publish", help="append a file to the ledger")
    s.add_argument("--store", required=True)
    s.add_argument("--type", choices=PAYLOAD_TYPES, required=True)
    s.add_argument("--file", required=True)
    s.set_defaults(fn=cmd_publish)

    s = sub.add_parser("fetch", help="read a ledger entry")
    s.add_argument("--store", required=True)
    s.add_argument("--index", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_fetch)

    s = sub.add_parser("audit", help="recheck the whole ledger chain")
    s.add_argument("--store", required=True)
    s.set_defaults(fn=cmd_audit)

    s = sub.add_parser("bench", help="time commit/prove/verify")
    s.add_argument("--layers", type=_ints, default=[1, 2, 4, 8])
    s.add_argument("--dims", type=_ints, default=[16, 32, 64], help="square layer sizes for the parameter sweep")
    s.add_argument("--layer-dim", type=int, default=8)
    s.add_argument("--reps", type=int, default=3)
    s.add_argument("--backend", choices=backends, default="mock")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--csv")
    s.set_defaults(fn=cmd_bench)

    s = sub.add_parser("scenario", help="run a scripted use case end to end")
    s.add_argument("--case", choices=CASES, required=True)
    s.add_argument("--config", help="JSON with real-valued 'weights' (list of layers) and 'inputs'")
    s.add_argument("--tamper", action="store_true", help="alter Y[0][0] before publishing")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--backend", choices=backends, default="mock")
    s.add_argument("--workdir")
    s.set_defaults(fn=cmd_scenario)

    s = sub.add_parser("serve", help="run the HTTP verify service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8650)
    s.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (OSError, LedgerError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
