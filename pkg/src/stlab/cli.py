"""Command-line entry point: ``stlab <subcommand> ...``.

Every subcommand accepts ``--config file.json`` whose keys mirror the long
flags (``snr-db`` or ``snr_db``); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .channel import db_to_linear, derive_seed, make_rng, sample_gaussian_matrix, theta_for, transmit
from .decoders import DECODERS, DegenerateChannelError, build_real_model, decode
from .harness import ExperimentConfig, ber_curve, pep_estimate, records_to_csv, verify_suite
from .stcodes import (CODE_PRESETS, LatticeKind, SignalSet, SpaceTimeCode, code_from_spec,
                      code_preset, min_det, normalized_min_det, shaping_unitarity)


def resolve_code(ref: str) -> SpaceTimeCode:
    """Preset name, or a JSON file holding a code document or a construction spec."""
    if ref in CODE_PRESETS:
        return code_preset(ref)
    if os.path.isfile(ref):
        with open(ref) as fh:
            doc = json.load(fh)
        if "code" in doc and isinstance(doc["code"], dict):  # output of `construct`
            doc = doc["code"]
        return SpaceTimeCode.from_json(doc) if "dispersion" in doc else code_from_spec(doc)
    raise KeyError(f"unknown code {ref!r}; presets: {sorted(CODE_PRESETS)} or a JSON file")


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, indent=2, default=_jsonable)
    sys.stdout.write("\n")


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _signal(args, code: SpaceTimeCode) -> SignalSet:
    kind = LatticeKind(args.lattice) if getattr(args, "lattice", None) else code.lattice_kind
    return SignalSet(kind, args.box)


def cmd_verify(args) -> int:
    report = verify_suite(resolve_code(args.code), args.box)
    _emit(report)
    return 0 if report["ok"] else 1


def cmd_mindet(args) -> int:
    code = resolve_code(args.code)
    res = min_det(code, args.box)
    _emit({"code": code.name, **res.to_json()})
    return 0


def cmd_shaping(args) -> int:
    code = resolve_code(args.code)
    g = 2 * code.n ** 2, 2 * code.k
    if g[0] != g[1]:
        _emit({"code": code.name, "check": "shaping_unitarity", "skipped": True,
               "reason": f"generator is {g[0]}x{g[1]}, not square"})
        return 0
    res = shaping_unitarity(code)
    doc = {"code": code.name, "check": "shaping_unitarity", "residual": res, "ok": res <= 1e-12}
    if code.exact is not None:
        doc["normalized_min_det"] = normalized_min_det(code, args.box).to_json()
    _emit(doc)
    return 0 if doc["ok"] else 1


def _dump_trial(args, code: SpaceTimeCode, signal: SignalSet, snr_db: float) -> dict:
    rng = make_rng(derive_seed(args.seed, 0))
    m, d = signal.box_radius, signal.dim
    sent = rng.integers(-m, m + 1, size=(code.k, d))
    snr = db_to_linear(snr_db)
    theta = theta_for(code, signal, snr, args.theta_mode)
    v = signal.coord_transform(code.k) @ sent.ravel()
    h = sample_gaussian_matrix(rng, code.n)
    y = transmit(code.encode_real(v), h, theta, rng)
    model = build_real_model(code, h, theta, y)
    doc = {"code": code.name, "decoder": args.decoder, "snr_db": snr_db, "seed": args.seed,
           "theta": theta, "sent": sent, "v_sent": v, "z": model.z, "y_real": model.y_real}
    try:
        res = decode(args.decoder, model, signal)
    except DegenerateChannelError as exc:
        doc["error"] = str(exc)
        return doc
    doc.update(decoded=res.message, v_hat=signal.coord_transform(code.k) @ res.message.ravel(),
               metric=res.metric, node_count=res.node_count)
    return doc


def cmd_simulate(args) -> int:
    code = resolve_code(args.code)
    if args.antennas is not None and args.antennas != code.n:
        raise ValueError(f"code {code.name} uses {code.n} antennas, not {args.antennas}")
    signal = _signal(args, code)
    cfg = ExperimentConfig(code=args.code, decoder=args.decoder, snr_db=args.snr_db,
                           trials=args.trials, seed=args.seed, box_radius=args.box,
                           lattice_kind=signal.lattice_kind.value, out=args.out,
                           block_size=args.block_size, workers=args.workers,
                           theta_mode=args.theta_mode)
    if args.dump_trial:
        with open(args.dump_trial, "w") as fh:
            json.dump(_dump_trial(args, code, signal, cfg.snr_db[0]), fh, indent=2,
                      default=_jsonable)
    records = ber_curve(cfg, None if args.code in CODE_PRESETS else code)
    if not args.out:
        sys.stdout.write(records_to_csv(records))
    failures = sum(r.decoder_failures for r in records)
    if failures:
        logging.getLogger("stlab").warning("%d decoder failures counted as codeword errors", failures)
    return 0


def cmd_pep(args) -> int:
    code = resolve_code(args.code)
    signal = _signal(args, code)
    a, b = json.loads(args.msg_a), json.loads(args.msg_b)
    snr_db = float(args.snr_db)
    p = pep_estimate(code, a, b, db_to_linear(snr_db), args.trials, make_rng(args.seed), signal,
                     args.mode, args.theta_mode)
    _emit({"code": code.name, "msg_a": a, "msg_b": b, "snr_db": snr_db, "trials": args.trials,
           "seed": args.seed, "mode": args.mode, "pep": p})
    return 0


def cmd_construct(args) -> int:
    code = code_from_spec(args.spec)
    report = verify_suite(code, args.box)
    _emit({"code": code.to_json(), "verify": report})
    return 0 if report["ok"] else 1


def _build_parser() -> tuple:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys mirror the flags")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="stlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    subs = {}

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        subs[name] = sp
        return sp

    sp = add("verify", cmd_verify, "run every applicable criterion check")
    sp.add_argument("--code", required=True)
    sp.add_argument("--box", type=int, default=1)

    sp = add("mindet", cmd_mindet, "exact minimum determinant over a message box")
    sp.add_argument("--code", required=True)
    sp.add_argument("--box", type=int, default=1)

    sp = add("shaping", cmd_shaping, "unitarity of the code-lattice generator")
    sp.add_argument("--code", required=True)
    sp.add_argument("--box", type=int, default=1)

    sp = add("simulate", cmd_simulate, "error rates over an SNR grid, CSV output")
    sp.add_argument("--code", required=True)
    sp.add_argument("--decoder", choices=sorted(DECODERS), default="sphere")
    sp.add_argument("--snr-db", default="0:20:4", help="a:b:step, a,b,c or a single value")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--box", type=int, default=1)
    sp.add_argument("--lattice", choices=[k.value for k in LatticeKind])
    sp.add_argument("--antennas", type=int)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--block-size", type=int, default=1000)
    sp.add_argument("--theta-mode", choices=["average", "peak"], default="average")
    sp.add_argument("--dump-trial", metavar="PATH",
                    help="write z, y_real and the chosen v for one trial as JSON")

    sp = add("pep", cmd_pep, "pairwise error probability estimate")
    sp.add_argument("--code", required=True)
    sp.add_argument("--msg-a", required=True, help="JSON integer coordinates, shape (k, d)")
    sp.add_argument("--msg-b", required=True)
    sp.add_argument("--snr-db", default="10")
    sp.add_argument("--trials", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--box", type=int, default=1)
    sp.add_argument("--lattice", choices=[k.value for k in LatticeKind])
    sp.add_argument("--mode", choices=["pair", "codebook"], default="pair")
    sp.add_argument("--theta-mode", choices=["average", "peak"], default="average")

    sp = add("construct", cmd_construct, "build a code from an algebra spec and verify it")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--box", type=int, default=1)
    return p, subs


def _apply_config(parser, subs, argv) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in subs), None)
    if known.config and command:
        try:
            with open(known.config) as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config {known.config}: {exc}")
        sp = subs[command]
        actions = {a.dest: a for a in sp._actions}
        defaults = {}
        for key, val in cfg.items():
            dest = key.replace("-", "_")
            if dest not in actions or dest in ("config", "help"):
                parser.error(f"config key {key!r} is not a flag of '{command}'")
            if dest in ("msg_a", "msg_b") and not isinstance(val, str):
                val = json.dumps(val)
            elif dest == "snr_db" and isinstance(val, list):
                val = ",".join(str(v) for v in val)
            defaults[dest] = val
            actions[dest].required = False
        sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser, subs = _build_parser()
    args = _apply_config(parser, subs, argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (KeyError, ValueError, OSError, ArithmeticError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"stlab {args.command}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
