"""Command-line front end: ``replicasym {evaluate,classify,reproduce,...}``.

Exit codes: 0 success (or a verdict of OBSTRUCTION/INEQUIVALENT), 1 an
INCONCLUSIVE verdict or a failed check, 2 bad input, 3 resource cap hit.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import state_library as sl
from . import witness_library as wl
from .canonical_engine import DEFAULT_CAP
from .classifier import VerdictKind, check_obstruction, check_pair, evaluate, format_rational, tangle
from .errors import ResourceCapExceeded
from .jsonio import load_json, state_from_json, witness_from_json
from .permutation_algebra import WitnessOperator, commutes_with_local_powers_check
from .replica_state import ReplicaState, rank_profile
from .suite import published_note, reproduce_paper_suite

EXIT_INCONCLUSIVE = 1
EXIT_USAGE = 2
EXIT_CAP = 3


class UsageError(ValueError):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _lambdas(text: str | None, args) -> list[str]:
    src = text if text else args.lambdas
    if not src:
        raise UsageError("this state needs Schmidt coefficients (name:l1,l2,... or --lambdas)")
    return [x for x in src.split(",") if x.strip()]


def resolve_state(token: str, args) -> ReplicaState:
    """Named state (with optional ``:params``) or a JSON file."""
    if token.endswith(".json") or Path(token).is_file():
        return state_from_json(load_json(token), name=Path(token).stem)
    name, _, param = token.partition(":")
    name = name.strip().lower()
    params = _int_list(param) if param and name not in ("schmidt", "biseparable") else []
    parties = params[0] if params else args.parties
    if (m := re.fullmatch(r"ghz(\d+)", name)) and not param:
        return sl.ghz(int(m.group(1)), int(m.group(1)))
    if (m := re.fullmatch(r"chi(\d+)", name)) and not param:
        return sl.aharonov(int(m.group(1)))
    if name == "bell":
        return sl.bell()
    if name == "schmidt":
        return sl.schmidt_state(_lambdas(param, args), dim=args.levels)
    if name == "ghz":
        levels = params[1] if len(params) > 1 else args.levels
        return sl.ghz(parties or 3, levels or 2)
    if name == "w":
        return sl.w_qubit(parties or 3)
    if name == "w3":
        return sl.w3_threelevel()
    if name == "aharonov":
        return sl.aharonov(parties or 3)
    if name in ("aharonov_plus", "chi3plus", "chi3+"):
        return sl.aharonov_plus3()
    if name == "biseparable":
        lam = _lambdas(param, args) if (param or args.lambdas) else ["1/3"] * 3
        return sl.biseparable(lam, args.phi_dim or 3, args.phi_index or 1)
    if name == "product":
        if not params:
            raise UsageError("product needs a ket, e.g. product:1,2,1")
        dims = [max(args.levels or 2, k) for k in params]
        return sl.product_state(dims, params)
    raise UsageError(f"unknown state {token!r}")


def resolve_witness(token: str, args, state: ReplicaState) -> WitnessOperator:
    n = state.num_subsystems
    if token.endswith(".json") or Path(token).is_file():
        return witness_from_json(
            load_json(token), n, args.replicas, allow_overlap=args.engine == "reference", name=Path(token).stem
        )
    name = token.strip().lower()
    if name in ("pminus", "antisym", "sym"):
        subset = _int_list(args.subset) if args.subset else list(range(1, (args.replicas or 2) + 1))
        sub = args.subsystem or 1
        if name == "pminus":
            factor = wl.p_minus(sub, subset if args.subset else (1, 2))
        elif name == "antisym":
            factor = wl.antisymmetrizer(sub, subset)
        else:
            factor = wl.symmetrizer(sub, subset)
        m = args.replicas or max(subset)
        return wl.witness_from_factors([factor], n, m, name=name)
    if name == "a_tau":
        return wl.a_tau(n)
    if name == "a_3tau":
        return wl.a_3tau()
    if name == "aas":
        return wl.aas()
    if (m := re.fullmatch(r"p_?(\d+)", name)) or name == "p_n":
        size = int(m.group(1)) if m else (args.parties or n)
        return wl.p_n(size)
    if name == "schmidt_rank":
        if not args.rank:
            raise UsageError("schmidt_rank needs --rank")
        return wl.schmidt_rank_witness(args.rank, n)
    raise UsageError(f"unknown witness {token!r}")


def _eval_kw(args) -> dict:
    return {"engine": args.engine or "auto", "cap": args.cap, "workers": args.threads}


def _emit(args, payload: dict, text: str):
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=False) + "\n")
    else:
        sys.stdout.write(text)


def _residual_text(ev) -> str:
    exact = format_rational(ev.norm_sq) if ev.exact else "approx"
    return f"{exact} (float {float(ev.norm_sq)!r}, {ev.status})"


def cmd_evaluate(args) -> int:
    psi = resolve_state(args.state, args)
    op = resolve_witness(args.witness, args, psi)
    ev = evaluate(op, psi, args.replicas, **_eval_kw(args))
    payload = {"state": psi.name or args.state, **ev.to_json()}
    notes = list(op.notes)
    note = published_note(op.name, psi.name)
    if note:
        notes.append(note)
    payload["annotations"] = notes
    st = ev.stats.to_json() if ev.stats else {}
    lines = [
        f"witness   {op.name} (M={ev.m}, {ev.engine} engine)",
        f"state     {psi.name or args.state}",
        f"residual  {_residual_text(ev)}",
        f"zero      {'true' if ev.is_zero else 'false'}",
        "terms     " + " ".join(f"{k}={v}" for k, v in st.items()),
    ]
    lines += [f"note      {x}" for x in notes]
    _emit(args, payload, "\n".join(lines) + "\n")
    return 0


def _verdict_text(v) -> list[str]:
    out = [
        f"verdict   {v.kind.value}",
        f"witness   {v.witness} (M={v.m})",
        f"from      {v.psi_name}: residual {_residual_text(v.psi)}, ranks {','.join(map(str, v.ranks_psi))}",
        f"to        {v.phi_name}: residual {_residual_text(v.phi)}, ranks {','.join(map(str, v.ranks_phi))}",
    ]
    return out + [f"note      {x}" for x in v.annotations]


def cmd_classify(args) -> int:
    psi = resolve_state(args.src, args)
    phi = resolve_state(args.dst, args)
    specs = args.witness
    ops = [resolve_witness(w, args, psi) for w in specs]
    kw = _eval_kw(args)
    if len(ops) == 1:
        v = check_obstruction(psi, phi, ops[0], args.replicas, **kw)
        _emit(args, v.to_json(), "\n".join(_verdict_text(v)) + "\n")
        kind = v.kind
    else:
        jv = check_pair(psi, phi, ops, **kw)
        lines = [f"joint     {jv.kind.value}"]
        for label, vs in (("forward", jv.forward), ("backward", jv.backward)):
            for v in vs:
                lines += [f"[{label}]"] + ["  " + x for x in _verdict_text(v)]
        _emit(args, jv.to_json(), "\n".join(lines) + "\n")
        kind = jv.kind
    return 0 if kind is not VerdictKind.INCONCLUSIVE else EXIT_INCONCLUSIVE


def cmd_reproduce(args) -> int:
    report = reproduce_paper_suite(include_n5=args.include_n5, seed=args.seed, commutation_trials=args.trials)
    _emit(args, report.to_json(args.timings), report.to_text(args.timings))
    return 0 if report.passed else 1


def cmd_commutes(args) -> int:
    psi = resolve_state(args.state, args) if args.state else None
    if psi is None:
        raise UsageError("commutes needs --state to fix the shape")
    op = resolve_witness(args.witness, args, psi)
    ok = commutes_with_local_powers_check(op, trials=args.trials, seed=args.seed, dims=psi.dims)
    payload = {"witness": op.name, "dims": list(psi.dims), "trials": args.trials, "seed": args.seed, "commutes": ok}
    _emit(args, payload, f"{op.name} on dims {psi.dims}: {args.trials} trials, seed {args.seed}: "
                         f"{'commutes' if ok else 'DOES NOT COMMUTE'}\n")
    return 0 if ok else 1


def cmd_crosscheck(args) -> int:
    psi = resolve_state(args.state, args)
    op = resolve_witness(args.witness, args, psi)
    a = evaluate(op, psi, args.replicas, engine="canonical", cap=args.cap, workers=args.threads)
    b = evaluate(op, psi, args.replicas, engine="reference", cap=args.cap)
    same = a.norm_sq == b.norm_sq
    payload = {"witness": op.name, "state": psi.name, "canonical": a.residual_json(),
               "reference": b.residual_json(), "agree": same}
    _emit(args, payload, f"canonical {_residual_text(a)}\nreference {_residual_text(b)}\n"
                         f"agree     {'true' if same else 'false'}\n")
    return 0 if same else 1


def cmd_tangle(args) -> int:
    psi = resolve_state(args.state, args)
    t = tangle(psi)
    payload = {"state": psi.name, "tangle": str(t.value) if t.exact else float(t.value),
               "float": float(t.value), "exact": t.exact, "interval": list(t.interval)}
    _emit(args, payload, f"tangle    {t.value} (float {float(t.value)!r})\n")
    return 0


def cmd_ranks(args) -> int:
    psi = resolve_state(args.state, args)
    ranks = rank_profile(psi)
    _emit(args, {"state": psi.name, "ranks": list(ranks)}, f"ranks     {','.join(map(str, ranks))}\n")
    return 0


def _cap(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        try:
            value = int(float(text))
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid cap {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("cap must be positive")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--engine", choices=("canonical", "reference"), default=None)
    common.add_argument("--threads", type=_positive, default=1, help="worker processes for the canonical engine")
    common.add_argument("--cap", type=_cap, default=DEFAULT_CAP, help="maximum number of live partial terms")
    common.add_argument("--replicas", type=_positive, default=None)
    common.add_argument("--rank", type=_positive, default=None, help="k for schmidt_rank")
    common.add_argument("--subsystem", type=_positive, default=None, help="subsystem for pminus/antisym/sym")
    common.add_argument("--subset", default=None, help="replicas for pminus/antisym/sym, e.g. 1,2,3")
    common.add_argument("--parties", type=_positive, default=None)
    common.add_argument("--levels", type=_positive, default=None)
    common.add_argument("--lambdas", default=None, help="Schmidt coefficients as rationals, e.g. 1/2,1/3,1/6")
    common.add_argument("--phi-dim", dest="phi_dim", type=_positive, default=None)
    common.add_argument("--phi-index", dest="phi_index", type=_positive, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=_positive, default=20)

    p = argparse.ArgumentParser(prog="replicasym", description="Replica-permutation entanglement witnesses.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("evaluate", parents=[common], help="residual norm of a witness on state^M")
    e.add_argument("--state", required=True)
    e.add_argument("--witness", required=True)
    e.set_defaults(func=cmd_evaluate)

    c = sub.add_parser("classify", parents=[common], help="obstruction verdict between two states")
    c.add_argument("--from", dest="src", required=True)
    c.add_argument("--to", dest="dst", required=True)
    c.add_argument("--witness", action="append", required=True, help="repeat for a joint check")
    c.set_defaults(func=cmd_classify)

    r = sub.add_parser("reproduce", parents=[common], help="run the reproduction table")
    r.add_argument("--include-n5", dest="include_n5", action="store_true")
    r.add_argument("--timings", action="store_true", help="add runtimes (output is then not reproducible)")
    r.set_defaults(func=cmd_reproduce)

    m = sub.add_parser("commutes", parents=[common], help="randomized check of [A, F^M] = 0")
    m.add_argument("--witness", required=True)
    m.add_argument("--state", required=True, help="any state of the target shape")
    m.set_defaults(func=cmd_commutes)

    x = sub.add_parser("crosscheck", parents=[common], help="compare canonical and reference engines")
    x.add_argument("--state", required=True)
    x.add_argument("--witness", required=True)
    x.set_defaults(func=cmd_crosscheck)

    t = sub.add_parser("tangle", parents=[common], help="three-qubit tangle")
    t.add_argument("--state", required=True)
    t.set_defaults(func=cmd_tangle)

    k = sub.add_parser("ranks", parents=[common], help="single-subsystem reduced density ranks")
    k.add_argument("--state", required=True)
    k.set_defaults(func=cmd_ranks)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceCapExceeded as exc:
        sys.stderr.write(f"replicasym: resource cap exceeded: {exc}\n")
        return EXIT_CAP
    except (ValueError, OSError, KeyError) as exc:
        sys.stderr.write(f"replicasym: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
