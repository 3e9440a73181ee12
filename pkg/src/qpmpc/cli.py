"""Command-line entry point: ``qpmpc <subcommand> [flags]``.

Exit codes: 0 success, 1 usage/config, 2 protocol reject, 3 rounds exhausted,
4 internal invariant breach.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import adversary, harness
from .errors import (
    GuardError,
    InvalidInputError,
    InvariantBreach,
    LayoutError,
    PhaseError,
    ProtocolReject,
    QpmpcError,
    RoundsExhausted,
)
from .numtheory import brute_force_period
from .protocols import lcm_width, run_qov, run_smqlcmc, run_smqs, vote_width
from .qpa import QpaConfig, run_qpa

EXIT_OK, EXIT_USAGE, EXIT_REJECT, EXIT_EXHAUSTED, EXIT_INTERNAL = 0, 1, 2, 3, 4
SEED_ENV = "QPMPC_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", default="-", help="output path (default: stdout)")
    common.add_argument("--config", default=None, help="JSON file whose keys mirror the flags")
    common.add_argument("--debug", action="store_true")

    parser = _Parser(prog="qpmpc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sum", parents=[common], help="secure summation")
    p.add_argument("--inputs", type=int_list, required=True)
    p.add_argument("--bits", type=int, required=True)

    p = sub.add_parser("vote", parents=[common], help="one-vote-down vote")
    p.add_argument("--votes", type=int_list, required=True)
    p.add_argument("--M", type=int, default=16)

    p = sub.add_parser("lcm", parents=[common], help="secure LCM")
    p.add_argument("--inputs", type=int_list, required=True)
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--max-rounds", type=int, default=64)
    p.add_argument("--M", type=int, default=16)
    p.add_argument("--force", action="store_true", help="bypass the 2nm+1 <= 17 engine guard")

    p = sub.add_parser("qpa", parents=[common], help="period finding for f(j) = j mod x")
    p.add_argument("--modulus", type=int, required=True)
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--max-rounds", type=int, default=64)

    p = sub.add_parser("attack", parents=[common], help="semi-honest attack on one LCM round")
    p.add_argument("--kind", choices=("direct", "pre", "post"), required=True)
    p.add_argument("--inputs", type=int_list, required=True)
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--attacker", type=int, default=1)
    p.add_argument("--when", choices=("before", "after"), default="before")
    p.add_argument("--instant", choices=adversary.PRE_INSTANTS, default="after_oracle")
    p.add_argument("--register", default=None)

    p = sub.add_parser("leakage", parents=[common], help="Monte Carlo vote-count leakage")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=int, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--diagnostic", action="store_true")

    p = sub.add_parser("bench", parents=[common], help="communication/operator cost sweep")
    p.add_argument("--sweep", required=True, help="e.g. 'smqs:n=2,3,4;m=3,5'")

    p = sub.add_parser("batch", parents=[common], help="seeded Monte Carlo batch")
    p.add_argument("--protocol", choices=harness.PROTOCOLS, required=True)
    p.add_argument("--params", required=True, help="JSON object of protocol parameters")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    return parser


def parse_sweep(text: str) -> tuple[str, list[int], list[int]]:
    try:
        protocol, rest = text.split(":", 1)
        axes = dict(part.split("=", 1) for part in rest.split(";"))
        return protocol.strip(), int_list(axes["n"]), int_list(axes["m"])
    except (ValueError, KeyError, argparse.ArgumentTypeError):
        raise UsageError(f"bad --sweep {text!r}; expected 'protocol:n=..;m=..'") from None


def resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None
    print("warning: no --seed given; using seed 0", file=sys.stderr)
    return 0


def _need(cond: bool, message: str):
    if not cond:
        raise UsageError(message)


def cmd_sum(args, seed):
    _need(len(args.inputs) >= 2, "sum needs at least two inputs")
    config = {"command": "sum", "inputs": args.inputs, "bits": args.bits, "n": len(args.inputs), "seed": seed}
    y, tr = run_smqs(args.inputs, args.bits, seed)
    return config, {"sum": y, **_cost(tr)}


def cmd_vote(args, seed):
    _need(len(args.votes) >= 2, "vote needs at least two voters")
    _need(args.M >= 2, "--M must be >= 2")
    n = len(args.votes)
    config = {"command": "vote", "votes_n": n, "M": args.M, "m_vote": vote_width(n, args.M), "seed": seed}
    out, tr = run_qov(args.votes, args.M, seed)
    result = {"y": out.y, **_cost(tr)}
    if args.debug:
        result["z"] = out.z
        result["leakage"] = adversary.leakage_probe(out.z, out.m_vote, args.M, n).to_dict()
    return config, result


def cmd_lcm(args, seed):
    n = len(args.inputs)
    _need(n >= 2, "lcm needs at least two inputs")
    config = {
        "command": "lcm", "inputs": args.inputs, "bits": args.bits, "n": n,
        "u": lcm_width(n, args.bits), "M": args.M, "m_vote": vote_width(n, args.M),
        "max_rounds": args.max_rounds, "force": args.force, "seed": seed,
    }
    out, tr = run_smqlcmc(args.inputs, args.bits, seed, args.max_rounds, args.M, args.force)
    return config, {"y": out.y, "rounds": out.rounds, "candidate_history": out.candidate_history, **_cost(tr)}


def cmd_qpa(args, seed):
    cfg = QpaConfig(v=args.v, max_rounds=args.max_rounds, seed=seed)
    _need(1 <= args.modulus < (1 << args.v), "--modulus must lie in [1, 2^v)")
    config = {"command": "qpa", "modulus": args.modulus, "v": cfg.v, "u": cfg.u, "max_rounds": cfg.max_rounds, "seed": seed}
    f = lambda j: j % args.modulus
    res = run_qpa(f, cfg)
    oracle = brute_force_period(f, cfg.u).period
    if res.period != oracle and args.debug:
        print(f"note: accepted {res.period}, scan gives {oracle}", file=sys.stderr)
    return config, {"period": res.period, "rounds_used": res.rounds_used, "phi_samples": res.phi_samples}


def cmd_attack(args, seed):
    n = len(args.inputs)
    _need(n >= 2, "attack needs at least two inputs")
    _need(0 <= args.attacker < n, "--attacker must name a party")
    config = {
        "command": "attack", "kind": args.kind, "inputs": args.inputs, "bits": args.bits,
        "u": lcm_width(n, args.bits), "attacker": args.attacker, "seed": seed,
    }
    if args.kind == "direct":
        config["when"] = args.when
        rep = adversary.attack_direct(args.inputs, args.bits, args.attacker, args.when, args.register, seed)
    elif args.kind == "pre":
        config["instant"] = args.instant
        rep = adversary.attack_pre_period(args.inputs, args.bits, args.attacker, args.instant, args.register, seed)
    else:
        rep = adversary.attack_post_period(args.inputs, args.bits, args.attacker, seed)
    return config, rep


def cmd_leakage(args, seed):
    _need(1 <= args.lam <= args.n, "--lambda must lie in [1, n]")
    _need(args.trials >= 1, "--trials must be >= 1")
    config = {
        "command": "leakage", "n": args.n, "M": args.M, "lambda": args.lam, "m_vote": vote_width(args.n, args.M),
        "trials": args.trials, "diagnostic": args.diagnostic, "seed": seed,
    }
    freq = adversary.estimate_leak_probability(args.n, args.M, args.lam, args.trials, seed, args.diagnostic)
    p = 1 / args.M
    bound = p + 3 * (p * (1 - p) / args.trials) ** 0.5
    return config, {"frequency": freq, "bound": bound, "below_bound": freq < bound}


def cmd_bench(args, seed):
    protocol, ns, ms = parse_sweep(args.sweep)
    _need(protocol in ("smqs", "qov", "lcm"), f"cannot sweep {protocol!r}")
    config = {"command": "bench", "protocol": protocol, "n": ns, "m": ms, "seed": seed}
    return config, harness.cost_scaling(protocol, ns, ms, seed)


def cmd_batch(args, seed):
    try:
        params = json.loads(args.params)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--params is not JSON: {exc}") from None
    config = {"command": "batch", "protocol": args.protocol, "params": params, "trials": args.trials, "master_seed": seed}
    stats = harness.run_batch(harness.TrialBatch(args.protocol, params, args.trials, seed), args.workers)
    return config, stats


def _cost(tr) -> dict:
    c = harness.cost_summary(tr)
    return {"transfers": c.transfers, "qubits_transferred": c.qubits_transferred, "operator_applications": c.operator_applications}


COMMANDS = {
    "sum": cmd_sum, "vote": cmd_vote, "lcm": cmd_lcm, "qpa": cmd_qpa, "attack": cmd_attack,
    "leakage": cmd_leakage, "bench": cmd_bench, "batch": cmd_batch,
}


def _text(config: dict, result) -> str:
    lines = [f"config.{k}: {json.dumps(harness._stable(v), sort_keys=True)}" for k, v in sorted(config.items())]
    res = harness._stable(result)
    if isinstance(res, dict):
        lines += [f"{k}: {json.dumps(v, sort_keys=True)}" for k, v in sorted(res.items()) if k not in ("observed", "reference")]
    else:
        lines += [json.dumps(r, sort_keys=True) for r in res]
    return "\n".join(lines) + "\n"


def emit(args, config: dict, result):
    out = None if args.out == "-" else args.out
    if args.format == "json":
        harness.emit_report({"config": config, "result": result}, "json", out)
    elif args.format == "csv":
        print(json.dumps(harness._stable(config), sort_keys=True), file=sys.stderr)
        if isinstance(result, adversary.AttackReport):
            harness.emit_report(result.observed, "csv", out)
        elif isinstance(result, list):
            harness.emit_report(result, "csv", out)
        else:
            row = {k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in harness._stable(result).items()}
            harness.emit_report([row], "csv", out)
    else:
        text = _text(config, result)
        if out is None:
            sys.stdout.write(text)
        else:
            with open(out, "w") as fh:
                fh.write(text)


def _apply_config_file(parser: argparse.ArgumentParser, argv: Sequence[str]):
    if "--config" not in argv:
        return
    i = list(argv).index("--config")
    if i + 1 >= len(argv):
        return
    with open(argv[i + 1]) as fh:
        values = json.load(fh)
    if not isinstance(values, dict):
        raise UsageError("--config must hold a JSON object")
    values = {k.replace("-", "_"): v for k, v in values.items()}
    for key in ("inputs", "votes"):
        if isinstance(values.get(key), str):
            values[key] = int_list(values[key])
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for p in sub.choices.values():
        for action in p._actions:
            if action.dest in values:
                action.required = False
        p.set_defaults(**values)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        seed = resolve_seed(args)
        config, result = COMMANDS[args.command](args, seed)
        emit(args, config, result)
        return EXIT_OK
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, InvalidInputError, GuardError, LayoutError, PhaseError, OSError, json.JSONDecodeError) as exc:
        print(f"qpmpc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProtocolReject as exc:
        print(f"qpmpc: protocol rejected: {exc}", file=sys.stderr)
        return EXIT_REJECT
    except RoundsExhausted as exc:
        print(f"qpmpc: {exc}; history={exc.history}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (InvariantBreach, QpmpcError, AssertionError) as exc:
        print(f"qpmpc: internal invariant breach: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
