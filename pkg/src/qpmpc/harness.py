"""Monte Carlo orchestration, distribution metrics, cost accounting and report output."""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import EmptyBatchError, InvalidInputError, QpmpcError, TrialError, TruncatedTranscriptError
from .numtheory import brute_force_period, lcm_many
from .protocols import lcm_width, run_qov, run_smqlcmc, run_smqs
from .protocols.transcript import END, MEASURE, OP, ROUND, SEND, Transcript
from .qpa import QpaConfig, run_qpa
from .qsim import MeasurementDistribution

PROTOCOLS = ("smqs", "qov", "lcm", "qpa")
_MASK64 = (1 << 64) - 1


def derive_seed(master_seed: int, index: int) -> int:
    """SplitMix64 finaliser applied to master_seed + (index + 1) * golden gamma."""
    z = (master_seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass
class CostSummary:
    operator_applications: int = 0
    transfers: int = 0
    qubits_transferred: int = 0
    measurements: int = 0
    rounds: int = 0

    def modeled_gate_count(self, width: int) -> int:
        """Elementary controlled rotations, taking O(width^2) per engine operator."""
        return self.operator_applications * width * width


def _tally(events, section: str | None) -> CostSummary:
    out = CostSummary()
    for ev in events:
        if ev.kind == ROUND:
            out.rounds += 1
        if section is not None and ev.section != section:
            continue
        if ev.kind == OP:
            out.operator_applications += 1
        elif ev.kind == SEND:
            out.transfers += 1
            out.qubits_transferred += ev.payload[1]
        elif ev.kind == MEASURE:
            out.measurements += 1
    return out


def cost_summary(transcript: Transcript, section: str | None = None) -> CostSummary:
    """Exact event tallies; ``section`` restricts to one sub-protocol (e.g. ``lcm``)."""
    if not transcript.events:
        return CostSummary()
    if not transcript.complete:
        raise TruncatedTranscriptError("transcript does not end with an 'end' event")
    out = _tally(transcript.events, section)
    out.rounds = max(out.rounds, 1)
    return out


def round_costs(transcript: Transcript, section: str = "lcm") -> list[CostSummary]:
    """Per-round tallies for a multi-round LCM transcript."""
    out = []
    for r in transcript.rounds():
        c = _tally(r.events, section)
        c.rounds = 1
        out.append(c)
    return out


@dataclass
class TrialBatch:
    protocol: str
    params: dict
    trials: int
    master_seed: int = 0

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise InvalidInputError(f"unknown protocol {self.protocol!r}")

    @property
    def seeds(self) -> list[int]:
        return [derive_seed(self.master_seed, i) for i in range(self.trials)]


@dataclass
class TrialResult:
    index: int
    seed: int
    output: int
    expected: int
    rounds: int
    cost: CostSummary | None = None

    @property
    def correct(self) -> bool:
        return self.output == self.expected


def run_trial(protocol: str, params: dict, seed: int, index: int = 0) -> TrialResult:
    if protocol == "smqs":
        y, tr = run_smqs(params["inputs"], params["m"], seed)
        return TrialResult(index, seed, y, sum(params["inputs"]) % (1 << params["m"]), 1, cost_summary(tr))
    if protocol == "qov":
        out, tr = run_qov(params["votes"], params["M"], seed)
        return TrialResult(index, seed, out.y, int(all(params["votes"])), 1, cost_summary(tr))
    if protocol == "lcm":
        out, tr = run_smqlcmc(
            params["inputs"],
            params["m"],
            seed,
            max_rounds=params.get("max_rounds", 64),
            M=params.get("M", 16),
            force=params.get("force", False),
        )
        return TrialResult(index, seed, out.y, lcm_many(params["inputs"]), out.rounds, cost_summary(tr))
    if protocol == "qpa":
        x, v = params["modulus"], params["v"]
        f = lambda j: j % x
        cfg = QpaConfig(v=v, u=params.get("u"), max_rounds=params.get("max_rounds", 64), seed=seed)
        res = run_qpa(f, cfg)
        return TrialResult(index, seed, res.period, brute_force_period(f, cfg.u).period, res.rounds_used)
    raise InvalidInputError(f"unknown protocol {protocol!r}")


def _trial_job(args):
    protocol, params, seed, index = args
    try:
        return run_trial(protocol, params, seed, index)
    except QpmpcError as exc:
        raise TrialError(index, exc) from exc


@dataclass
class BatchStats:
    protocol: str
    params: dict
    trials: int
    master_seed: int
    success_rate: float
    mean_rounds: float
    histogram: dict[str, int]
    mean_cost: dict[str, float] = field(default_factory=dict)
    results: list[TrialResult] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "params": self.params,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "success_rate": self.success_rate,
            "mean_rounds": self.mean_rounds,
            "histogram": self.histogram,
            "mean_cost": self.mean_cost,
        }


def run_batch(batch: TrialBatch, workers: int = 1) -> BatchStats:
    """Run every trial with its derived seed and aggregate; deterministic for a fixed master seed."""
    if batch.trials < 1:
        raise EmptyBatchError("a batch needs at least one trial")
    jobs = [(batch.protocol, batch.params, s, i) for i, s in enumerate(batch.seeds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_job, jobs))
    else:
        results = [_trial_job(j) for j in jobs]
    results.sort(key=lambda r: r.index)
    hist = Counter(str(r.output) for r in results)
    costs = [r.cost for r in results if r.cost is not None]
    mean_cost = {}
    if costs:
        for key in asdict(costs[0]):
            mean_cost[key] = sum(getattr(c, key) for c in costs) / len(costs)
    return BatchStats(
        batch.protocol,
        dict(batch.params),
        batch.trials,
        batch.master_seed,
        sum(r.correct for r in results) / len(results),
        sum(r.rounds for r in results) / len(results),
        dict(sorted(hist.items(), key=lambda kv: int(kv[0]))),
        mean_cost,
        results,
    )


def tv_distance(p: MeasurementDistribution | Sequence[float], q: MeasurementDistribution | Sequence[float]) -> float:
    a = p.probs if isinstance(p, MeasurementDistribution) else np.asarray(p, dtype=float)
    b = q.probs if isinstance(q, MeasurementDistribution) else np.asarray(q, dtype=float)
    if a.shape != b.shape:
        raise InvalidInputError("distributions live on different outcome spaces")
    return float(min(1.0, 0.5 * np.abs(a - b).sum()))


def sweep_inputs(protocol: str, n: int, m: int) -> dict:
    """Deterministic inputs for cost sweeps."""
    if protocol == "smqs":
        return {"inputs": [(7 * i + 3) % (1 << m) for i in range(n)], "m": m}
    if protocol == "qov":
        return {"votes": [1] * n, "M": m}
    if protocol == "lcm":
        return {"inputs": [i % ((1 << m) - 1) + 1 for i in range(n)], "m": m}
    raise InvalidInputError(f"no cost sweep for {protocol!r}")


def cost_scaling(protocol: str, ns: Iterable[int], ms: Iterable[int], seed: int = 0) -> list[dict]:
    """Measured transfer and operator counts over a grid of (n, m).

    For ``qov`` the second axis is M, the masking range.
    """
    rows = []
    ms = list(ms)
    for n in ns:
        for m in ms:
            params = sweep_inputs(protocol, n, m)
            if protocol == "smqs":
                _, tr = run_smqs(params["inputs"], m, seed)
                c, width = cost_summary(tr), m
            elif protocol == "qov":
                out, tr = run_qov(params["votes"], m, seed)
                c, width = cost_summary(tr), out.m_vote
            else:
                _, tr = run_smqlcmc(params["inputs"], m, seed, max_rounds=64)
                c, width = round_costs(tr)[0], lcm_width(n, m)
            rows.append(
                {
                    "protocol": protocol,
                    "n": n,
                    "m": m,
                    "width": width,
                    "operator_applications": c.operator_applications,
                    "transfers": c.transfers,
                    "qubits_transferred": c.qubits_transferred,
                    "modeled_gates": c.modeled_gate_count(width),
                }
            )
    return rows


def _stable(obj: Any) -> Any:
    """Recursively coerce to JSON-ready values, floats at 12 significant digits."""
    if isinstance(obj, (bool, type(None), str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return float(f"{x:.12g}")
    if isinstance(obj, MeasurementDistribution):
        return {str(k): _stable(v) for k, v in obj.as_dict().items()}
    if hasattr(obj, "to_dict"):
        return _stable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): _stable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_stable(v) for v in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return _stable(asdict(obj))
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _fmt(x: Any) -> str:
    x = _stable(x)
    return f"{x:.12g}" if isinstance(x, float) else str(x)


def render(results: Any, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(_stable(results), sort_keys=True, indent=2) + "\n"
    if fmt != "csv":
        raise InvalidInputError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if isinstance(results, MeasurementDistribution):
        results = results.as_dict()
    if isinstance(results, dict):
        writer.writerow(["outcome", "probability"])
        for k, v in sorted(results.items(), key=lambda kv: int(kv[0])):
            writer.writerow([k, _fmt(v)])
    else:
        rows = [_stable(r) for r in results]
        header = sorted({k for r in rows for k in r})
        writer.writerow(header)
        for r in rows:
            writer.writerow([_fmt(r.get(k, "")) for k in header])
    return buf.getvalue()


def emit_report(results: Any, fmt: str = "json", destination=None) -> str:
    """Write a bit-stable JSON or CSV rendering to a path, file object or stdout.

    CSV takes either an outcome->probability mapping (header ``outcome,probability``)
    or a sequence of flat row dicts (header = sorted keys).
    """
    text = render(results, fmt)
    if destination is None or destination == "-":
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text)
    return text


BATCH_SCHEMA = {
    "type": "object",
    "required": ["protocol", "params", "trials", "master_seed", "success_rate", "mean_rounds", "histogram"],
    "properties": {
        "protocol": {"enum": list(PROTOCOLS)},
        "params": {"type": "object"},
        "trials": {"type": "integer", "minimum": 1},
        "master_seed": {"type": "integer"},
        "success_rate": {"type": "number", "minimum": 0, "maximum": 1},
        "mean_rounds": {"type": "number", "minimum": 0},
        "histogram": {"type": "object", "additionalProperties": {"type": "integer"}},
        "mean_cost": {"type": "object", "additionalProperties": {"type": "number"}},
    },
}

ATTACK_SCHEMA = {
    "type": "object",
    "required": ["kind", "attacker", "register", "instant", "basis", "observed", "reference", "max_deviation", "tv_distance"],
    "properties": {
        "kind": {"enum": ["direct", "pre_period", "post_period"]},
        "attacker": {"type": "integer", "minimum": 0},
        "register": {"type": "string"},
        "instant": {"type": "string"},
        "basis": {"enum": ["computational", "fourier", "fourier_inverse"]},
        "observed": {"type": "object", "additionalProperties": {"type": "number"}},
        "reference": {"type": "object", "additionalProperties": {"type": "number"}},
        "max_deviation": {"type": "number", "minimum": 0},
        "tv_distance": {"type": "number", "minimum": 0, "maximum": 1},
        "test_only": {"type": "object"},
    },
}

LEAKAGE_SCHEMA = {
    "type": "object",
    "required": ["z", "m1", "leak_flag", "lambda_bounds", "vote_passed"],
    "properties": {
        "z": {"type": "integer", "minimum": 0},
        "m1": {"type": ["integer", "null"], "minimum": 0},
        "leak_flag": {"type": "boolean"},
        "lambda_bounds": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
        "vote_passed": {"type": "boolean"},
    },
}
