"""Randomized weapon-target-assignment experiments with exact normalization.

Instances are generated from a counter-based RNG keyed by (master_seed,
instance_index), so results are reproducible across platforms and independent
of execution order; the exported CSV is byte-identical on re-run.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .designs import DesignSpec, apply_design, design_common_interest
from .dynamics import k_round_walk, optimum
from .model import Game, Resource, ValidationError, make_welfare_rule


class Row(NamedTuple):
    instance: int
    design: str
    round: int
    welfare: float
    normalized_welfare: float


class SummaryRow(NamedTuple):
    design: str
    round: int
    min: float
    q1: float
    median: float
    q3: float
    max: float


def _default_designs() -> tuple[DesignSpec, ...]:
    return (
        DesignSpec("one_round"),
        DesignSpec("common_interest"),
        DesignSpec("asymptotic"),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    n_agents: int = 10
    n_targets: int = 15
    p_hit: float = 0.5
    actions_per_agent: int = 2
    action_width: int = 2
    n_instances: int = 100
    rounds: int = 5
    master_seed: int = 1
    designs: tuple[DesignSpec, ...] = field(default_factory=_default_designs)

    def __post_init__(self):
        if self.action_width > self.n_targets:
            raise ValidationError("action_width cannot exceed n_targets")
        if not 0.0 < self.p_hit <= 1.0:
            raise ValidationError("p_hit must lie in (0, 1]")
        for name in ("n_agents", "n_targets", "actions_per_agent", "action_width",
                     "n_instances", "rounds"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive")
        object.__setattr__(self, "designs", tuple(self.designs))

    def joint_space(self) -> int:
        return (self.actions_per_agent + 1) ** self.n_agents

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "designs"}
        d["designs"] = [s.to_dict() for s in self.designs]
        return d

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        d = dict(d)
        designs = tuple(DesignSpec.from_dict(s) for s in d.pop("designs", []))
        if not designs:
            designs = _default_designs()
        return ExperimentConfig(designs=designs, **d)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[Row]
    summary: list[SummaryRow]


def gen_wta(cfg: ExperimentConfig, instance_index: int) -> Game:
    """Deterministic instance: normalized uniform target values, circular windows.

    Draw order is fixed (values first, then each agent's window starts) and the
    stream is keyed by (master_seed, instance_index), never by global state.
    """
    rng = np.random.Generator(np.random.Philox(key=[cfg.master_seed, instance_index]))
    values = rng.random(cfg.n_targets)
    values = values / values.sum()
    w = make_welfare_rule("wta", cfg.n_agents, p=cfg.p_hit)
    f = design_common_interest(w)
    res = tuple(
        Resource(f"t{t}", w, f, float(values[t])) for t in range(cfg.n_targets)
    )
    actions = []
    for _ in range(cfg.n_agents):
        acts = [frozenset()]
        for _ in range(cfg.actions_per_agent):
            start = int(rng.integers(0, cfg.n_targets))
            acts.append(frozenset(f"t{(start + d) % cfg.n_targets}" for d in range(cfg.action_width)))
        actions.append(tuple(acts))
    return Game(res, tuple(actions))


def _run_instance(cfg: ExperimentConfig, idx: int, budget: int) -> list[Row]:
    base = gen_wta(cfg, idx)
    _, opt_w = optimum(base, budget=budget)
    n = base.n_players
    rows = []
    for spec in cfg.designs:
        g = apply_design(base, spec)
        traj = k_round_walk(g, cfg.rounds)
        for r in range(1, cfg.rounds + 1):
            w = traj.steps[r * n - 1].welfare
            rows.append(Row(idx, spec.name(), r, w, w / opt_w))
    return rows


def run_experiment(cfg: ExperimentConfig, *, budget: int = 10**8) -> ExperimentResult:
    """Run every instance and design: walks use incumbent-keeping ties and each
    round's welfare is normalized by the instance's exact brute-force optimum."""
    if cfg.joint_space() > budget:
        from .dynamics import BudgetExceededError

        raise BudgetExceededError(cfg.joint_space(), budget)
    threads = int(os.environ.get("RESGAMES_THREADS", "1"))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_instance = list(pool.map(
                lambda i: _run_instance(cfg, i, budget), range(cfg.n_instances)
            ))
    else:
        per_instance = [_run_instance(cfg, i, budget) for i in range(cfg.n_instances)]
    rows = [row for chunk in per_instance for row in chunk]
    summary = summarize(cfg, rows)
    return ExperimentResult(cfg, rows, summary)


def summarize(cfg: ExperimentConfig, rows: Sequence[Row]) -> list[SummaryRow]:
    """Min/quartiles/median/max of normalized welfare across instances."""
    out = []
    for spec in cfg.designs:
        for r in range(1, cfg.rounds + 1):
            vals = np.array([
                row.normalized_welfare
                for row in rows
                if row.design == spec.name() and row.round == r
            ])
            lo, q1, med, q3, hi = np.percentile(vals, [0, 25, 50, 75, 100], method="linear")
            out.append(SummaryRow(spec.name(), r, float(lo), float(q1), float(med), float(q3), float(hi)))
    return out


def export_result(res: ExperimentResult, fmt: str, out_dir: str | Path) -> list[Path]:
    """Write raw.csv / summary.csv and-or result.json; floats use shortest
    round-trip formatting so identical runs export identical bytes."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    paths = []
    if fmt not in ("csv", "json", "both"):
        raise ValidationError("format must be csv, json, or both")
    if fmt in ("csv", "both"):
        raw = out / "raw.csv"
        with raw.open("w", newline="") as fh:
            fh.write("instance,design,round,welfare,normalized_welfare\n")
            for row in res.rows:
                fh.write(f"{row.instance},{row.design},{row.round},{row.welfare!r},{row.normalized_welfare!r}\n")
        summ = out / "summary.csv"
        with summ.open("w", newline="") as fh:
            fh.write("design,round,min,q1,median,q3,max\n")
            for s in res.summary:
                fh.write(f"{s.design},{s.round},{s.min!r},{s.q1!r},{s.median!r},{s.q3!r},{s.max!r}\n")
        paths += [raw, summ]
    if fmt in ("json", "both"):
        jpath = out / "result.json"
        payload = {
            "config": res.config.to_dict(),
            "rows": [row._asdict() for row in res.rows],
            "summary": [s._asdict() for s in res.summary],
        }
        with jpath.open("w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
        paths.append(jpath)
    return paths


def load_raw_csv(path: str | Path) -> list[Row]:
    rows = []
    with Path(path).open() as fh:
        header = fh.readline().strip()
        if header != "instance,design,round,welfare,normalized_welfare":
            raise ValidationError(f"unexpected raw csv header: {header}")
        for line in fh:
            inst, design, rnd, w, nw = line.rstrip("\n").split(",")
            rows.append(Row(int(inst), design, int(rnd), float(w), float(nw)))
    return rows
