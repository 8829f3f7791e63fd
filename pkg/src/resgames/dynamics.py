"""Round-robin best-response walks, Nash checks, optima, and efficiency metrics."""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    TOL,
    Game,
    JointAction,
    ValidationError,
    selection_counts,
    utility_full,
    welfare,
)

INCUMBENT_THEN_LEX = "incumbent_then_lex"
LEXICOGRAPHIC = "lexicographic"

_WALK_STEP_CEILING = 10**6


@dataclass(frozen=True)
class AdversarialEnumerate:
    """Tie-break mode that minimizes final welfare over every tie resolution."""

    cap: int = 500_000


class BudgetExceededError(RuntimeError):
    """Exact enumeration would exceed the configured budget."""

    def __init__(self, needed: int, budget: int):
        super().__init__(
            f"brute force needs {needed} joint evaluations, budget is {budget}; "
            "reduce the instance or raise the budget"
        )
        self.needed = needed
        self.budget = budget


class EnumerationCapError(RuntimeError):
    """Adversarial tie enumeration hit its cap before finishing.

    ``best_upper`` is the lowest completed-path welfare seen so far (an upper
    bound on the true adversarial minimum), or None if no path completed.
    """

    def __init__(self, explored: int, cap: int, best_upper: float | None):
        super().__init__(
            f"tie enumeration exceeded cap={cap} (explored {explored} states); "
            f"best completed-path welfare so far: {best_upper}"
        )
        self.explored = explored
        self.cap = cap
        self.best_upper = best_upper


@dataclass(frozen=True)
class Step:
    tau: int
    player: int
    action: int
    welfare: float
    potential: float


@dataclass(frozen=True)
class Trajectory:
    initial: JointAction
    steps: tuple[Step, ...]
    final: JointAction

    @property
    def final_welfare(self) -> float:
        return self.steps[-1].welfare if self.steps else 0.0

    def states(self) -> list[JointAction]:
        """Joint actions along the walk, from the initial state to the last."""
        out = [self.initial]
        cur = list(self.initial)
        for s in self.steps:
            cur[s.player] = s.action
            out.append(tuple(cur))
        return out


def round_robin_schedule(n_players: int, k: int) -> tuple[int, ...]:
    return tuple(i for _ in range(k) for i in range(n_players))


def _check_schedule(g: Game, schedule: Sequence[int]) -> tuple[int, ...]:
    sched = tuple(int(i) for i in schedule)
    if not sched:
        raise ValidationError("schedule must be nonempty")
    if any(i < 0 or i >= g.n_players for i in sched):
        raise ValidationError("schedule contains invalid player indices")
    return sched


def best_responses(g: Game, a: Sequence[int], i: int) -> list[int]:
    """All argmax action indices for player i against a_{-i}, ties at TOL."""
    a = g.validate_joint(a)
    counts = selection_counts(g, a)
    for r in g.action_resources[i][a[i]]:
        counts[r] -= 1
    utab = g.utility_tables
    utils = [
        sum(utab[r, counts[r] + 1] for r in res)
        for res in g.action_resources[i]
    ]
    top = max(utils)
    return [k for k, u in enumerate(utils) if u >= top - TOL]


def is_nash(g: Game, a: Sequence[int]) -> bool:
    """True iff every player's current action is one of its best responses."""
    a = g.validate_joint(a)
    return all(a[i] in best_responses(g, a, i) for i in range(g.n_players))


def potential(g: Game, a: Sequence[int]) -> float:
    """Scalar whose change under any unilateral move equals the mover's utility change."""
    return utility_full(g, a)


def _walk_deterministic(g: Game, start: JointAction, schedule: tuple[int, ...],
                        tie_break: str, tau_offset: int = 0) -> Trajectory:
    if tie_break not in (INCUMBENT_THEN_LEX, LEXICOGRAPHIC):
        raise ValidationError(f"unknown tie break {tie_break!r}")
    counts = selection_counts(g, start).tolist()
    joint = list(start)
    utab = g.utility_tables
    wtab = g.welfare_tables
    cumtab = g.cumulative_utility_tables
    cols = np.arange(g.n_resources)
    steps = []
    for tau, i in enumerate(schedule, start=tau_offset + 1):
        for r in g.action_resources[i][joint[i]]:
            counts[r] -= 1
        utils = [
            sum(utab[r, counts[r] + 1] for r in res)
            for res in g.action_resources[i]
        ]
        top = max(utils)
        if tie_break == INCUMBENT_THEN_LEX and utils[joint[i]] >= top - TOL:
            choice = joint[i]
        else:
            choice = next(k for k, u in enumerate(utils) if u >= top - TOL)
        joint[i] = choice
        for r in g.action_resources[i][choice]:
            counts[r] += 1
        carr = np.asarray(counts)
        steps.append(Step(
            tau, i, choice,
            float(wtab[cols, carr].sum()),
            float(cumtab[cols, carr].sum()),
        ))
    return Trajectory(start, tuple(steps), tuple(joint))


class _AdversarialSearch:
    """Depth-first minimization of final welfare over all best-response ties.

    Resources that no remaining mover can touch have their welfare finalized
    and dropped from the memo key, so the reachable-state blowup from long
    tie chains stays bounded by what the still-active resources distinguish.
    """

    def __init__(self, g: Game, schedule: tuple[int, ...], cap: int):
        self.g = g
        self.schedule = schedule
        self.cap = cap
        n_steps = len(schedule)
        player_res = []
        for acts in g.action_resources:
            seen = set()
            for res in acts:
                seen.update(res)
            player_res.append(seen)
        active: list[tuple[int, ...]] = [()] * (n_steps + 1)
        cur: set[int] = set()
        for t in reversed(range(n_steps)):
            cur = cur | player_res[schedule[t]]
            active[t] = tuple(sorted(cur))
        self.active = active
        self.finalized_after = [
            tuple(sorted(set(active[t]) - set(active[t + 1]))) for t in range(n_steps)
        ]
        self.future_players = [
            tuple(sorted({schedule[s] for s in range(t, n_steps)})) for t in range(n_steps)
        ]
        self.memo: dict[tuple, tuple[float, int]] = {}
        self.explored = 0
        self.best_upper: float | None = None

    def run(self) -> float:
        g = self.g
        self.counts = selection_counts(g, g.null_action()).tolist()
        self.joint = list(g.null_action())
        limit = len(self.schedule) + 200
        if sys.getrecursionlimit() < limit:
            sys.setrecursionlimit(limit + 1000)
        return self._solve(0, 0.0)

    def _key(self, t: int) -> tuple:
        joint, counts = self.joint, self.counts
        return (
            t,
            tuple(joint[p] for p in self.future_players[t]),
            tuple(counts[r] for r in self.active[t]),
        )

    def _solve(self, t: int, acc: float) -> float:
        if t == len(self.schedule):
            if self.best_upper is None or acc < self.best_upper:
                self.best_upper = acc
            return 0.0
        key = self._key(t)
        hit = self.memo.get(key)
        if hit is not None:
            total = acc + hit[0]
            if self.best_upper is None or total < self.best_upper:
                self.best_upper = total
            return hit[0]
        self.explored += 1
        if self.explored > self.cap:
            raise EnumerationCapError(self.explored, self.cap, self.best_upper)
        g, counts, joint = self.g, self.counts, self.joint
        utab = g.utility_tables
        wtab = g.welfare_tables
        i = self.schedule[t]
        old = joint[i]
        for r in g.action_resources[i][old]:
            counts[r] -= 1
        utils = [
            sum(utab[r, counts[r] + 1] for r in res)
            for res in g.action_resources[i]
        ]
        top = max(utils)
        best_val: float | None = None
        best_act = -1
        for a_idx, u in enumerate(utils):
            if u < top - TOL:
                continue
            joint[i] = a_idx
            for r in g.action_resources[i][a_idx]:
                counts[r] += 1
            released = sum(wtab[r, counts[r]] for r in self.finalized_after[t])
            val = released + self._solve(t + 1, acc + released)
            for r in g.action_resources[i][a_idx]:
                counts[r] -= 1
            if best_val is None or val < best_val:
                best_val, best_act = val, a_idx
        joint[i] = old
        for r in g.action_resources[i][old]:
            counts[r] += 1
        self.memo[key] = (best_val, best_act)
        return best_val

    def reconstruct(self) -> Trajectory:
        g = self.g
        counts = selection_counts(g, g.null_action()).tolist()
        joint = list(g.null_action())
        self.counts, self.joint = counts, joint
        wtab = g.welfare_tables
        cumtab = g.cumulative_utility_tables
        cols = np.arange(g.n_resources)
        steps = []
        for t, i in enumerate(self.schedule):
            _, act = self.memo[self._key(t)]
            for r in g.action_resources[i][joint[i]]:
                counts[r] -= 1
            joint[i] = act
            for r in g.action_resources[i][act]:
                counts[r] += 1
            carr = np.asarray(counts)
            steps.append(Step(
                t + 1, i, act,
                float(wtab[cols, carr].sum()),
                float(cumtab[cols, carr].sum()),
            ))
        return Trajectory(g.null_action(), tuple(steps), tuple(joint))


def adversarial_min_welfare(
    g: Game,
    k: int = 1,
    *,
    cap: int = 500_000,
    schedules: Sequence[Sequence[int]] | None = None,
) -> tuple[float, Trajectory]:
    """Minimum final welfare over all tie resolutions (and supplied schedules)."""
    if schedules is None:
        schedules = [round_robin_schedule(g.n_players, k)]
    best: tuple[float, Trajectory] | None = None
    for sched in schedules:
        search = _AdversarialSearch(g, _check_schedule(g, sched), cap)
        val = search.run()
        if best is None or val < best[0]:
            best = (val, search.reconstruct())
    return best


def k_round_walk(
    g: Game,
    k: int,
    tie_break: str | AdversarialEnumerate = INCUMBENT_THEN_LEX,
    schedule: Sequence[int] | None = None,
) -> Trajectory:
    """Best-response walk from the null allocation for k full rounds.

    ``schedule`` overrides the default round-robin step sequence.  Under
    :class:`AdversarialEnumerate` the returned trajectory is one that attains
    the minimum final welfare over all tie resolutions.
    """
    if k < 1:
        raise ValidationError("k must be a positive integer")
    sched = round_robin_schedule(g.n_players, k) if schedule is None else _check_schedule(g, schedule)
    if isinstance(tie_break, AdversarialEnumerate):
        _, traj = adversarial_min_welfare(g, k, cap=tie_break.cap, schedules=[sched])
        return traj
    return _walk_deterministic(g, g.null_action(), sched, tie_break)


def walk_to_nash(
    g: Game,
    tie_break: str = INCUMBENT_THEN_LEX,
    max_steps: int = _WALK_STEP_CEILING,
) -> Trajectory:
    """Iterate rounds until a full round leaves the state unchanged.

    Convergence is guaranteed by the potential; ``max_steps`` guards against
    tolerance artifacts.
    """
    n = g.n_players
    one_round = round_robin_schedule(n, 1)
    all_steps: list[Step] = []
    state = g.null_action()
    taken = 0
    while True:
        if taken + n > max_steps:
            raise EnumerationCapError(taken, max_steps, None)
        traj = _walk_deterministic(g, state, one_round, tie_break, taken)
        taken += n
        all_steps.extend(traj.steps)
        if traj.final == state:
            return Trajectory(g.null_action(), tuple(all_steps), traj.final)
        state = traj.final


def reachable_nash_min(g: Game, cap: int = 500_000) -> tuple[float, JointAction]:
    """Minimum welfare over Nash states reachable by some tie resolution.

    Explores the best-response transition graph from the null allocation; a
    walk can stay at any reachable Nash state forever, so these are exactly
    the attainable limit points under adversarial tie breaking.
    """
    n = g.n_players
    start = (0, g.null_action())
    seen = {start}
    stack = [start]
    nash_cache: dict[JointAction, bool] = {}
    best: tuple[float, JointAction] | None = None
    while stack:
        pos, joint = stack.pop()
        if joint not in nash_cache:
            nash_cache[joint] = is_nash(g, joint)
            if nash_cache[joint]:
                w = welfare(g, joint)
                if best is None or w < best[0]:
                    best = (w, joint)
        for b in best_responses(g, joint, pos):
            child = list(joint)
            child[pos] = b
            state = ((pos + 1) % n, tuple(child))
            if state not in seen:
                if len(seen) >= cap:
                    raise EnumerationCapError(len(seen), cap, best[0] if best else None)
                seen.add(state)
                stack.append(state)
    if best is None:
        raise EnumerationCapError(len(seen), cap, None)
    return best


def optimum(g: Game, *, budget: int = 10**8, chunk: int = 1 << 18) -> tuple[JointAction, float]:
    """Exact brute-force welfare maximizer over the full joint action space."""
    sizes = [len(acts) for acts in g.actions]
    total = math.prod(sizes)
    if total > budget:
        raise BudgetExceededError(total, budget)
    n_res = g.n_resources
    onehot = []
    for acts in g.action_resources:
        m = np.zeros((len(acts), n_res), dtype=np.int16)
        for k, res in enumerate(acts):
            for r in res:
                m[k, r] += 1
        onehot.append(m)
    wtab_t = g.welfare_tables.T  # (n_players + 1, n_res)
    cols = np.arange(n_res)
    best_w = -np.inf
    best_flat = 0
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total), dtype=np.int64)
        counts = np.zeros((len(flat), n_res), dtype=np.int16)
        rem = flat
        for i in reversed(range(g.n_players)):
            idx = rem % sizes[i]
            rem = rem // sizes[i]
            counts += onehot[i][idx]
        w = wtab_t[counts, cols].sum(axis=1)
        k = int(np.argmax(w))
        if w[k] > best_w:
            best_w = float(w[k])
            best_flat = int(flat[k])
    joint = []
    rem = best_flat
    for i in reversed(range(g.n_players)):
        joint.append(rem % sizes[i])
        rem //= sizes[i]
    return tuple(reversed(joint)), best_w


def efficiency(
    g: Game,
    k: int | float,
    tie_break: str | AdversarialEnumerate = INCUMBENT_THEN_LEX,
    *,
    budget: int = 10**8,
    schedule: Sequence[int] | None = None,
) -> float:
    """Walk welfare after k rounds (or at the limit) divided by the exact optimum.

    ``k`` may be ``math.inf`` to measure the limit point.  Adversarial tie
    breaking reports the worst attainable value.
    """
    _, opt_w = optimum(g, budget=budget)
    if opt_w <= 0.0:
        return 1.0
    adversarial = isinstance(tie_break, AdversarialEnumerate)
    if k == math.inf:
        if adversarial:
            w, _ = reachable_nash_min(g, cap=tie_break.cap)
        else:
            w = welfare(g, walk_to_nash(g, tie_break).final)
    else:
        if adversarial:
            scheds = None if schedule is None else [schedule]
            w, _ = adversarial_min_welfare(g, int(k), cap=tie_break.cap, schedules=scheds)
        else:
            w = k_round_walk(g, int(k), tie_break, schedule).final_welfare
    return w / opt_w


def one_round_can_end_at(g: Game, target: Sequence[int]) -> bool:
    """Whether some tie resolution of a one-round walk ends exactly at ``target``."""
    target = g.validate_joint(target)
    joint = list(g.null_action())
    for i in range(g.n_players):
        if target[i] not in best_responses(g, joint, i):
            return False
        joint[i] = target[i]
    return True
