"""Utility-rule designs: common interest, one-round optimal, asymptotically
optimal, and the Pareto-optimal set-covering family.

The defining recursions multiply the running value by j at step j, which
amplifies rounding error factorially; every tabulation here therefore uses
closed-form tail series that only ever multiply by factors <= 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import (
    Game,
    Resource,
    UtilityRule,
    ValidationError,
    WelfareRule,
    convert_rule,
    curvature,
    make_utility_rule,
)

E = math.e
E_MINUS_1 = E - 1.0

#: Smallest achievable equalized increment for set-covering rules; the
#: asymptotic efficiency 1/(1+chi) cannot exceed 1 - 1/e.
CHI_MIN = 1.0 / E_MINUS_1

_SNAP = 1e-12


def _e_pow(n: int) -> float:
    """e**n by repeated multiplication, identical across platforms."""
    out = 1.0
    for _ in range(n):
        out *= E
    return out


def _decay_tail(j: np.ndarray, b: float, coef: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """sum_{m>=1} coef(j-1+m) * prod_{i=1..m} b/(j-1+i), elementwise over j.

    All factors are <= b/j, so the partial products shrink monotonically once
    the index passes b and the series converges absolutely.
    """
    j = np.asarray(j, dtype=np.float64)
    total = np.zeros_like(j)
    prod = np.ones_like(j)
    m = 0
    while True:
        m += 1
        t = j - 1.0 + m
        prod = prod * (b / t)
        term = coef(t) * prod
        total += term
        if m > 4 and float(np.abs(term).max()) < 1e-18:
            return total
        if m > 5000:
            raise RuntimeError("tail series failed to converge")


def design_common_interest(w: WelfareRule) -> UtilityRule:
    """Marginal form of the shared-objective design: f(j) = w(j) - w(j-1)."""
    vals = convert_rule("to_marginal", w.values)
    return make_utility_rule(vals, w.tail_slope)


def design_one_round(c: float, j_max: int = 8) -> UtilityRule:
    """Rule maximizing one-round walk efficiency at curvature c.

    f(1) = 1 and f(j) = (2 - 2c)/(2 - c) for j >= 2, extended constantly.
    """
    if not 0.0 <= c <= 1.0:
        raise ValidationError("curvature must lie in [0, 1]")
    f2 = (2.0 - 2.0 * c) / (2.0 - c)
    vals = (1.0,) + (f2,) * max(j_max - 1, 1)
    return make_utility_rule(vals, f2)


def design_asymptotic(b: int, c: float, j_max: int) -> UtilityRule:
    """Rule maximizing limit-point efficiency against the bend-b curvature-c rule.

    Defined by f(1) = 1 and, for bend 1,
        f(j+1) = max(j f(j) - rho ((1-c) j + c) + 1, 1 - c),  rho = e / (e - c),
    or, for curvature 1 and general bend b,
        f(j+1) = (j f(j) - rho_b min(j, b)) / b + 1,  rho_b = (1 - b^b e^-b / b!)^-1.

    Tabulated via the equivalent decaying series
        f(j) = ((j-1)!/b^(j-1)) sum_{T>=j} (rho_b min(T,b)/b - 1) b^T / T!
    whose terms are computed as running products of factors <= 1; the forward
    recursion itself drifts past 1e-9 of the true values around j = 12.
    """
    if int(b) != b or b < 1:
        raise ValidationError("b must be an integer >= 1")
    if not 0.0 <= c <= 1.0:
        raise ValidationError("curvature must lie in [0, 1]")
    if b > 1 and c != 1.0:
        raise ValidationError("only bend 1 (any curvature) or curvature 1 (any bend) is supported")
    if j_max < 2:
        raise ValidationError("j_max must be at least 2")
    b = int(b)
    j = np.arange(1, j_max + 1, dtype=np.float64)
    if b == 1:
        rho = E / (E - c)
        vals = _decay_tail(j, 1.0, lambda t: rho * (1.0 - c) * t + rho * c - 1.0)
        vals = np.maximum(vals, 1.0 - c)
    else:
        rho_b = 1.0 / (1.0 - b**b / (_e_pow(b) * math.factorial(b)))
        head = [1.0]
        for jj in range(1, b - 1):
            head.append((jj * head[-1] - rho_b * min(jj, b)) / b + 1.0)
        tail = _decay_tail(j[b - 1 :], float(b), lambda t: np.full_like(t, rho_b - 1.0))
        vals = np.concatenate([np.asarray(head[:j_max]), tail])[:j_max]
        vals = np.maximum(vals, 0.0)
    vals[0] = 1.0
    return make_utility_rule(tuple(vals), float(vals[-1]))


def design_pareto_setcov(chi: float | None = None, q: float | None = None,
                         j_max: int = 64) -> UtilityRule:
    """Set-covering rule with equalized increments j f(j) - f(j+1) = chi.

    Defined by f(1) = 1, f(j+1) = max(j f(j) - chi, 0); its limit-point
    efficiency is 1/(1+chi) = q.  Tabulated via the split
        f(j) = (j-1)! (1 - chi (e-1)) + chi (j-1)! sum_{t>=j} 1/t!
    with the second term as a stable product series.  A first factor within
    1e-12 of zero is snapped to exactly zero so the factorial cannot amplify
    the rounding of chi at the 1/(e-1) endpoint.
    """
    if (chi is None) == (q is None):
        raise ValidationError("give exactly one of chi or q")
    if chi is None:
        if not 0.5 - _SNAP <= q <= 1.0 - 1.0 / E + _SNAP:
            raise ValidationError("q must lie in [1/2, 1 - 1/e]")
        chi = (1.0 - q) / q
    chi = float(chi)
    if chi < CHI_MIN - _SNAP:
        raise ValidationError(f"chi must be at least 1/(e-1) ~ {CHI_MIN:.6f}")
    delta = 1.0 - chi * E_MINUS_1
    if abs(delta) <= _SNAP:
        delta = 0.0
    j = np.arange(1, j_max + 1, dtype=np.float64)
    tail = _decay_tail(j, 1.0, lambda t: np.ones_like(t))
    vals = chi * tail
    if delta != 0.0:
        # delta < 0: the factorial term drags the rule to its zero floor.
        fact = 1.0
        for idx in range(j_max):
            if idx > 0:
                fact *= idx
            v = delta * fact + vals[idx]
            if v <= 0.0 or not math.isfinite(fact):
                vals[idx:] = 0.0
                break
            vals[idx] = v
    vals[0] = 1.0
    return make_utility_rule(tuple(vals), float(vals[-1]))


def chi_of_q(q: float) -> float:
    return (1.0 - q) / q


def q_of_chi(chi: float) -> float:
    return 1.0 / (1.0 + chi)


@dataclass(frozen=True)
class DesignSpec:
    """Serializable choice of utility design for experiment configs and the CLI.

    ``c`` (and for pareto, ``chi``/``q``) may be left None to be resolved from
    the measured curvature of the welfare rule the design is applied to.
    """

    family: str  # common_interest | one_round | asymptotic | pareto
    c: float | None = None
    b: int = 1
    chi: float | None = None
    q: float | None = None
    label: str | None = None

    def name(self) -> str:
        return self.label if self.label is not None else self.family

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    @staticmethod
    def from_dict(d: dict) -> "DesignSpec":
        return DesignSpec(**d)


def resolve_design(spec: DesignSpec | str, w: WelfareRule, j_max: int | None = None) -> UtilityRule:
    """Produce the utility rule a design assigns to the welfare rule ``w``.

    Designs are defined for rules with w(1) = 1; other rules are normalized
    first and the resulting f is scaled back so f(1) = w(1).
    """
    if isinstance(spec, str):
        spec = DesignSpec(spec)
    scale = w.values[0]
    wn = w if abs(scale - 1.0) <= 1e-15 else w.scaled(1.0 / scale)
    jm = j_max if j_max is not None else max(wn.j_max, 8)
    if spec.family == "common_interest":
        f = design_common_interest(wn)
    elif spec.family == "one_round":
        c = spec.c if spec.c is not None else curvature(wn)
        f = design_one_round(c, jm)
    elif spec.family == "asymptotic":
        c = spec.c if spec.c is not None else curvature(wn)
        f = design_asymptotic(spec.b, c, jm)
    elif spec.family == "pareto":
        f = design_pareto_setcov(spec.chi, spec.q, jm)
    else:
        raise ValidationError(f"unknown design family {spec.family!r}")
    return f if abs(scale - 1.0) <= 1e-15 else f.scaled(scale)


def apply_design(g: Game, spec: DesignSpec | str | Callable[[WelfareRule], UtilityRule],
                 j_max: int | None = None) -> Game:
    """Replace every resource's utility rule with the design's output."""
    jm = j_max if j_max is not None else max(g.n_players, 8)
    cache: dict[int, UtilityRule] = {}
    out = []
    for r in g.resources:
        key = id(r.welfare)
        if key not in cache:
            if callable(spec) and not isinstance(spec, (DesignSpec, str)):
                cache[key] = spec(r.welfare)
            else:
                cache[key] = resolve_design(spec, r.welfare, jm)
        out.append(Resource(r.rid, r.welfare, cache[key], r.value))
    return Game(tuple(out), g.actions)
