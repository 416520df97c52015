"""Scaled sharp-constant sequences, their limits, and the identities tying
polynomial constants to entire-function constants.

The limits for p != 2 have no closed form; within this artifact the
entire-function constant for such p is DEFINED as the extrapolated limit of
the scaled polynomial sequence (the limit theorems are the license).  No
direct entire-function discretization is attempted.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .geometry import ConvexBody, ExponentSet, lattice_points
from .quadrature import WeightSpec
from .sharpconst import (
    exact_ball_p2,
    exact_entire_p2,
    exact_interval_p2,
    interval_exponents,
    reduction_constants,
    sharp_constant_general_p,
    sharp_constant_p2_at_point,
)

__all__ = [
    "ScanResult",
    "ChainReport",
    "richardson_limit",
    "cube_limit_scan",
    "point_limit_scan",
    "ball_limit_scan",
    "chain_check",
    "scaled_ball_limit",
    "substitution_gap_check",
]


def richardson_limit(params: Sequence[float], values: Sequence[float]) -> float:
    """First-order Richardson step from the last two points of an O(1/n) tail."""
    if len(values) == 1:
        return float(values[0])
    n1, n2 = params[-2], params[-1]
    v1, v2 = values[-2], values[-1]
    return float((n2 * v2 - n1 * v1) / (n2 - n1))


@dataclass(frozen=True)
class ScanResult:
    """One scaled-constant sequence with its extrapolated and predicted limits."""

    kind: str
    params: tuple[float, ...]
    raw: tuple[float, ...]
    scaled: tuple[float, ...]
    kappa: float
    extrapolated: float
    predicted: float | None
    rel_gap: float
    low_confidence: bool
    diagnostics: dict

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "raw", "scaled", "predicted", "gap"])
            for n, r, s in zip(self.params, self.raw, self.scaled):
                pred = "" if self.predicted is None else f"{self.predicted:.17g}"
                gap = ("" if self.predicted is None
                       else f"{abs(s - self.predicted) / self.predicted:.17g}")
                writer.writerow([f"{n:.17g}", f"{r:.17g}", f"{s:.17g}", pred, gap])

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind,
            "params": list(self.params),
            "raw": list(self.raw),
            "scaled": list(self.scaled),
            "kappa": self.kappa,
            "extrapolated": self.extrapolated,
            "predicted": self.predicted,
            "rel_gap": self.rel_gap,
            "low_confidence": self.low_confidence,
            "diagnostics": self.diagnostics,
        })

    def tail_bracket_ok(self, inflate: float = 3.0) -> bool:
        """Extrapolated limit is consistent with the tail of the sequence.

        A strict min/max bracket over raw scaled values cannot hold for
        monotone O(1/n) tails, whose Richardson limit lands past the last
        term by construction.  Instead the pairwise first-order limits of
        consecutive tail points must bracket the reported extrapolation,
        inflated by their own spread.
        """
        if len(self.scaled) < 3:
            return True
        k = min(4, len(self.scaled))
        ns = self.params[-k:]
        vs = self.scaled[-k:]
        pairwise = [(ns[i + 1] * vs[i + 1] - ns[i] * vs[i]) / (ns[i + 1] - ns[i])
                    for i in range(k - 1)]
        lo, hi = min(pairwise), max(pairwise)
        slack = inflate * (hi - lo) + 1e-9 * max(1.0, abs(self.extrapolated))
        return lo - slack <= self.extrapolated <= hi + slack


def _grid(n_max: int, step: int) -> list[int]:
    ns = list(range(step, n_max + 1, step))
    if not ns:
        ns = [max(1, n_max)]
    return ns


def _is_product_body(body: ConvexBody) -> bool:
    return body.m == 1 or body.kind in ("cube", "parallelepiped")


def _product_entire_limit_p2(body: ConvexBody, per_axis_lams: Sequence[float]) -> float:
    """Product formula for the origin constant of a box-type entire class at
    p=2: per-axis halfwidth c enters as c^(lam + 1/2)."""
    out = 1.0
    for j, lam in enumerate(per_axis_lams):
        c = body.axis_bound(j)
        out *= c ** (lam + 0.5) * exact_entire_p2(1, lam)
    return out


def cube_limit_scan(body: ConvexBody, lambdas: Sequence[float], p: float,
                    n_max: int, *, step: int = 2, restarts: int = 8,
                    seed: int = 0, max_iter: int = 3000) -> ScanResult:
    """Scaled uniform-norm constants a^(-kappa) N(space(a V), cube weight).

    kappa = (m + 2 sum lam_j)/p.  The uniform constant equals the vertex
    point constant for these weights (extremizers peak at a fixed vertex),
    which is what gets computed.  The predicted limit 2^(m/p) times the
    entire-class origin constant is available in closed form for p = 2 and
    box-type bodies.
    """
    lambdas = tuple(float(v) for v in lambdas)
    m = body.m
    kappa = (m + 2.0 * sum(lambdas)) / p
    weight = WeightSpec.coordinate_product([0.0] * m, [v - 0.5 for v in lambdas])
    ones = np.ones(m)
    params, raw = [], []
    failures = 0
    for a in _grid(n_max, step):
        E = lattice_points(body, float(a))
        if p == 2.0:
            val = sharp_constant_p2_at_point(E, weight, ones).value
        else:
            res = sharp_constant_general_p(E, weight, ones, p, restarts=restarts,
                                           seed=seed, max_iter=max_iter)
            val = res.value
            failures += int(res.diagnostics.get("flagged", False))
        params.append(float(a))
        raw.append(val)
    scaled = [r * n ** (-kappa) for n, r in zip(params, raw)]
    extrapolated = richardson_limit(params, scaled)
    predicted = None
    if p == 2.0 and _is_product_body(body):
        predicted = 2.0 ** (m / p) * _product_entire_limit_p2(body, lambdas)
    gap_ref = predicted if predicted is not None else extrapolated
    rel_gap = abs(scaled[-1] - gap_ref) / abs(gap_ref)
    return ScanResult("cube", tuple(params), tuple(raw), tuple(scaled), kappa,
                      extrapolated, predicted, rel_gap,
                      low_confidence=len(params) < 3,
                      diagnostics={"p": p, "lambdas": lambdas,
                                   "body": body.kind, "flagged_points": failures})


def point_limit_scan(body: ConvexBody, alphas: Sequence[float],
                     betas: Sequence[float], p: float, n_max: int, *,
                     step: int = 2, restarts: int = 8, seed: int = 0,
                     max_iter: int = 3000) -> ScanResult:
    """Scaled origin constants a^(-kappa) N_0 with the product weight
    prod |t_j|^alpha_j (1 - t_j^2)^beta_j; kappa = (m + sum alpha_j)/p."""
    alphas = tuple(float(v) for v in alphas)
    betas = tuple(float(v) for v in betas)
    m = body.m
    kappa = (m + sum(alphas)) / p
    weight = WeightSpec.coordinate_product(alphas, betas)
    zero = np.zeros(m)
    params, raw = [], []
    failures = 0
    for a in _grid(n_max, step):
        E = lattice_points(body, float(a))
        if p == 2.0:
            val = sharp_constant_p2_at_point(E, weight, zero).value
        else:
            res = sharp_constant_general_p(E, weight, zero, p, restarts=restarts,
                                           seed=seed, max_iter=max_iter)
            val = res.value
            failures += int(res.diagnostics.get("flagged", False))
        params.append(float(a))
        raw.append(val)
    scaled = [r * n ** (-kappa) for n, r in zip(params, raw)]
    extrapolated = richardson_limit(params, scaled)
    predicted = None
    if p == 2.0 and _is_product_body(body):
        predicted = _product_entire_limit_p2(body, [a / 2.0 for a in alphas])
    gap_ref = predicted if predicted is not None else extrapolated
    rel_gap = abs(scaled[-1] - gap_ref) / abs(gap_ref)
    return ScanResult("point", tuple(params), tuple(raw), tuple(scaled), kappa,
                      extrapolated, predicted, rel_gap,
                      low_confidence=len(params) < 3,
                      diagnostics={"p": p, "alphas": alphas, "betas": betas,
                                   "body": body.kind, "flagged_points": failures})


def ball_limit_scan(lam: float, p: float, m: int, n_max: int, *, step: int = 2,
                    restarts: int = 8, seed: int = 0,
                    max_iter: int = 3000) -> ScanResult:
    """Scaled ball constants n^(-(m + 2 lam)/p) N(total degree n, radial weight).

    Computed through the interval reduction (the ball point constant equals
    the interval endpoint constant with Gegenbauer parameter lam + (m-1)/2,
    times a fixed factor), which the reduction checks validate separately.
    For p = 2 the closed form is used directly.
    """
    if m not in (1, 2, 3):
        raise ValueError("supported for m in {1, 2, 3}")
    kappa = (m + 2.0 * lam) / p
    factor = reduction_constants(m, p, lam).interval_factor
    lam_line = lam + (m - 1.0) / 2.0
    weight_line = WeightSpec.gegenbauer_interval(lam_line)
    params, raw = [], []
    failures = 0
    for n in _grid(n_max, step):
        if p == 2.0:
            val = exact_ball_p2(n, m, lam)
        else:
            res = sharp_constant_general_p(
                interval_exponents(n), weight_line, np.array([1.0]), p,
                restarts=restarts, seed=seed, max_iter=max_iter)
            val = factor * res.value
            failures += int(res.diagnostics.get("flagged", False))
        params.append(float(n))
        raw.append(val)
    scaled = [r * n ** (-kappa) for n, r in zip(params, raw)]
    extrapolated = richardson_limit(params, scaled)
    predicted = None
    if p == 2.0:
        predicted = (reduction_constants(m, p, lam).entire_ball_factor
                     * exact_entire_p2(m, lam))
    gap_ref = predicted if predicted is not None else extrapolated
    rel_gap = abs(scaled[-1] - gap_ref) / abs(gap_ref)
    return ScanResult("ball", tuple(params), tuple(raw), tuple(scaled), kappa,
                      extrapolated, predicted, rel_gap,
                      low_confidence=len(params) < 3,
                      diagnostics={"p": p, "lam": lam, "m": m,
                                   "flagged_points": failures})


def scaled_ball_limit(m: int, lam: float) -> float:
    """Analytic limit of n^(-(m+2 lam)/2) times the p=2 ball constant:
    the gamma ratio in the closed form grows like n^(2 lam + m - 1), leaving
    (2 / (2^(2 lam + m - 1) pi^((m-1)/2) (2 lam + m)
     Gamma(lam + 1/2) Gamma(lam + m/2)))^(1/2).
    """
    ln = (math.log(2.0) - (2.0 * lam + m - 1.0) * math.log(2.0)
          - 0.5 * (m - 1.0) * math.log(math.pi) - math.log(2.0 * lam + m)
          - gammaln(lam + 0.5) - gammaln(lam + m / 2.0))
    return math.exp(0.5 * ln)


@dataclass(frozen=True)
class ChainReport:
    """Closed-form limit identity check for the ball family at p = 2."""

    analytic_residual: float
    numeric_gap: float
    limit: float
    scaled_product: float

    @property
    def residual(self) -> float:
        return self.analytic_residual


def chain_check(m: int, lam: float, p: float = 2.0,
                n_numeric: int = 10**6) -> ChainReport:
    """Residual of lim n^(-(m+2 lam)/2) ball constant = factor * entire constant.

    Both ends are closed forms at p = 2, so the analytic residual is pure
    formula transcription error.  The numeric gap reports how far the scaled
    constant still sits from the limit at n = n_numeric (order 1/n).
    """
    if p != 2.0:
        raise ValueError("the chain is closed-form only at p = 2")
    lhs = scaled_ball_limit(m, lam)
    rhs = reduction_constants(m, 2.0, lam).entire_ball_factor * exact_entire_p2(m, lam)
    analytic_residual = abs(lhs - rhs) / rhs
    s_n = float(n_numeric) ** (-(m + 2.0 * lam) / 2.0) * exact_ball_p2(n_numeric, m, lam)
    numeric_gap = abs(s_n - lhs) / lhs
    return ChainReport(analytic_residual, numeric_gap, rhs, s_n)


def substitution_gap_check(tau: float, alphas: Sequence[float],
                           betas: Sequence[float], trials: int,
                           seed: int = 0) -> float:
    """Worst signed violation of the two-sided trigonometric substitution bound.

    For v in [-pi/2, pi/2]^m the gap
        prod |v_j|^a_j - prod |sin v_j|^a_j (tau^2 cos^2 v_j + 1 - tau^2)^b_j cos v_j
    must lie between 0 and C prod |v_j|^a_j sum v_j^2 with
    C = max(1, a_j, 2 b_j + 1).  Returns the largest amount by which either
    side fails over `trials` uniform samples (<= 0 when both hold).
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    m = len(alphas)
    rng = np.random.default_rng(seed)
    V = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size=(trials, m))
    absV = np.abs(V)
    lead = np.prod(absV ** alphas[None, :], axis=1)
    sub = np.prod(
        np.abs(np.sin(V)) ** alphas[None, :]
        * (tau**2 * np.cos(V) ** 2 + 1.0 - tau**2) ** betas[None, :]
        * np.cos(V),
        axis=1,
    )
    gap = lead - sub
    c_bound = max(1.0, float(alphas.max(initial=0.0)),
                  float((2.0 * betas + 1.0).max(initial=0.0)))
    bound = c_bound * lead * (V * V).sum(axis=1)
    lower_violation = float((-gap).max(initial=0.0))
    upper_violation = float((gap - bound).max(initial=0.0))
    return max(lower_violation, upper_violation)
