"""Sharp constants of pointwise and uniform weighted polynomial inequalities.

Two engines: at p = 2 the point constant is the square root of the
reproducing kernel diagonal of an orthonormal basis, which is exact up to
quadrature roundoff.  For general p >= 1 the constant is found by projected
gradient ascent over the coefficient sphere, with the p-norm constraint
enforced by renormalizing every iterate (the problem is scale invariant, so
renormalization is exact).  Every returned value is a certified lower bound:
it is the ratio achieved by a concrete polynomial.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .geometry import ConvexBody, ExponentSet, lattice_points, total_degree_set
from .polyspace import (
    OrthonormalSystem,
    Polynomial,
    _dict_add,
    _dict_mul,
    _dict_pow,
    orthonormalize,
)
from .quadrature import QuadratureRule, WeightSpec, ball_rule, cube_rule, interval_rule

__all__ = [
    "SUP",
    "SharpConstResult",
    "ReductionConstants",
    "sharp_constant_p2_at_point",
    "sharp_constant_general_p",
    "exact_interval_p2",
    "exact_ball_p2",
    "exact_entire_p2",
    "reduction_constants",
    "cube_reduction_check",
    "ball_reduction_check",
    "haar_symmetrize_axis",
    "interval_exponents",
    "ratio_at",
    "norm_rule_for",
]


class _SupMode:
    """Sentinel selecting maximization of the point constant over the domain."""

    def __repr__(self) -> str:
        return "SUP"


SUP = _SupMode()


def _env_float(name: str, default: float) -> float:
    return float(os.environ.get(name, default))


def _env_int(name: str, default: int) -> int:
    return int(os.environ.get(name, default))


# Oversampling policy for p that is not an even integer: |P|^p is not a
# polynomial, so rules carry degree NORM_MULT * deg + NORM_ADD, floored per
# dimension, and results are spot checked by node doubling.  Gauss rules
# converge only quadratically in the node count on the |P| kinks, so this is
# the accuracy bottleneck of the whole artifact.
NORM_MULT = _env_int("NIKOLSKII_NORM_MULT", 4)
NORM_ADD = _env_int("NIKOLSKII_NORM_ADD", 40)
PNORM_MIN_DEGREE = {
    1: _env_int("NIKOLSKII_PNORM_MIN_DEGREE_1D", 800),
    2: _env_int("NIKOLSKII_PNORM_MIN_DEGREE_2D", 360),
    3: _env_int("NIKOLSKII_PNORM_MIN_DEGREE_3D", 120),
}
SPREAD_TOL = _env_float("NIKOLSKII_SPREAD_TOL", 1e-6)
OPT_TOL = _env_float("NIKOLSKII_OPT_TOL", 1e-13)


@dataclass(frozen=True)
class SharpConstResult:
    """A sharp-constant value with its extremizer and solver diagnostics.

    The extremizer is normalized to unit weighted p-norm, so its value at the
    maximizer equals `value` and any caller-supplied polynomial certifies at
    most this ratio.
    """

    value: float
    extremizer: Polynomial
    maximizer: tuple[float, ...]
    diagnostics: dict

    def to_json(self) -> str:
        d = {
            "value": self.value,
            "maximizer": list(self.maximizer),
            "diagnostics": self.diagnostics,
            "extremizer": json.loads(self.extremizer.to_json()),
        }
        return json.dumps(d)


def interval_exponents(n: int) -> ExponentSet:
    """Univariate exponent set {0, ..., n}."""
    return lattice_points(ConvexBody.cube(1.0, 1), float(n))


# ---------------------------------------------------------------------------
# rules and cached orthonormal systems
# ---------------------------------------------------------------------------

def _is_even_integer(p: float) -> bool:
    return p == int(p) and int(p) % 2 == 0


def _policy_degree(base: int, p: float, m: int) -> int:
    if _is_even_integer(p):
        return max(2 * base, int(p) * base)
    return max(2 * base, NORM_MULT * base + NORM_ADD, PNORM_MIN_DEGREE[min(m, 3)])


def norm_rule_for(exponent_set: ExponentSet, weight: WeightSpec, p: float) -> QuadratureRule:
    """Rule exact for the Gram matrix and adequate for the p-norm policy."""
    if weight.kind == "gegenbauer_interval":
        deg = _policy_degree(exponent_set.max_total_degree(), p, 1)
        return interval_rule(0.0, weight.lam - 0.5, deg)
    if weight.kind == "coordinate_product":
        m = exponent_set.m
        degs = [_policy_degree(k, p, m) for k in exponent_set.max_degrees()]
        return cube_rule(weight.alphas, weight.betas, degs)
    if weight.kind == "ball_radial":
        deg = _policy_degree(exponent_set.max_total_degree(), p, weight.m)
        return ball_rule(weight.m, weight.lam, max(deg, 2))
    raise ValueError(f"no quadrature domain for weight kind {weight.kind}")


_SYSTEM_CACHE: dict = {}


def _system_for(exponent_set: ExponentSet, weight: WeightSpec,
                rule: QuadratureRule) -> OrthonormalSystem:
    key = (exponent_set.exponents, weight, rule.exact_degree, len(rule))
    sys = _SYSTEM_CACHE.get(key)
    if sys is None:
        sys = orthonormalize(exponent_set, weight, rule)
        if len(_SYSTEM_CACHE) > 256:
            _SYSTEM_CACHE.clear()
        _SYSTEM_CACHE[key] = sys
    return sys


# ---------------------------------------------------------------------------
# p = 2: reproducing kernel diagonal
# ---------------------------------------------------------------------------

def sharp_constant_p2_at_point(exponent_set: ExponentSet, weight: WeightSpec,
                               x0: Sequence[float],
                               rule: QuadratureRule | None = None) -> SharpConstResult:
    """Point constant at p = 2 from the kernel diagonal of an orthonormal basis.

    The square of the constant is sum_k phi_k(x0)^2 for any orthonormal basis
    of the space, and the normalized kernel section attains it.
    """
    if rule is None:
        rule = norm_rule_for(exponent_set, weight, 2.0)
    system = _system_for(exponent_set, weight, rule)
    x0 = np.asarray(x0, dtype=float).reshape(1, -1)
    phi0 = system.eval_all(x0)[0]
    k_diag = float(phi0 @ phi0)
    value = math.sqrt(k_diag)
    coeffs = phi0 / value if value > 0 else phi0
    extremizer = Polynomial(system.exponents, coeffs, system=system)
    return SharpConstResult(
        value=value,
        extremizer=extremizer,
        maximizer=tuple(float(v) for v in x0[0]),
        diagnostics={
            "method": "kernel",
            "p": 2.0,
            "quadrature_degree": rule.exact_degree,
            "gram_residual": system.gram_residual,
            "restarts": 0,
            "iterations": 0,
            "first_order_residual": 0.0,
        },
    )


# ---------------------------------------------------------------------------
# general p: projected gradient ascent with renormalization
# ---------------------------------------------------------------------------

def _pga_stage(Phi: np.ndarray, w: np.ndarray, phi0: np.ndarray, p: float,
               c: np.ndarray, max_iter: int, tol: float, eps: float):
    """One ascent stage of max (phi0 . c) / ||Phi c||_{p,w,eps}.

    ||v||_{p,w,eps} uses the softened modulus sqrt(v^2 + eps^2), which keeps
    the objective differentiable; eps = 0 is the true norm.  Iterates stay on
    the unit sphere of that norm by renormalization.  Steps follow a
    Barzilai-Borwein estimate guarded by a halving line search, so every
    accepted step increases the objective.
    """

    def pnorm(v):
        if eps == 0.0:
            return float((w @ np.abs(v) ** p) ** (1.0 / p))
        return float((w @ (v * v + eps * eps) ** (p / 2.0)) ** (1.0 / p))

    c = np.asarray(c, dtype=float).copy()
    v = Phi @ c
    nv = pnorm(v)
    if nv == 0.0 or not np.isfinite(nv):
        return None
    c /= nv
    v /= nv
    val = float(phi0 @ c)
    if val < 0:
        c, v, val = -c, -v, -val
    step = 1.0
    c_old = None
    g_old = None
    patience = 0
    iters = 0
    for it in range(max_iter):
        iters = it + 1
        if eps == 0.0:
            u = w * np.sign(v) * np.abs(v) ** (p - 1.0)
        else:
            u = w * v * (v * v + eps * eps) ** (p / 2.0 - 1.0)
        n_vec = Phi.T @ u                 # gradient of the (softened) norm
        g = phi0 - val * n_vec            # ascent direction of the ratio
        if c_old is not None:
            dc = c - c_old
            dg = g - g_old
            denom = -(dc @ dg)
            if denom > 0:
                bb = float((dc @ dc) / denom)
                if math.isfinite(bb) and bb > 0:
                    step = min(max(bb, 1e-13), 1e8)
        c_old, g_old = c, g
        s = step
        accepted = False
        for _ in range(60):
            trial = c + s * g
            tv = Phi @ trial
            tn = pnorm(tv)
            if tn > 0 and np.isfinite(tn):
                tval = float(phi0 @ trial) / tn
                if tval > val:
                    c = trial / tn
                    v = tv / tn
                    gain = tval - val
                    val = tval
                    accepted = True
                    break
            s *= 0.5
        if not accepted:
            break
        patience = patience + 1 if gain <= tol * max(1.0, val) else 0
        if patience >= 6:
            break
    return c, val, iters


def _pga_run(Phi: np.ndarray, w: np.ndarray, phi0: np.ndarray, p: float,
             c0: np.ndarray, max_iter: int, tol: float):
    """Full ascent from one start: smoothing continuation, then the true norm.

    For even integer p the objective is smooth and a single exact stage
    suffices.  Otherwise |v| carries kinks that stall monotone ascent, so the
    modulus is softened and the softening is ramped down before the final
    exact stage.
    """
    if _is_even_integer(p):
        eps_schedule = [0.0]
    else:
        eps_schedule = [1e-2, 1e-3, 1e-5, 1e-7, 0.0]
    c = np.asarray(c0, dtype=float).copy()
    total = 0
    out = None
    for eps in eps_schedule:
        budget = max(max_iter // len(eps_schedule), 50)
        out = _pga_stage(Phi, w, phi0, p, c, budget, tol, eps)
        if out is None:
            return None
        c, _, iters = out
        total += iters
    c, val, _ = out
    # renormalize against the true norm and report the exact ratio
    v = Phi @ c
    nv = float((w @ np.abs(v) ** p) ** (1.0 / p))
    c /= nv
    v /= nv
    val = float(phi0 @ c)
    if val < 0:
        c, v, val = -c, -v, -val
    # first-order residual: gradient projected on the tangent of the p-sphere
    u = w * np.sign(v) * np.abs(v) ** (p - 1.0)
    n_vec = Phi.T @ u
    g = phi0 - val * n_vec
    nn = float(n_vec @ n_vec)
    g_t = g - ((g @ n_vec) / nn) * n_vec if nn > 0 else g
    residual = float(np.linalg.norm(g_t)) / max(1.0, val)
    return c, val, total, residual


def _even_reduce(exponent_set: ExponentSet, x0: np.ndarray) -> ExponentSet:
    """Drop basis monomials that are odd in a coordinate where x0 vanishes.

    The weights here are even in every coordinate, so averaging a polynomial
    over sign flips of those coordinates fixes its value at x0 and does not
    increase any weighted p-norm: the extremizer can be taken from the
    reduced space, and the sharp constant is unchanged.
    """
    dead = [j for j in range(exponent_set.m) if x0[j] == 0.0]
    if not dead:
        return exponent_set
    kept = tuple(k for k in exponent_set.exponents
                 if all(k[j] % 2 == 0 for j in dead))
    if len(kept) == len(exponent_set):
        return exponent_set
    return ExponentSet(exponent_set.m, exponent_set.a, exponent_set.even_only, kept)


def _point_constant_general(exponent_set: ExponentSet, weight: WeightSpec,
                            x0: np.ndarray, p: float, rule: QuadratureRule,
                            restarts: int, seed: int, max_iter: int,
                            tol: float) -> SharpConstResult:
    exponent_set = _even_reduce(exponent_set, x0)
    system = _system_for(exponent_set, weight, rule)
    Phi = system.eval_all(rule.nodes)
    w = rule.weights
    phi0 = system.eval_all(x0.reshape(1, -1))[0]
    D = len(phi0)

    rng = np.random.default_rng(seed)
    starts = [phi0.copy()]
    for _ in range(max(restarts - 1, 0)):
        starts.append(rng.standard_normal(D))

    best = None
    values = []
    total_iters = 0
    for c0 in starts:
        if not np.any(c0):
            continue
        out = _pga_run(Phi, w, phi0, p, c0, max_iter, tol)
        if out is None:
            continue
        c, val, iters, residual = out
        total_iters += iters
        values.append(val)
        if best is None or val > best[1]:
            best = (c, val, residual)
    if best is None:
        raise RuntimeError("optimizer failed from every start")
    c, value, residual = best
    spread = (max(values) - min(values)) / max(values) if len(values) > 1 else 0.0
    extremizer = Polynomial(system.exponents, c, system=system)
    return SharpConstResult(
        value=value,
        extremizer=extremizer,
        maximizer=tuple(float(v) for v in x0),
        diagnostics={
            "method": "pga",
            "p": p,
            "quadrature_degree": rule.exact_degree,
            "gram_residual": system.gram_residual,
            "restarts": len(starts),
            "iterations": total_iters,
            "first_order_residual": residual,
            "restart_spread": spread,
            "flagged": spread > SPREAD_TOL,
        },
    )


def _domain_of(weight: WeightSpec) -> str:
    return weight.domain


def _sup_candidates(domain: str, m: int, p: float, grid: int | None) -> list[np.ndarray]:
    if domain == "interval":
        g = grid or 21
        pts = [np.array([v]) for v in -np.cos(np.pi * np.arange(g) / (g - 1))]
        return [np.array([-1.0]), np.array([1.0])] + pts
    if domain == "cube":
        g = grid or (15 if p == 2.0 else 5)
        verts = [np.array(v, dtype=float)
                 for v in itertools.product((-1.0, 1.0), repeat=m)]
        axis = -np.cos(np.pi * np.arange(g) / (g - 1))
        inner = [np.array(v) for v in itertools.product(axis, repeat=m)]
        return verts + inner
    if domain == "ball":
        g = grid or (33 if p == 2.0 else 12)
        rs = np.linspace(0.0, 1.0, g)
        return [np.concatenate([[r], np.zeros(m - 1)]) for r in rs]
    raise ValueError(f"unknown domain {domain}")


def sharp_constant_general_p(exponent_set: ExponentSet, weight: WeightSpec,
                             x0, p: float, *, rule: QuadratureRule | None = None,
                             restarts: int = 16, seed: int = 0,
                             max_iter: int = 3000, tol: float | None = None,
                             grid: int | None = None) -> SharpConstResult:
    """Sharp constant for p in [1, inf): point mode at x0, or SUP mode.

    Point mode maximizes |P(x0)| over the unit sphere of the weighted p-norm
    by multi-start projected gradient ascent (kernel-section warm start plus
    random restarts).  SUP mode scans the domain: cube vertices and interval
    endpoints first, the first-axis radius for the ball (the weight is
    radial, so the point constant depends on |x0| only), then a grid with
    golden-section refinement.  Ties between maximizer candidates resolve to
    the lexicographically smallest point.
    """
    if p < 1 or p == math.inf:
        raise ValueError("supported range is p in [1, inf); sup norms are the target, not the metric")
    tol = OPT_TOL if tol is None else tol
    if rule is None:
        rule = norm_rule_for(exponent_set, weight, p)
    if not isinstance(x0, _SupMode):
        x0 = np.asarray(x0, dtype=float).reshape(-1)
        if p == 2.0:
            kern = sharp_constant_p2_at_point(exponent_set, weight, x0, rule=rule)
        res = _point_constant_general(exponent_set, weight, x0, p, rule,
                                      restarts, seed, max_iter, tol)
        if p == 2.0 and kern.value > res.value:
            # the kernel value is exact at p = 2; keep the better certificate
            res = SharpConstResult(kern.value, kern.extremizer, kern.maximizer,
                                   {**res.diagnostics, **kern.diagnostics,
                                    "method": "kernel"})
        return res

    # SUP mode: a coarse scan ranks the candidates (boundary-vs-interior
    # margins are far above the scan bias), then the winner is re-solved with
    # the full-accuracy rule and restart budget.
    domain = _domain_of(weight)
    m = weight.m
    candidates = _sup_candidates(domain, m, p, grid)

    if p == 2.0:
        def scan_at(pt: np.ndarray) -> float:
            return sharp_constant_p2_at_point(exponent_set, weight, pt, rule=rule).value
    else:
        from .polyspace import default_rule

        scan_deg = max(4 * exponent_set.max_total_degree() + 16,
                       int(p) * exponent_set.max_total_degree() if _is_even_integer(p) else 0)
        scan_rule = default_rule(exponent_set, weight, degree=scan_deg)

        def scan_at(pt: np.ndarray) -> float:
            return _point_constant_general(exponent_set, weight, pt, p, scan_rule,
                                           2, seed, 800, tol).value

    scanned = [(pt, scan_at(pt)) for pt in candidates]
    best_val = max(v for _, v in scanned)

    # local refinement around the best candidate, one golden pass per axis
    best_pt = max(scanned, key=lambda s: s[1])[0]
    refined = _refine_sup(best_pt, domain, m, lambda q: scan_at(q))
    if refined is not None:
        pt, val = refined
        if val > best_val * (1 + 1e-14):
            scanned.append((pt, val))
            best_val = val

    ties = sorted(tuple(float(v) for v in pt) for pt, v in scanned
                  if v >= best_val * (1.0 - 1e-9))
    maximizer = ties[0]
    if p == 2.0:
        best = sharp_constant_p2_at_point(exponent_set, weight,
                                          np.asarray(maximizer), rule=rule)
    else:
        best = _point_constant_general(exponent_set, weight, np.asarray(maximizer),
                                       p, rule, restarts, seed, max_iter, tol)
    diag = dict(best.diagnostics)
    diag.update({"mode": "sup", "candidates": len(scanned)})
    return SharpConstResult(best.value, best.extremizer, maximizer, diag)


def _refine_sup(best_pt: np.ndarray, domain: str, m: int, value_at):
    """One golden-section sweep near the incumbent; cheap, bounded evals."""
    from .quadrature import _golden_max

    if domain == "interval":
        lo, hi = max(-1.0, best_pt[0] - 0.2), min(1.0, best_pt[0] + 0.2)
        x, v = _golden_max(lambda t: value_at(np.array([t])), lo, hi,
                           tol=1e-7, iters=18)
        return np.array([x]), v
    if domain == "ball":
        r0 = float(np.linalg.norm(best_pt))
        lo, hi = max(0.0, r0 - 0.2), min(1.0, r0 + 0.2)
        r, v = _golden_max(
            lambda t: value_at(np.concatenate([[t], np.zeros(m - 1)])),
            lo, hi, tol=1e-7, iters=18)
        return np.concatenate([[r], np.zeros(m - 1)]), v
    if domain == "cube":
        x = best_pt.copy()
        v = value_at(x)
        for j in range(m):
            lo, hi = max(-1.0, x[j] - 0.2), min(1.0, x[j] + 0.2)

            def along(t, j=j):
                y = x.copy()
                y[j] = t
                return value_at(y)

            xj, vj = _golden_max(along, lo, hi, tol=1e-7, iters=14)
            if vj > v:
                x[j], v = xj, vj
        return x, v
    return None


def ratio_at(P: Polynomial, weight: WeightSpec, x0: Sequence[float], p: float,
             rule: QuadratureRule | None = None,
             exponent_set: ExponentSet | None = None) -> float:
    """|P(x0)| / ||P||_{p,W}; any polynomial certifies a lower bound."""
    from .quadrature import weighted_norm

    if rule is None:
        if exponent_set is None:
            exps = ExponentSet(P.m, float(P.max_total_degree()), False,
                               tuple(sorted(set(P.to_monomial().exponents))))
        else:
            exps = exponent_set
        rule = norm_rule_for(exps, weight, p)
    nrm = weighted_norm(P, rule, p)
    return abs(P(np.asarray(x0, dtype=float))) / nrm


# ---------------------------------------------------------------------------
# closed forms at p = 2
# ---------------------------------------------------------------------------

def exact_interval_p2(n: int, lam: float) -> float:
    """Uniform-vs-L2 sharp constant on [-1,1] with weight (1-u^2)^(lam-1/2):
    ((2 lam + 2n + 1) Gamma(2 lam + n + 1) /
     (2^(2 lam) (2 lam + 1) Gamma(lam + 1/2)^2 n!))^(1/2).
    """
    if n < 0 or lam < 0:
        raise ValueError("need n >= 0 and lam >= 0")
    ln = (math.log(2.0 * lam + 2.0 * n + 1.0) + gammaln(2.0 * lam + n + 1.0)
          - 2.0 * lam * math.log(2.0) - math.log(2.0 * lam + 1.0)
          - 2.0 * gammaln(lam + 0.5) - gammaln(n + 1.0))
    return math.exp(0.5 * ln)


def exact_ball_p2(n: int, m: int, lam: float) -> float:
    """Uniform-vs-L2 sharp constant on the unit ball, weight (1-|x|^2)^(lam-1/2):
    ((2 lam + 2n + m) Gamma(2 lam + n + m) /
     (2^(2 lam + m - 1) pi^((m-1)/2) (2 lam + m)
      Gamma(lam + 1/2) Gamma(lam + m/2) n!))^(1/2).
    """
    if n < 0 or m < 1 or lam < 0:
        raise ValueError("need n >= 0, m >= 1 and lam >= 0")
    ln = (math.log(2.0 * lam + 2.0 * n + m) + gammaln(2.0 * lam + n + m)
          - (2.0 * lam + m - 1.0) * math.log(2.0)
          - 0.5 * (m - 1.0) * math.log(math.pi)
          - math.log(2.0 * lam + m)
          - gammaln(lam + 0.5) - gammaln(lam + m / 2.0) - gammaln(n + 1.0))
    return math.exp(0.5 * ln)


def exact_entire_p2(m: int, lam: float) -> float:
    """Point constant of the L2(|t|^(2 lam)) class of spherical exponential
    type one: (Gamma(m/2) / (2^(2 lam + m - 1) pi^(m/2) (2 lam + m)
    Gamma(lam + m/2)^2))^(1/2).
    """
    if m < 1 or lam < 0:
        raise ValueError("need m >= 1 and lam >= 0")
    ln = (gammaln(m / 2.0) - (2.0 * lam + m - 1.0) * math.log(2.0)
          - 0.5 * m * math.log(math.pi) - math.log(2.0 * lam + m)
          - 2.0 * gammaln(lam + m / 2.0))
    return math.exp(0.5 * ln)


@dataclass(frozen=True)
class ReductionConstants:
    """The five scaling factors tying ball, disk, interval and line constants.

    even_line_factor scales the even-entire-line constant into the ball
    limit; entire_ball_factor scales the m-dimensional entire constant;
    disk_factor reduces the ball to the half-plane-symmetric disk;
    line_factor reduces m-dimensional entire classes to the line;
    interval_factor reduces the ball point constant to the interval endpoint
    constant.  Internally consistent: even_line_factor = 2^(1/p) *
    interval_factor and entire_ball_factor = even_line_factor / line_factor.
    """

    even_line_factor: float
    entire_ball_factor: float
    disk_factor: float
    line_factor: float
    interval_factor: float


def reduction_constants(m: int, p: float, lam: float) -> ReductionConstants:
    if m < 1 or p < 1 or lam < 0:
        raise ValueError("need m >= 1, p >= 1 and lam >= 0")
    a1 = (2.0 * math.exp(gammaln(lam + m / 2.0) - gammaln(lam + 0.5))
          / math.pi ** ((m - 1.0) / 2.0)) ** (1.0 / p)
    a2 = (2.0 * math.sqrt(math.pi)
          * math.exp(gammaln(lam + m / 2.0) - gammaln(m / 2.0) - gammaln(lam + 0.5))
          ) ** (1.0 / p)
    c17 = math.inf if m == 1 else (
        math.exp(gammaln((m - 1.0) / 2.0)) / math.pi ** ((m - 1.0) / 2.0)) ** (1.0 / p)
    c18 = (math.exp(gammaln(m / 2.0)) / math.pi ** (m / 2.0)) ** (1.0 / p)
    c19 = (math.exp(gammaln(lam + m / 2.0) - gammaln(lam + 0.5))
           / math.pi ** ((m - 1.0) / 2.0)) ** (1.0 / p)
    assert math.isclose(a1, 2.0 ** (1.0 / p) * c19, rel_tol=1e-12)
    assert math.isclose(a2, a1 / c18, rel_tol=1e-12)
    return ReductionConstants(a1, a2, c17, c18, c19)


# ---------------------------------------------------------------------------
# reduction identities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReductionReport:
    lhs: float
    rhs: float
    residual: float
    space_identity_ok: bool
    diagnostics: dict


def _even_space_identity(body: ConvexBody, a: float) -> bool:
    """The even sublattice of the doubled body is exactly the doubled lattice,
    and the substitution x_j = 1 - 2 t_j^2 maps the small space onto it."""
    E = lattice_points(body, a)
    E2 = lattice_points(body, 2.0 * a, even_only=True)
    doubled = {tuple(2 * v for v in k) for k in E}
    if doubled != set(E2.exponents):
        return False
    m = body.m
    # expand each substituted monomial and confirm containment plus full rank
    sub = {tuple(0 for _ in range(m)): 1.0}
    factors = []
    for j in range(m):
        d = {tuple(0 for _ in range(m)): 1.0,
             tuple(2 if i == j else 0 for i in range(m)): -2.0}
        factors.append(d)
    index = {k: i for i, k in enumerate(E2.exponents)}
    M = np.zeros((len(E2), len(E)))
    for col, k in enumerate(E.exponents):
        acc = {tuple(0 for _ in range(m)): 1.0}
        for j, kj in enumerate(k):
            acc = _dict_mul(acc, _dict_pow(factors[j], kj, m))
        for kk, c in acc.items():
            if kk not in index:
                return False
            M[index[kk], col] = c
    return np.linalg.matrix_rank(M) == len(E)


def cube_reduction_check(body: ConvexBody, a: float, lambdas: Sequence[float],
                         p: float, *, restarts: int = 16, seed: int = 0,
                         max_iter: int = 3000) -> ReductionReport:
    """Vertex constant of the small space against the origin constant of the
    doubled even space, scaled by 4^(-sum lam_j / p); returns the relative
    residual of the identity plus the space-identity verdict.
    """
    lambdas = tuple(float(v) for v in lambdas)
    m = body.m
    if len(lambdas) != m:
        raise ValueError("one lambda per axis")
    E = lattice_points(body, a)
    E2 = lattice_points(body, 2.0 * a, even_only=True)
    w_lhs = WeightSpec.coordinate_product([0.0] * m, [v - 0.5 for v in lambdas])
    w_rhs = WeightSpec.coordinate_product([2.0 * v for v in lambdas],
                                          [v - 0.5 for v in lambdas])
    ones = np.ones(m)
    zero = np.zeros(m)
    scale = 4.0 ** (-sum(lambdas) / p)
    if p == 2.0:
        lhs = sharp_constant_p2_at_point(E, w_lhs, ones).value
        rhs = scale * sharp_constant_p2_at_point(E2, w_rhs, zero).value
        method = "kernel"
    else:
        lhs = sharp_constant_general_p(E, w_lhs, ones, p, restarts=restarts,
                                       seed=seed, max_iter=max_iter).value
        rhs = scale * sharp_constant_general_p(E2, w_rhs, zero, p,
                                               restarts=restarts, seed=seed,
                                               max_iter=max_iter).value
        method = "pga"
    residual = abs(lhs - rhs) / max(lhs, rhs)
    ok = _even_space_identity(body, a)
    return ReductionReport(lhs, rhs, residual, ok,
                           {"method": method, "a": a, "lambdas": lambdas, "p": p,
                            "dim_lhs": len(E), "dim_rhs": len(E2)})


def ball_reduction_check(n: int, m: int, lam: float, p: float, *,
                         restarts: int = 16, seed: int = 0,
                         max_iter: int = 3000) -> ReductionReport:
    """Ball point constant at (1, 0, ..., 0) against the scaled interval
    endpoint constant with Gegenbauer parameter lam + (m-1)/2."""
    if m not in (1, 2, 3):
        raise ValueError("supported for m in {1, 2, 3}")
    factor = reduction_constants(m, p, lam).interval_factor
    lam_line = lam + (m - 1.0) / 2.0
    if p == 2.0:
        lhs = exact_ball_p2(n, m, lam)
        rhs = factor * exact_interval_p2(n, lam_line)
        method = "closed-form"
    else:
        e1 = np.zeros(m)
        e1[0] = 1.0
        lhs = sharp_constant_general_p(
            total_degree_set(n, m), WeightSpec.ball_radial(m, lam), e1, p,
            restarts=restarts, seed=seed, max_iter=max_iter).value
        rhs = factor * sharp_constant_general_p(
            interval_exponents(n), WeightSpec.gegenbauer_interval(lam_line),
            np.array([1.0]), p, restarts=restarts, seed=seed,
            max_iter=max_iter).value
        method = "pga"
    residual = abs(lhs - rhs) / max(lhs, rhs)
    return ReductionReport(lhs, rhs, residual, True,
                           {"method": method, "n": n, "m": m, "lam": lam, "p": p})


# ---------------------------------------------------------------------------
# Haar averaging over rotations fixing the first axis
# ---------------------------------------------------------------------------

def haar_symmetrize_axis(P: Polynomial, angular_nodes: int | None = None) -> Polynomial:
    """Average of P over rotations that fix the x1-axis.

    m=2 averages over the reflection x2 -> -x2.  m=3 averages over rotations
    of the (x2, x3) plane with a trapezoid rule whose node count exceeds the
    polynomial degree, which makes the average exact.  The output depends on
    x1 and x2^2 + ... + x_m^2 only, and its pointwise ratio against any
    rotation-invariant weight never drops at points on the fixed axis.
    """
    m = P.m
    d = P.as_dict()
    if m == 2:
        kept = {k: c for k, c in d.items() if k[1] % 2 == 0}
        return Polynomial.from_dict(kept, m=2)
    if m != 3:
        raise ValueError("implemented for m in {2, 3}")
    deg = P.max_total_degree()
    K = angular_nodes or (deg + 2)
    if K <= deg:
        raise ValueError("angular node count must exceed the degree for exactness")
    acc: dict = {}
    for idx in range(K):
        phi = 2.0 * math.pi * idx / K
        cph, sph = math.cos(phi), math.sin(phi)
        rot: dict = {}
        for k, c in d.items():
            a, b, cc = k
            # (c x2 - s x3)^b (s x2 + c x3)^cc expanded over the binomials
            term: dict = {}
            for i in range(b + 1):
                for j in range(cc + 1):
                    coef = (math.comb(b, i) * math.comb(cc, j)
                            * (cph ** i) * ((-sph) ** (b - i))
                            * (sph ** j) * (cph ** (cc - j)))
                    if coef == 0.0:
                        continue
                    kk = (a, i + j, (b - i) + (cc - j))
                    term[kk] = term.get(kk, 0.0) + c * coef
            rot = _dict_add(rot, term)
        acc = _dict_add(acc, rot, scale=1.0 / K)
    acc = {k: c for k, c in acc.items() if abs(c) > 1e-15}
    return Polynomial.from_dict(acc, m=3)
