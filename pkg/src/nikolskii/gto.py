"""Generalized translation operators diagonalized by Gegenbauer-type systems.

Four kinds, each an average of the input function over a probability
measure:

  interval_gegenbauer  f -> int f(t x + s sqrt(1-t^2) sqrt(1-x^2)) dmu(s)
                       with dmu = (1-s^2)^(lam-1) ds normalized for lam > 0,
                       and the two-atom measure at +-1 for lam = 0
  cube_product         the per-coordinate tensor composition of the above
  ball_chebyshev       average over the unit sphere of
                       f(t x + sqrt(1-t^2) s D(x) H(x))
  ball_gegenbauer      the same map averaged over the ball against
                       (1-|s|^2)^(lam-1), lam > 0

D(x) is diagonal with entries (sqrt(1-|x|^2), 1, ..., 1) and H(x) is an
orthogonal matrix whose first row is x/|x| (Householder built; H(0) is the
identity, any choice is valid there by rotation invariance of the measure).
All four contract every weighted p-norm of their natural weight and map the
polynomial space into itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln, roots_jacobi

from .geometry import ExponentSet
from .polyspace import OrthonormalSystem, Polynomial, monomial_values, orthonormalize
from .quadrature import QuadratureRule, WeightSpec, ball_rule

__all__ = [
    "GtoSpec",
    "GtoMatrix",
    "apply_interval",
    "apply_cube",
    "apply_ball",
    "gto_matrix",
    "contraction_check",
    "interval_measure_mass",
    "householder_row",
]

_KINDS = ("interval_gegenbauer", "cube_product", "ball_chebyshev", "ball_gegenbauer")


def _c_interval(lam: float) -> float:
    """Mass of (1-s^2)^(lam-1) on [-1,1]: sqrt(pi) Gamma(lam) / Gamma(lam+1/2)."""
    return math.exp(0.5 * math.log(math.pi) + gammaln(lam) - gammaln(lam + 0.5))


def _c_sphere(m: int) -> float:
    """Surface area of the unit sphere: 2 pi^(m/2) / Gamma(m/2)."""
    return 2.0 * math.pi ** (m / 2.0) / math.exp(gammaln(m / 2.0))


def _c_ball(m: int, lam: float) -> float:
    """Mass of (1-|s|^2)^(lam-1) on the ball: pi^(m/2) Gamma(lam)/Gamma(lam+m/2)."""
    return math.exp(0.5 * m * math.log(math.pi) + gammaln(lam) - gammaln(lam + m / 2.0))


@dataclass(frozen=True)
class GtoSpec:
    """Kind, parameters and inner quadrature resolution of one operator."""

    kind: str
    m: int = 1
    lam: float = 0.0
    lam_vec: tuple[float, ...] = ()
    inner_degree: int = 64

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.kind == "interval_gegenbauer":
            if self.lam < 0:
                raise ValueError("interval kind needs lam >= 0")
        elif self.kind == "cube_product":
            if len(self.lam_vec) != self.m or any(v < 0 for v in self.lam_vec):
                raise ValueError("cube kind needs one lam >= 0 per axis")
        elif self.kind == "ball_chebyshev":
            if self.m < 2:
                raise ValueError("ball kinds need m >= 2")
        elif self.kind == "ball_gegenbauer":
            if self.m < 2 or not self.lam > 0:
                raise ValueError("ball_gegenbauer needs m >= 2 and lam > 0")

    @staticmethod
    def interval(lam: float, inner_degree: int = 64) -> "GtoSpec":
        return GtoSpec("interval_gegenbauer", 1, lam=float(lam),
                       inner_degree=inner_degree)

    @staticmethod
    def cube(lam_vec: Sequence[float], inner_degree: int = 64) -> "GtoSpec":
        lam_vec = tuple(float(v) for v in lam_vec)
        return GtoSpec("cube_product", len(lam_vec), lam_vec=lam_vec,
                       inner_degree=inner_degree)

    @staticmethod
    def ball_chebyshev(m: int, inner_degree: int = 64) -> "GtoSpec":
        return GtoSpec("ball_chebyshev", m, inner_degree=inner_degree)

    @staticmethod
    def ball_gegenbauer(m: int, lam: float, inner_degree: int = 64) -> "GtoSpec":
        return GtoSpec("ball_gegenbauer", m, lam=float(lam),
                       inner_degree=inner_degree)

    def natural_weight(self) -> WeightSpec:
        """The weight whose p-norms the operator contracts."""
        if self.kind == "interval_gegenbauer":
            return WeightSpec.gegenbauer_interval(self.lam)
        if self.kind == "cube_product":
            return WeightSpec.coordinate_product(
                [0.0] * self.m, [v - 0.5 for v in self.lam_vec])
        if self.kind == "ball_chebyshev":
            return WeightSpec.ball_radial(self.m, 0.0)
        return WeightSpec.ball_radial(self.m, self.lam)


def _interval_measure(lam: float, inner_degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/probability-weights of the inner interval measure."""
    if lam == 0.0:
        return np.array([-1.0, 1.0]), np.array([0.5, 0.5])
    k = inner_degree // 2 + 1
    s, w = roots_jacobi(k, lam - 1.0, lam - 1.0)
    return s, w / _c_interval(lam)


def _sphere_measure(m: int, inner_degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/probability-weights of the uniform measure on the unit sphere."""
    K = inner_degree + 1
    if K % 2 == 1:
        K += 1
    if m == 2:
        phi = 2.0 * np.pi * np.arange(K) / K
        nodes = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        return nodes, np.full(K, 1.0 / K)
    if m == 3:
        kz = inner_degree // 2 + 1
        z, wz = roots_jacobi(kz, 0.0, 0.0)
        phi = 2.0 * np.pi * np.arange(K) / K
        rho = np.sqrt(1.0 - z * z)
        nodes = np.concatenate([
            np.stack([rho[i] * np.cos(phi), rho[i] * np.sin(phi),
                      np.full(K, z[i])], axis=1)
            for i in range(kz)
        ])
        weights = np.concatenate([np.full(K, wz[i] / (2.0 * K)) for i in range(kz)])
        return nodes, weights
    raise ValueError("sphere measures implemented for m in {2, 3}")


def _ball_measure(m: int, lam: float, inner_degree: int) -> tuple[np.ndarray, np.ndarray]:
    rule = ball_rule(m, lam - 0.5, inner_degree)
    return rule.nodes, rule.weights / _c_ball(m, lam)


def _measure_of(spec: GtoSpec):
    if spec.kind == "interval_gegenbauer":
        return _interval_measure(spec.lam, spec.inner_degree)
    if spec.kind == "ball_chebyshev":
        return _sphere_measure(spec.m, spec.inner_degree)
    if spec.kind == "ball_gegenbauer":
        return _ball_measure(spec.m, spec.lam, spec.inner_degree)
    raise ValueError("cube kind uses per-axis interval measures")


def interval_measure_mass(spec: GtoSpec) -> float:
    """Total mass of the inner measure; must be 1 within 1e-12."""
    if spec.kind == "cube_product":
        total = 1.0
        for lam in spec.lam_vec:
            _, w = _interval_measure(lam, spec.inner_degree)
            total *= float(w.sum())
        return total
    _, w = _measure_of(spec)
    return float(w.sum())


def householder_row(u: np.ndarray) -> np.ndarray:
    """Orthogonal matrix whose first row is the unit vector u.

    Householder reflection through u - e1; symmetric, so the first row and
    first column both equal u.  Returns the identity when u is within
    roundoff of e1.
    """
    m = len(u)
    v = u.copy()
    v[0] -= 1.0
    nv = float(v @ v)
    if nv < 1e-28:
        return np.eye(m)
    return np.eye(m) - 2.0 * np.outer(v, v) / nv


def _eval_vec(f, points: np.ndarray) -> np.ndarray:
    if hasattr(f, "eval_many"):
        return f.eval_many(points)
    try:
        out = f(points if points.shape[1] > 1 else points[:, 0])
        out = np.asarray(out, dtype=float)
        if out.shape == (points.shape[0],):
            return out
    except Exception:
        pass
    if points.shape[1] == 1:
        return np.asarray([f(x[0]) for x in points], dtype=float)
    return np.asarray([f(x) for x in points], dtype=float)


def apply_interval(spec: GtoSpec, f, t: float, x: float) -> float:
    """Average of f(t x + s sqrt(1-t^2) sqrt(1-x^2)) over the inner measure."""
    if spec.kind != "interval_gegenbauer":
        raise ValueError("spec is not the interval kind")
    s, w = _interval_measure(spec.lam, spec.inner_degree)
    amp = math.sqrt(max(0.0, 1.0 - t * t)) * math.sqrt(max(0.0, 1.0 - x * x))
    args = (t * x + s * amp).reshape(-1, 1)
    return float(w @ _eval_vec(f, args))


def apply_cube(spec: GtoSpec, f, t: Sequence[float], x: Sequence[float]) -> float:
    """Tensor composition of the interval operator, one factor per axis."""
    if spec.kind != "cube_product":
        raise ValueError("spec is not the cube kind")
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if t.shape != (spec.m,) or x.shape != (spec.m,):
        raise ValueError("t and x must be m-vectors")
    axes = [_interval_measure(lam, spec.inner_degree) for lam in spec.lam_vec]
    grids = np.meshgrid(*(a[0] for a in axes), indexing="ij")
    weights = np.ones(grids[0].size)
    for wj in np.meshgrid(*(a[1] for a in axes), indexing="ij"):
        weights = weights * wj.ravel()
    pts = np.empty((grids[0].size, spec.m))
    for j in range(spec.m):
        amp = math.sqrt(max(0.0, (1.0 - t[j] ** 2) * (1.0 - x[j] ** 2)))
        pts[:, j] = t[j] * x[j] + grids[j].ravel() * amp
    return float(weights @ _eval_vec(f, pts))


def _ball_mapped_points(spec: GtoSpec, t: float, x: np.ndarray,
                        S: np.ndarray) -> np.ndarray:
    r = float(np.linalg.norm(x))
    H = householder_row(x / r) if r > 1e-14 else np.eye(spec.m)
    SD = S.copy()
    SD[:, 0] *= math.sqrt(max(0.0, 1.0 - r * r))
    return t * x[None, :] + math.sqrt(max(0.0, 1.0 - t * t)) * (SD @ H)


def apply_ball(spec: GtoSpec, f, t: float, x: Sequence[float]) -> float:
    """Average of f(t x + sqrt(1-t^2) s D(x) H(x)) over the inner measure."""
    if spec.kind not in ("ball_chebyshev", "ball_gegenbauer"):
        raise ValueError("spec is not a ball kind")
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.m,):
        raise ValueError("x must be an m-vector")
    S, w = _measure_of(spec)
    pts = _ball_mapped_points(spec, t, x, S)
    return float(w @ _eval_vec(f, pts))


class _GridMapper:
    """Precomputed geometry for applying one operator at many points at once.

    The mapped argument splits as (t-dependent drift) + (t-dependent scale)
    times a t-independent tensor, so the expensive part (Householder frames,
    inner grids) is built once per (spec, nodes) pair and every subsequent t
    costs only elementwise work.
    """

    def __init__(self, spec: GtoSpec, nodes: np.ndarray):
        self.spec = spec
        self.nodes = nodes
        N, m = nodes.shape
        self.m = m
        if spec.kind in ("interval_gegenbauer", "cube_product"):
            lams = [spec.lam] if spec.kind == "interval_gegenbauer" else list(spec.lam_vec)
            axes = [_interval_measure(lam, spec.inner_degree) for lam in lams]
            grids = np.meshgrid(*(a[0] for a in axes), indexing="ij")
            w = np.ones(grids[0].size)
            for wj in np.meshgrid(*(a[1] for a in axes), indexing="ij"):
                w = w * wj.ravel()
            self.weights = w
            # C[i, k, j] = s_{k,j} sqrt(1 - x_{i,j}^2)
            self.scaled = np.empty((N, grids[0].size, m))
            for j in range(m):
                amp = np.sqrt(np.maximum(0.0, 1.0 - nodes[:, j] ** 2))
                self.scaled[:, :, j] = amp[:, None] * grids[j].ravel()[None, :]
        else:
            S, w = _measure_of(spec)
            self.weights = w
            K = len(S)
            r = np.linalg.norm(nodes, axis=1)
            shrink = np.sqrt(np.maximum(0.0, 1.0 - r * r))
            A = np.broadcast_to(S[None, :, :], (N, K, m)).copy()
            A[:, :, 0] = S[None, :, 0] * shrink[:, None]
            # Householder rows v = x/|x| - e1; zero rows mean H = identity
            V = np.zeros_like(nodes)
            nz = r > 1e-14
            V[nz] = nodes[nz] / r[nz, None]
            V[:, 0] -= 1.0
            V[~nz] = 0.0
            vv = (V * V).sum(axis=1)
            safe = np.maximum(vv, 1e-300)
            dot = np.einsum("ikj,ij->ik", A, V)
            self.scaled = A - (2.0 * dot / safe[:, None])[:, :, None] * V[:, None, :]

    def mapped(self, t) -> np.ndarray:
        """Arguments of the inner integral, shape (n_nodes, n_inner, m)."""
        if self.spec.kind in ("interval_gegenbauer", "cube_product"):
            t = np.atleast_1d(np.asarray(t, dtype=float))
            drift = (t[None, :] * self.nodes)[:, None, :]
            scale = np.sqrt(np.maximum(0.0, 1.0 - t * t))
            return drift + self.scaled * scale[None, None, :]
        t = float(t)
        drift = (t * self.nodes)[:, None, :]
        return drift + math.sqrt(max(0.0, 1.0 - t * t)) * self.scaled


def _mapped_grid(spec: GtoSpec, t, nodes: np.ndarray):
    """Mapped points for every (node, inner-node) pair, plus inner weights."""
    mapper = _GridMapper(spec, nodes)
    return mapper.mapped(t), mapper.weights


def _eval_poly_chunked(points: np.ndarray, exponents, coeffs: np.ndarray,
                       block: int = 200_000) -> np.ndarray:
    """Polynomial values over a huge point cloud without a full basis matrix."""
    out = np.empty(len(points))
    for i0 in range(0, len(points), block):
        chunk = points[i0:i0 + block]
        out[i0:i0 + len(chunk)] = monomial_values(chunk, exponents) @ coeffs
    return out


@dataclass(frozen=True)
class GtoMatrix:
    """Matrix of the operator on the monomial basis of an exponent set."""

    exponents: tuple[tuple[int, ...], ...]
    matrix: np.ndarray
    residual: float

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join("x^" + "_".join(map(str, k)) for k in self.exponents) + "\n")
            for row in self.matrix:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def gto_matrix(spec: GtoSpec, exponent_set: ExponentSet, t,
               residual_tol: float = 1e-8) -> GtoMatrix:
    """Coordinates of the operator on the monomial basis, by projection.

    Applies the operator to every basis monomial on a quadrature grid and
    projects back onto the space through its orthonormal basis.  A
    reconstruction residual above `residual_tol` means the operator leaked
    out of the space, which violates its invariance and raises.
    """
    weight = spec.natural_weight()
    system = orthonormalize(exponent_set, weight)
    rule = system.rule
    exps = exponent_set.exponents
    P, w_in = _mapped_grid(spec, t, rule.nodes)
    N, K, m = P.shape
    vals = monomial_values(P.reshape(-1, m), exps).reshape(N, K, len(exps))
    Tvals = np.tensordot(vals, w_in, axes=([1], [0]))  # (N, D)
    Phi = system.eval_all(rule.nodes)
    coeffs_on = Phi.T @ (rule.weights[:, None] * Tvals)   # (D, D)
    recon = Phi @ coeffs_on
    err = recon - Tvals
    num = np.sqrt((rule.weights[:, None] * err * err).sum(axis=0))
    den = np.sqrt((rule.weights[:, None] * Tvals * Tvals).sum(axis=0))
    residual = float((num / np.maximum(den, 1e-300)).max())
    if residual > residual_tol:
        raise RuntimeError(
            f"operator leaked out of the space: residual {residual:.3e}")
    M = system.monomial_matrix() @ coeffs_on
    return GtoMatrix(exps, M, residual)


@dataclass(frozen=True)
class ContractionReport:
    max_ratio: float
    per_p: dict
    trials: int

    def to_json(self) -> str:
        import json

        return json.dumps({"max_ratio": self.max_ratio,
                           "per_p": {str(k): v for k, v in self.per_p.items()},
                           "trials": self.trials})


def contraction_check(spec: GtoSpec, exponent_set: ExponentSet,
                      weight: WeightSpec | None, p_values, trials: int,
                      seed: int = 0, rule: QuadratureRule | None = None) -> ContractionReport:
    """Max of ||T_t P|| / ||P|| over random coefficient vectors and t.

    Uses the operator's natural weight unless another is supplied.  The same
    rule evaluates both norms, so the ratio is exactly 1 at |t| = 1 and the
    contraction margin is insensitive to quadrature bias.
    """
    if np.isscalar(p_values):
        p_values = [p_values]
    p_values = [float(p) for p in p_values]
    weight = weight or spec.natural_weight()
    if rule is None:
        # Both norms share this rule, so their discretization errors cancel
        # to first order and the kink-accuracy floor of the sharp-constant
        # solver is not needed; 4 deg + 16 keeps even-p cases exact.
        from .polyspace import default_rule

        deg = 4 * exponent_set.max_total_degree() + 16
        rule = default_rule(exponent_set, weight, degree=deg)
    exps = exponent_set.exponents
    Phi_mon = monomial_values(rule.nodes, exps)
    mapper = _GridMapper(spec, rule.nodes)
    rng = np.random.default_rng(seed)
    m = exponent_set.m
    worst = {p: 0.0 for p in p_values}
    for _ in range(trials):
        coeffs = rng.standard_normal(len(exps))
        if spec.kind == "cube_product":
            t = rng.uniform(-1.0, 1.0, size=m)
        else:
            t = float(rng.uniform(-1.0, 1.0))
        P = mapper.mapped(t)
        N, K, _ = P.shape
        vals = _eval_poly_chunked(P.reshape(-1, m), exps, coeffs)
        Tvals = vals.reshape(N, K) @ mapper.weights
        Pvals = Phi_mon @ coeffs
        for p in p_values:
            num = float((rule.weights @ np.abs(Tvals) ** p) ** (1.0 / p))
            den = float((rule.weights @ np.abs(Pvals) ** p) ** (1.0 / p))
            worst[p] = max(worst[p], num / den)
    return ContractionReport(max(worst.values()), worst, trials)
