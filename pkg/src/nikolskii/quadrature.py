"""Weight descriptors and quadrature rules for weighted polynomial integrals.

Supported domains: the interval [-1,1], the cube [-1,1]^m and the unit ball.
Weights are Gegenbauer-type: per-axis |t|^alpha (1-t^2)^beta products on the
cube, radial (1-|x|^2)^(lam-1/2) on the ball.  Rules are Gauss-Jacobi based
and exact (to roundoff) for polynomials up to their stated degree.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import betaln, roots_jacobi

__all__ = [
    "WeightSpec",
    "QuadratureRule",
    "interval_rule",
    "cube_rule",
    "ball_rule",
    "weighted_norm",
    "sup_norm",
    "interval_weight_mass",
    "interval_moment",
]

# Node-count guard for tensor rules.
NODE_CAP = 4 * 10**6


@dataclass(frozen=True)
class WeightSpec:
    """Descriptor of a weight function tied to a domain.

    kinds:
      coordinate_product  prod_j |t_j|^alpha_j (1-t_j^2)^beta_j on the cube
      gegenbauer_interval (1-u^2)^(lam-1/2) on [-1,1]
      ball_radial         (1-|x|^2)^(lam-1/2) on the unit ball
      power_radial        |t|^gamma on R^m, bookkeeping only
      coordinate_power    prod_j |t_j|^alpha_j on R^m, bookkeeping only
    """

    kind: str
    m: int
    alphas: tuple[float, ...] = ()
    betas: tuple[float, ...] = ()
    lam: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind == "coordinate_product":
            if len(self.alphas) != self.m or len(self.betas) != self.m:
                raise ValueError("need one (alpha, beta) pair per axis")
            if any(a < 0 for a in self.alphas) or any(b < -0.5 for b in self.betas):
                raise ValueError("require alpha_j >= 0 and beta_j >= -1/2")
        elif self.kind == "gegenbauer_interval":
            if self.lam < 0:
                raise ValueError("gegenbauer parameter must be >= 0")
        elif self.kind == "ball_radial":
            if self.lam < 0:
                raise ValueError("ball weight parameter must be >= 0")
        elif self.kind == "power_radial":
            if self.gamma < 0:
                raise ValueError("radial power must be >= 0")
        elif self.kind == "coordinate_power":
            if any(a < 0 for a in self.alphas):
                raise ValueError("powers must be >= 0")
        else:
            raise ValueError(f"unknown weight kind {self.kind!r}")

    @staticmethod
    def coordinate_product(alphas: Sequence[float], betas: Sequence[float]) -> "WeightSpec":
        alphas = tuple(float(a) for a in alphas)
        betas = tuple(float(b) for b in betas)
        return WeightSpec("coordinate_product", len(alphas), alphas=alphas, betas=betas)

    @staticmethod
    def gegenbauer_interval(lam: float) -> "WeightSpec":
        return WeightSpec("gegenbauer_interval", 1, lam=float(lam))

    @staticmethod
    def ball_radial(m: int, lam: float) -> "WeightSpec":
        return WeightSpec("ball_radial", m, lam=float(lam))

    @staticmethod
    def power_radial(m: int, gamma: float) -> "WeightSpec":
        return WeightSpec("power_radial", m, gamma=float(gamma))

    @staticmethod
    def coordinate_power(alphas: Sequence[float]) -> "WeightSpec":
        alphas = tuple(float(a) for a in alphas)
        return WeightSpec("coordinate_power", len(alphas), alphas=alphas)

    @property
    def domain(self) -> str:
        if self.kind == "gegenbauer_interval":
            return "interval"
        if self.kind == "coordinate_product":
            return "cube" if self.m > 1 else "interval"
        if self.kind == "ball_radial":
            return "ball"
        raise ValueError(f"{self.kind} is a bookkeeping weight with no quadrature domain")

    def values(self, points: np.ndarray) -> np.ndarray:
        """Pointwise weight values; only for the integrable domain kinds."""
        X = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "gegenbauer_interval":
            u = X[:, 0]
            return (1.0 - u * u) ** (self.lam - 0.5)
        if self.kind == "coordinate_product":
            w = np.ones(len(X))
            for j in range(self.m):
                t = X[:, j]
                w = w * np.abs(t) ** self.alphas[j] * (1.0 - t * t) ** self.betas[j]
            return w
        if self.kind == "ball_radial":
            r2 = (X * X).sum(axis=1)
            return (1.0 - r2) ** (self.lam - 0.5)
        raise ValueError(f"{self.kind} has no pointwise values on a bounded domain")


def interval_weight_mass(alpha: float, beta: float) -> float:
    """Total mass of |u|^alpha (1-u^2)^beta on [-1,1]: B((alpha+1)/2, beta+1)."""
    return math.exp(betaln((alpha + 1.0) / 2.0, beta + 1.0))


def interval_moment(k: int, alpha: float, beta: float) -> float:
    """Closed form of the k-th monomial moment of |u|^alpha (1-u^2)^beta."""
    if k % 2 == 1:
        return 0.0
    return math.exp(betaln((k + alpha + 1.0) / 2.0, beta + 1.0))


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights for one weighted domain; weights absorb the weight function."""

    domain: str
    m: int
    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int
    weight: WeightSpec | None = None

    def __post_init__(self):
        if len(self.nodes) != len(self.weights):
            raise ValueError("node/weight length mismatch")
        if len(self.nodes) == 0:
            raise ValueError("empty rule")

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, f) -> float:
        values = f if isinstance(f, np.ndarray) else _eval_on(f, self.nodes)
        return float(self.weights @ values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{j + 1}" for j in range(self.m)] + ["weight"])
            for node, w in zip(self.nodes, self.weights):
                writer.writerow([f"{v:.17g}" for v in node] + [f"{w:.17g}"])


def _eval_on(f, nodes: np.ndarray) -> np.ndarray:
    if hasattr(f, "eval_many"):
        return f.eval_many(nodes)
    if nodes.shape[1] == 1:
        return np.asarray([f(x[0]) for x in nodes], dtype=float)
    return np.asarray([f(x) for x in nodes], dtype=float)


def _jacobi01(k: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule for integral over [0,1] of s^a (1-s)^b g(s) ds."""
    x, w = roots_jacobi(k, b, a)  # scipy weighs (1-x)^first (1+x)^second
    s = (x + 1.0) / 2.0
    return s, w * 2.0 ** (-(a + b + 1.0))


def interval_rule(alpha: float, beta: float, degree: int) -> QuadratureRule:
    """Rule exact for deg <= degree against |u|^alpha (1-u^2)^beta on [-1,1].

    For alpha = 0 this is plain Gauss-Jacobi.  Otherwise the even part is
    pulled back through u^2 = s to a Jacobi rule on [0,1], one node pair per
    root, which keeps the |u|^alpha singularity away from the nodes.
    """
    if alpha < 0 or beta <= -1:
        raise ValueError("need alpha >= 0 and beta > -1 for integrability")
    degree = max(int(degree), 0)
    if alpha == 0.0:
        k = degree // 2 + 1
        x, w = roots_jacobi(k, beta, beta)
        nodes = x.reshape(-1, 1)
        weights = w
    else:
        ds = degree // 2
        k = ds // 2 + 1
        s, w = _jacobi01(k, (alpha - 1.0) / 2.0, beta)
        r = np.sqrt(s)
        nodes = np.concatenate([-r[::-1], r]).reshape(-1, 1)
        weights = np.concatenate([w[::-1], w]) / 2.0
    spec = WeightSpec.coordinate_product([alpha], [beta])
    return QuadratureRule("interval", 1, nodes, weights, degree, spec)


def cube_rule(alphas: Sequence[float], betas: Sequence[float],
              degree: int | Sequence[int]) -> QuadratureRule:
    """Tensor product of per-axis interval rules on [-1,1]^m."""
    m = len(alphas)
    if m > 4:
        raise ValueError("cube rules are capped at m <= 4")
    degrees = [degree] * m if isinstance(degree, int) else list(degree)
    axes = [interval_rule(alphas[j], betas[j], degrees[j]) for j in range(m)]
    count = 1
    for r in axes:
        count *= len(r)
        if count > NODE_CAP:
            raise ValueError(f"tensor rule would exceed {NODE_CAP} nodes")
    grids = np.meshgrid(*(r.nodes[:, 0] for r in axes), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*(r.weights for r in axes), indexing="ij")
    weights = np.ones(count)
    for g in wgrids:
        weights = weights * g.ravel()
    spec = WeightSpec.coordinate_product(alphas, betas)
    return QuadratureRule("cube" if m > 1 else "interval", m, nodes, weights,
                          min(degrees), spec)


def _circle_nodes(K: int) -> np.ndarray:
    phi = 2.0 * np.pi * np.arange(K) / K
    return np.stack([np.cos(phi), np.sin(phi)], axis=1)


def ball_rule(m: int, lam: float, degree: int) -> QuadratureRule:
    """Rule exact for total degree <= degree against (1-|x|^2)^(lam-1/2) on B^m.

    Spherical factorization: a radial Gauss-Jacobi rule in r (through r^2 = s)
    times an antipodally symmetric angular rule, trapezoid in the angle for
    m=2 and Gauss-Legendre in cos(theta) times trapezoid for m=3.  Sharp
    constant weights use lam >= 0; inner measures of translation operators
    may pass any lam > -1/2.
    """
    if m not in (1, 2, 3):
        raise ValueError("ball rules support m in {1, 2, 3}")
    if lam <= -0.5:
        raise ValueError("need lam > -1/2 for integrability")
    degree = max(int(degree), 0)
    spec = None if lam < 0 else WeightSpec.ball_radial(m, lam)
    if m == 1:
        base = interval_rule(0.0, lam - 0.5, degree)
        return QuadratureRule("ball", 1, base.nodes, base.weights, degree, spec)

    kr = (degree // 2) // 2 + 1
    s, ws = _jacobi01(kr, (m - 2.0) / 2.0, lam - 0.5)
    r = np.sqrt(s)
    wr = ws / 2.0

    K = degree + 1
    if K % 2 == 1:
        K += 1
    if m == 2:
        theta = _circle_nodes(K)
        ang_nodes, ang_w = theta, np.full(K, 2.0 * np.pi / K)
    else:
        kz = degree // 2 + 1
        z, wz = roots_jacobi(kz, 0.0, 0.0)
        circ = _circle_nodes(K)
        rho = np.sqrt(1.0 - z * z)
        ang_nodes = np.concatenate([
            np.stack([np.full(K, rho[i]) * circ[:, 0],
                      np.full(K, rho[i]) * circ[:, 1],
                      np.full(K, z[i])], axis=1)
            for i in range(kz)
        ])
        ang_w = np.concatenate([np.full(K, wz[i] * 2.0 * np.pi / K) for i in range(kz)])

    nodes = (r[:, None, None] * ang_nodes[None, :, :]).reshape(-1, m)
    weights = (wr[:, None] * ang_w[None, :]).ravel()
    return QuadratureRule("ball", m, nodes, weights, degree, spec)


def weighted_norm(P, rule: QuadratureRule, p: float) -> float:
    """(sum_i w_i |P(x_i)|^p)^(1/p); the sup norm for p = inf.

    The quadrature must be exact for |P|^p when p is an even integer; for
    other p the caller supplies a rule per the oversampling policy (degree at
    least 4*deg(P) + 40, verified by node doubling where it matters).
    """
    if p == math.inf:
        return sup_norm(P, rule.domain, rule.m)
    if p < 1:
        raise ValueError("p < 1 quasinorms are outside the supported range")
    values = P if isinstance(P, np.ndarray) else _eval_on(P, rule.nodes)
    return float((rule.weights @ np.abs(values) ** p) ** (1.0 / p))


def _cheb_grid(q: int) -> np.ndarray:
    # Chebyshev points including the endpoints.
    return -np.cos(np.pi * np.arange(q) / (q - 1))


def _golden_max(f: Callable[[float], float], lo: float, hi: float,
                tol: float = 1e-10, iters: int = 80) -> tuple[float, float]:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a < tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    xs = [a, b, c, d]
    vals = [f(a), f(b), fc, fd]
    i = int(np.argmax(vals))
    return xs[i], vals[i]


def sup_norm(P, domain: str, m: int, degree: int | None = None,
             points_per_axis: int | None = None) -> float:
    """Sup norm over the domain via a dense grid plus local refinement.

    Grid density follows 8*deg + 64 points per axis (capped for m = 3), then
    coordinate-wise golden-section refinement around the best grid point.
    """
    if degree is None:
        degree = getattr(P, "max_total_degree", lambda: 16)() if hasattr(
            P, "max_total_degree") else 16
    if points_per_axis is None:
        points_per_axis = 8 * degree + 64
        if m >= 3:
            points_per_axis = min(points_per_axis, 48)
        elif m == 2:
            points_per_axis = min(points_per_axis, 160)

    def evals(X):
        return np.abs(_eval_on(P, X))

    if domain in ("interval", "cube"):
        g = _cheb_grid(points_per_axis)
        grids = np.meshgrid(*([g] * m), indexing="ij")
        X = np.stack([v.ravel() for v in grids], axis=1)
        vals = evals(X)
        best = int(np.argmax(vals))
        x = X[best].copy()
        h = float(g[1] - g[0]) if len(g) > 1 else 1.0
        for _ in range(3):
            for j in range(m):
                lo = max(-1.0, x[j] - 2 * h)
                hi = min(1.0, x[j] + 2 * h)

                def along(v, j=j):
                    y = x.copy()
                    y[j] = v
                    return evals(y.reshape(1, -1))[0]

                xj, _ = _golden_max(along, lo, hi)
                if along(xj) >= along(x[j]):
                    x[j] = xj
        return float(max(vals[best], evals(x.reshape(1, -1))[0]))

    if domain == "ball":
        qr = max(9, points_per_axis // 2)
        rs = np.linspace(0.0, 1.0, qr)
        if m == 1:
            X = np.concatenate([-rs[::-1], rs]).reshape(-1, 1)
        elif m == 2:
            circ = _circle_nodes(points_per_axis)
            X = (rs[:, None, None] * circ[None, :, :]).reshape(-1, 2)
        else:
            K = min(points_per_axis, 32)
            z = np.linspace(-1.0, 1.0, K)
            circ = _circle_nodes(K)
            rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
            ang = np.concatenate([
                np.stack([rho[i] * circ[:, 0], rho[i] * circ[:, 1],
                          np.full(K, z[i])], axis=1)
                for i in range(K)
            ])
            X = (rs[:, None, None] * ang[None, :, :]).reshape(-1, 3)
        vals = evals(X)
        best = int(np.argmax(vals))
        x = X[best].copy()
        for _ in range(3):
            for j in range(m):
                def along(v, j=j):
                    y = x.copy()
                    y[j] = v
                    if (y * y).sum() > 1.0:
                        y = y / math.sqrt((y * y).sum())
                    return evals(y.reshape(1, -1))[0]

                xj, _ = _golden_max(along, -1.0, 1.0)
                if along(xj) >= evals(x.reshape(1, -1))[0]:
                    x[j] = xj
                    if (x * x).sum() > 1.0:
                        x = x / math.sqrt((x * x).sum())
        return float(max(vals[best], evals(x.reshape(1, -1))[0]))

    raise ValueError(f"unknown domain {domain!r}")
