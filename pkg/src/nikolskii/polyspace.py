"""Polynomials over exponent sets, orthonormal systems and special bases.

Quantitative paths never run through raw monomial coefficients: systems are
orthonormalized in a per-axis Chebyshev product basis, which spans the same
space as the monomials on any coordinatewise-monotone exponent set and keeps
Gram matrices well conditioned up to degree several dozen.  Monomial
coefficient vectors stay available for inspection and serialization.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .geometry import ExponentSet
from .quadrature import QuadratureRule, WeightSpec, ball_rule, cube_rule, interval_rule

__all__ = [
    "Polynomial",
    "OrthonormalSystem",
    "RankDeficiencyError",
    "evaluate",
    "gegenbauer_polynomial",
    "gegenbauer_values",
    "gegenbauer_one",
    "orthonormalize",
    "default_rule",
    "ball_basis",
    "solid_harmonic",
    "harmonic_count",
    "symmetrize_even",
]

# Pivot collapse threshold, relative to the leading pivot.
RANK_TOL = 1e-13

# Gram residual the orthonormalizer must achieve.
GRAM_TOL = 1e-10

HARMONIC_CATALOGUE_MAX_L = 4


class RankDeficiencyError(RuntimeError):
    """Exponent set is numerically dependent under the given quadrature."""


# ---------------------------------------------------------------------------
# monomial and Chebyshev value tables
# ---------------------------------------------------------------------------

def _as_points(X, m: int) -> np.ndarray:
    A = np.asarray(X, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    elif A.ndim == 1:
        A = A.reshape(1, -1) if A.shape[0] == m else A.reshape(-1, 1)
    if A.shape[1] != m:
        raise ValueError(f"points have dimension {A.shape[1]}, expected {m}")
    return A


def monomial_values(X: np.ndarray, exponents: Sequence[Sequence[int]]) -> np.ndarray:
    """Values of x^k for each point (rows) and multi-index (columns)."""
    K = np.asarray(exponents, dtype=int)
    X = _as_points(X, K.shape[1])
    vals = np.ones((X.shape[0], K.shape[0]))
    for j in range(K.shape[1]):
        kmax = int(K[:, j].max(initial=0))
        powers = X[:, j][:, None] ** np.arange(kmax + 1)[None, :]
        vals *= powers[:, K[:, j]]
    return vals


def chebyshev_table(x: np.ndarray, nmax: int) -> np.ndarray:
    """T_0..T_nmax at the given abscissas, by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    T = np.empty((x.shape[0], nmax + 1))
    T[:, 0] = 1.0
    if nmax >= 1:
        T[:, 1] = x
    for n in range(2, nmax + 1):
        T[:, n] = 2.0 * x * T[:, n - 1] - T[:, n - 2]
    return T


def chebyshev_product_values(X: np.ndarray, exponents: Sequence[Sequence[int]]) -> np.ndarray:
    """Values of prod_j T_{k_j}(x_j) for each point and multi-index."""
    K = np.asarray(exponents, dtype=int)
    X = _as_points(X, K.shape[1])
    vals = np.ones((X.shape[0], K.shape[0]))
    for j in range(K.shape[1]):
        T = chebyshev_table(X[:, j], int(K[:, j].max(initial=0)))
        vals *= T[:, K[:, j]]
    return vals


def _chebyshev_monomial_coeffs(nmax: int) -> np.ndarray:
    """C[n, k] with T_n(x) = sum_k C[n, k] x^k."""
    C = np.zeros((nmax + 1, nmax + 1))
    C[0, 0] = 1.0
    if nmax >= 1:
        C[1, 1] = 1.0
    for n in range(2, nmax + 1):
        C[n, 1:] += 2.0 * C[n - 1, :-1]
        C[n, :] -= C[n - 2, :]
    return C


# ---------------------------------------------------------------------------
# sparse dict arithmetic (exponent tuple -> coefficient)
# ---------------------------------------------------------------------------

def _dict_add(p: dict, q: dict, scale: float = 1.0) -> dict:
    out = dict(p)
    for k, c in q.items():
        out[k] = out.get(k, 0.0) + scale * c
        if out[k] == 0.0:
            del out[k]
    return out


def _dict_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for k1, c1 in p.items():
        for k2, c2 in q.items():
            k = tuple(a + b for a, b in zip(k1, k2))
            out[k] = out.get(k, 0.0) + c1 * c2
    return {k: c for k, c in out.items() if c != 0.0}


def _dict_pow(p: dict, n: int, m: int) -> dict:
    out = {tuple(0 for _ in range(m)): 1.0}
    for _ in range(n):
        out = _dict_mul(out, p)
    return out


def _dict_laplacian(p: dict) -> dict:
    out: dict = {}
    for k, c in p.items():
        for j, kj in enumerate(k):
            if kj >= 2:
                kk = tuple(v - 2 if i == j else v for i, v in enumerate(k))
                out[kk] = out.get(kk, 0.0) + c * kj * (kj - 1)
    return {k: c for k, c in out.items() if c != 0.0}


# ---------------------------------------------------------------------------
# Polynomial
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Polynomial:
    """Coefficient vector over an explicit exponent list.

    With system=None the coefficients multiply monomials x^k.  Otherwise they
    combine the functions of an orthonormal system, and evaluation runs
    through the system's stable Chebyshev representation.
    """

    exponents: tuple[tuple[int, ...], ...]
    coeffs: np.ndarray
    system: "OrthonormalSystem | None" = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        if self.coeffs.shape != (len(self.exponents),):
            raise ValueError("coefficient vector does not match the exponent list")

    @property
    def m(self) -> int:
        return len(self.exponents[0]) if self.exponents else 1

    @property
    def basis_tag(self) -> str:
        return "monomial" if self.system is None else f"orthonormal:{self.system.id}"

    def eval_many(self, X) -> np.ndarray:
        if self.system is not None:
            return self.system.eval_all(X) @ self.coeffs
        return monomial_values(X, self.exponents) @ self.coeffs

    def __call__(self, x) -> float:
        return float(self.eval_many(np.asarray(x, dtype=float).reshape(1, -1))[0])

    def max_total_degree(self) -> int:
        return max((sum(k) for k in self.exponents), default=0)

    def to_monomial(self) -> "Polynomial":
        if self.system is None:
            return self
        coef = self.system.monomial_matrix() @ self.coeffs
        return Polynomial(self.system.exponents, coef)

    def as_dict(self) -> dict:
        mono = self.to_monomial()
        return {k: c for k, c in zip(mono.exponents, mono.coeffs) if c != 0.0}

    def to_json(self) -> str:
        mono = self.to_monomial()
        return json.dumps({
            "exponents": [list(k) for k in mono.exponents],
            "coeffs": [float(c) for c in mono.coeffs],
        })

    @staticmethod
    def from_json(text: str) -> "Polynomial":
        d = json.loads(text)
        return Polynomial(tuple(tuple(k) for k in d["exponents"]),
                          np.asarray(d["coeffs"], dtype=float))

    @staticmethod
    def from_dict(d: dict, m: int | None = None) -> "Polynomial":
        if not d:
            m = m or 1
            return Polynomial((tuple(0 for _ in range(m)),), np.zeros(1))
        keys = sorted(d)
        return Polynomial(tuple(keys), np.asarray([d[k] for k in keys], dtype=float))


def evaluate(P: Polynomial, x) -> float:
    """Value of P at one point (cached power tables underneath)."""
    return P(x)


# ---------------------------------------------------------------------------
# Gegenbauer family; lam = 0 means the Chebyshev normalization with C_n(1) = 1
# ---------------------------------------------------------------------------

def gegenbauer_values(n: int, lam: float, x) -> np.ndarray:
    """C_n^lam at the abscissas, by the standard three-term recurrence."""
    x = np.asarray(x, dtype=float)
    if n == 0:
        return np.ones_like(x)
    prev = np.ones_like(x)
    cur = x if lam == 0.0 else 2.0 * lam * x
    for k in range(2, n + 1):
        if lam == 0.0:
            prev, cur = cur, 2.0 * x * cur - prev
        else:
            prev, cur = cur, (2.0 * x * (k + lam - 1.0) * cur
                              - (k + 2.0 * lam - 2.0) * prev) / k
    return cur


def gegenbauer_one(n: int, lam: float) -> float:
    """C_n^lam(1): Gamma(n+2 lam) / (n! Gamma(2 lam)) for lam > 0, else 1."""
    if lam == 0.0 or n == 0:
        return 1.0
    return math.exp(gammaln(n + 2.0 * lam) - gammaln(n + 1.0) - gammaln(2.0 * lam))


def gegenbauer_polynomial(n: int, lam: float) -> Polynomial:
    """Monomial coefficients of C_n^lam via the recurrence on coefficient arrays."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    coeffs = np.zeros((n + 1, n + 1))
    coeffs[0, 0] = 1.0
    if n >= 1:
        coeffs[1, 1] = 1.0 if lam == 0.0 else 2.0 * lam
    for k in range(2, n + 1):
        if lam == 0.0:
            coeffs[k, 1:] = 2.0 * coeffs[k - 1, :-1]
            coeffs[k, :] -= coeffs[k - 2, :]
        else:
            coeffs[k, 1:] = 2.0 * (k + lam - 1.0) * coeffs[k - 1, :-1] / k
            coeffs[k, :] -= (k + 2.0 * lam - 2.0) * coeffs[k - 2, :] / k
    return Polynomial(tuple((j,) for j in range(n + 1)), coeffs[n])


# ---------------------------------------------------------------------------
# orthonormal systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrthonormalSystem:
    """Orthonormal basis of a polynomial space under a weighted inner product.

    coef maps the internal Chebyshev product basis to the orthonormal
    functions: phi_i = sum_j coef[j, i] psi_{k_j}.  gram_residual is the
    largest deviation of the discrete Gram matrix from the identity.
    """

    exponents: tuple[tuple[int, ...], ...]
    weight: WeightSpec
    rule: QuadratureRule
    coef: np.ndarray
    gram_residual: float
    order: tuple[int, ...]
    id: str = ""

    def __post_init__(self):
        if not self.id:
            h = hashlib.sha256()
            h.update(repr(self.exponents).encode())
            h.update(repr(self.weight).encode())
            h.update(str(self.rule.exact_degree).encode())
            object.__setattr__(self, "id", h.hexdigest()[:12])

    def __len__(self) -> int:
        return len(self.exponents)

    @property
    def m(self) -> int:
        return len(self.exponents[0])

    def eval_all(self, X) -> np.ndarray:
        """Values of every orthonormal function at the points (rows)."""
        psi = chebyshev_product_values(X, self.exponents)
        return psi @ self.coef

    def kernel_diag(self, X) -> np.ndarray:
        """Reproducing kernel diagonal sum_i phi_i(x)^2."""
        V = self.eval_all(X)
        return (V * V).sum(axis=1)

    def monomial_matrix(self) -> np.ndarray:
        """M with column i holding monomial coefficients of phi_i."""
        K = np.asarray(self.exponents)
        D, m = K.shape
        index = {k: i for i, k in enumerate(self.exponents)}
        conv = np.zeros((D, D))
        tabs = [_chebyshev_monomial_coeffs(int(K[:, j].max())) for j in range(m)]
        for j_cheb, k in enumerate(self.exponents):
            expansion = {tuple(0 for _ in range(m)): 1.0}
            for ax, deg in enumerate(k):
                axis_poly = {}
                row = tabs[ax][deg]
                for power, c in enumerate(row):
                    if c != 0.0:
                        key = tuple(power if a == ax else 0 for a in range(m))
                        axis_poly[key] = c
                expansion = _dict_mul(expansion, axis_poly)
            for kk, c in expansion.items():
                conv[index[kk], j_cheb] = c
        return conv @ self.coef

    @property
    def functions(self) -> list[Polynomial]:
        M = self.monomial_matrix()
        return [Polynomial(self.exponents, M[:, i]) for i in range(len(self))]

    def to_csv(self, path) -> None:
        """Monomial coefficient matrix, one orthonormal function per row."""
        M = self.monomial_matrix()
        with open(path, "w", newline="") as fh:
            fh.write(",".join("x^" + "_".join(map(str, k)) for k in self.exponents) + "\n")
            for i in range(len(self)):
                fh.write(",".join(f"{v:.17g}" for v in M[:, i]) + "\n")


def default_rule(exponent_set: ExponentSet, weight: WeightSpec,
                 degree: int | None = None) -> QuadratureRule:
    """Quadrature matched to the weight, exact for products of two basis elements."""
    if weight.kind == "gegenbauer_interval":
        d = degree if degree is not None else 2 * exponent_set.max_total_degree()
        return interval_rule(0.0, weight.lam - 0.5, max(d, 2))
    if weight.kind == "coordinate_product":
        if degree is None:
            degs = [max(2 * k, 2) for k in exponent_set.max_degrees()]
        else:
            degs = [max(degree, 2)] * exponent_set.m
        return cube_rule(weight.alphas, weight.betas, degs)
    if weight.kind == "ball_radial":
        d = degree if degree is not None else 2 * exponent_set.max_total_degree()
        return ball_rule(weight.m, weight.lam, max(d, 2))
    raise ValueError(f"no quadrature for weight kind {weight.kind}")


def orthonormalize(exponent_set: ExponentSet, weight: WeightSpec,
                   rule: QuadratureRule | None = None,
                   order: Sequence[int] | None = None) -> OrthonormalSystem:
    """Modified Gram-Schmidt with one reorthogonalization pass.

    Operates on basis values at the quadrature nodes, in the Chebyshev
    product basis.  Raises RankDeficiencyError when a pivot collapses below
    RANK_TOL relative to the leading pivot, which signals an exponent set too
    large for the quadrature or the precision.
    """
    if rule is None:
        rule = default_rule(exponent_set, weight)
    exps = exponent_set.exponents
    D = len(exps)
    order = tuple(range(D)) if order is None else tuple(order)
    if sorted(order) != list(range(D)):
        raise ValueError("order must be a permutation of the basis indices")

    sq = np.sqrt(rule.weights)
    B = chebyshev_product_values(rule.nodes, exps) * sq[:, None]
    Q = np.empty_like(B)
    R = np.zeros((D, D))
    lead = None
    for pos, j in enumerate(order):
        v = B[:, j].copy()
        for _ in range(2):  # one reorthogonalization pass
            if pos:
                proj = Q[:, :pos].T @ v
                v -= Q[:, :pos] @ proj
                R[:pos, pos] += proj
        nrm = float(np.linalg.norm(v))
        if lead is None:
            lead = nrm
        if nrm < RANK_TOL * lead:
            raise RankDeficiencyError(
                f"pivot {nrm:.3e} below {RANK_TOL:.0e} of leading pivot {lead:.3e}")
        R[pos, pos] = nrm
        Q[:, pos] = v / nrm

    G = Q.T @ Q
    gram_residual = float(np.abs(G - np.eye(D)).max())
    # phi_pos = sum_{q <= pos} psi_{order[q]} * Rinv[q, pos]
    Rinv = np.linalg.solve(R[:D, :D], np.eye(D))
    coef = np.zeros((D, D))
    for q in range(D):
        coef[order[q], :] = Rinv[q, :]
    return OrthonormalSystem(exps, weight, rule, coef, gram_residual, order)


# ---------------------------------------------------------------------------
# spherical harmonics catalogue and the ball eigenbasis
# ---------------------------------------------------------------------------

# Real solid harmonics in three variables (x, y, z) up to degree 4, zonal
# representative first within each degree.
_SOLID_HARMONICS_3D: dict[int, list[dict]] = {
    0: [{(0, 0, 0): 1.0}],
    1: [
        {(0, 0, 1): 1.0},
        {(1, 0, 0): 1.0},
        {(0, 1, 0): 1.0},
    ],
    2: [
        {(0, 0, 2): 2.0, (2, 0, 0): -1.0, (0, 2, 0): -1.0},
        {(1, 0, 1): 1.0},
        {(0, 1, 1): 1.0},
        {(2, 0, 0): 1.0, (0, 2, 0): -1.0},
        {(1, 1, 0): 1.0},
    ],
    3: [
        {(0, 0, 3): 2.0, (2, 0, 1): -3.0, (0, 2, 1): -3.0},
        {(1, 0, 2): 4.0, (3, 0, 0): -1.0, (1, 2, 0): -1.0},
        {(0, 1, 2): 4.0, (2, 1, 0): -1.0, (0, 3, 0): -1.0},
        {(2, 0, 1): 1.0, (0, 2, 1): -1.0},
        {(1, 1, 1): 1.0},
        {(3, 0, 0): 1.0, (1, 2, 0): -3.0},
        {(0, 3, 0): -1.0, (2, 1, 0): 3.0},
    ],
    4: [
        {(0, 0, 4): 8.0, (2, 0, 2): -24.0, (0, 2, 2): -24.0,
         (4, 0, 0): 3.0, (0, 4, 0): 3.0, (2, 2, 0): 6.0},
        {(1, 0, 3): 4.0, (3, 0, 1): -3.0, (1, 2, 1): -3.0},
        {(0, 1, 3): 4.0, (2, 1, 1): -3.0, (0, 3, 1): -3.0},
        {(2, 0, 2): 6.0, (0, 2, 2): -6.0, (4, 0, 0): -1.0, (0, 4, 0): 1.0},
        {(1, 1, 2): 6.0, (3, 1, 0): -1.0, (1, 3, 0): -1.0},
        {(3, 0, 1): 1.0, (1, 2, 1): -3.0},
        {(0, 3, 1): -1.0, (2, 1, 1): 3.0},
        {(4, 0, 0): 1.0, (2, 2, 0): -6.0, (0, 4, 0): 1.0},
        {(3, 1, 0): 1.0, (1, 3, 0): -1.0},
    ],
}


def harmonic_count(l: int, m: int) -> int:
    """Number of independent spherical harmonics of degree l in m variables."""
    if m == 2:
        return 1 if l == 0 else 2
    if m == 3:
        return 2 * l + 1
    raise ValueError("harmonic catalogue covers m in {2, 3}")


def solid_harmonic(l: int, m: int, which: int = 0) -> Polynomial:
    """Harmonic homogeneous polynomial of degree l from the fixed catalogue.

    m=2 carries the full circular family (real and imaginary parts of
    (x+iy)^l); m=3 the classical real solid harmonics up to l = 4.
    """
    if m == 2:
        if which not in (0, 1) or (l == 0 and which != 0):
            raise ValueError("m=2 harmonics come in cos/sin pairs (which in {0,1})")
        # (x + iy)^l expanded; which=0 takes the real part, which=1 the imaginary
        real_phase = (1.0, 0.0, -1.0, 0.0)
        imag_phase = (0.0, 1.0, 0.0, -1.0)
        phases = real_phase if which == 0 else imag_phase
        d: dict = {}
        for j in range(l + 1):
            phase = phases[j % 4]
            if phase != 0.0:
                d[(l - j, j)] = math.comb(l, j) * phase
        return Polynomial.from_dict(d, m=2)
    if m == 3:
        if l > HARMONIC_CATALOGUE_MAX_L:
            raise ValueError(
                f"m=3 harmonic catalogue stops at l = {HARMONIC_CATALOGUE_MAX_L}")
        fam = _SOLID_HARMONICS_3D[l]
        if not 0 <= which < len(fam):
            raise ValueError(f"degree {l} has {len(fam)} harmonics")
        return Polynomial.from_dict(fam[which], m=3)
    raise ValueError("harmonic catalogue covers m in {2, 3}")


def ball_basis(l: int, N: int, m: int, which: int = 0) -> Polynomial:
    """Eigenpolynomial of the ball translation operator: a degree-l spherical
    harmonic times an even Gegenbauer factor composed with sqrt(1 - |x|^2).

    The composition is a genuine polynomial of total degree l + 2N because
    the Gegenbauer factor of even degree contains only even powers.
    """
    if m not in (2, 3):
        raise ValueError("ball basis implemented for m in {2, 3}")
    if l < 0 or N < 0:
        raise ValueError("need l >= 0 and N >= 0")
    P_l = solid_harmonic(l, m, which)
    lam_g = l + (m - 1.0) / 2.0
    radial = gegenbauer_polynomial(2 * N, lam_g)
    # substitute u^2 -> 1 - |x|^2 in the even polynomial radial(u)
    one_minus_r2 = {tuple(0 for _ in range(m)): 1.0}
    for j in range(m):
        one_minus_r2[tuple(2 if i == j else 0 for i in range(m))] = -1.0
    acc: dict = {}
    for (deg,), c in zip(radial.exponents, radial.coeffs):
        if c == 0.0:
            continue
        term = _dict_pow(one_minus_r2, deg // 2, m)
        acc = _dict_add(acc, term, scale=float(c))
    return Polynomial.from_dict(_dict_mul(P_l.as_dict(), acc), m=m)


def symmetrize_even(P: Polynomial) -> Polynomial:
    """Average of P over all 2^m coordinate sign flips.

    A monomial survives the average exactly when every exponent is even, so
    this is a coefficient filter, with no 2^m summation needed.
    """
    d = P.as_dict()
    kept = {k: c for k, c in d.items() if all(v % 2 == 0 for v in k)}
    return Polynomial.from_dict(kept, m=P.m)
