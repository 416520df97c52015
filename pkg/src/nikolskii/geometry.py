"""Symmetric convex bodies and the lattice exponent sets they carve out of Z^m_+.

A body V here is always one of the named parametric families (cube, ball,
octahedron, lp ball, parallelepiped).  All of them are symmetric about every
coordinate hyperplane, so they contain, with each point t, the full
axis-aligned box spanned by t.  Polynomial spaces downstream are indexed by
the lattice points of a dilated body, a*V intersected with Z^m_+.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "ConvexBody",
    "ExponentSet",
    "PiCheck",
    "LatticeCapError",
    "membership",
    "pi_condition_check",
    "lattice_points",
    "scale_body",
    "translate",
    "total_degree_set",
    "tensor_degree_set",
]

# Boundary lattice points are included: the defining functional may exceed 1
# by this relative tolerance (irrational boundaries evaluated in doubles).
MEMBERSHIP_TOL = 1e-12

# Refuse to enumerate exponent sets whose bounding box exceeds this.
LATTICE_CAP = 10**6


class LatticeCapError(RuntimeError):
    """Exponent enumeration would exceed the configured cap."""


_KINDS = ("cube", "ball", "octahedron", "lp_ball", "parallelepiped")


@dataclass(frozen=True)
class ConvexBody:
    """A centrally symmetric convex body closed under coordinate sign flips.

    kind is one of cube/ball/octahedron (radius M), lp_ball (exponent lam,
    per-axis radii sigma) or parallelepiped (per-axis radii sigma, zeros
    allowed for degenerate axes).  Instances are immutable value objects.
    """

    kind: str
    m: int
    M: float = 1.0
    lam: float = math.inf
    sigma: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown body kind {self.kind!r}")
        if self.m < 1:
            raise ValueError("dimension must be >= 1")
        if self.kind in ("cube", "ball", "octahedron") and not self.M > 0:
            raise ValueError("radius M must be positive")
        if self.kind == "lp_ball":
            if not (1.0 <= self.lam):
                raise ValueError("lp exponent must lie in [1, inf]")
            if len(self.sigma) != self.m or any(s <= 0 for s in self.sigma):
                raise ValueError("lp_ball needs m positive radii")
        if self.kind == "parallelepiped":
            if len(self.sigma) != self.m or all(s == 0 for s in self.sigma):
                raise ValueError("parallelepiped needs m radii, not all zero")
            if any(s < 0 for s in self.sigma):
                raise ValueError("parallelepiped radii must be nonnegative")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def cube(M: float, m: int) -> "ConvexBody":
        return ConvexBody("cube", m, M=float(M))

    @staticmethod
    def ball(M: float, m: int) -> "ConvexBody":
        return ConvexBody("ball", m, M=float(M))

    @staticmethod
    def octahedron(M: float, m: int) -> "ConvexBody":
        return ConvexBody("octahedron", m, M=float(M))

    @staticmethod
    def lp_ball(lam: float, sigma: Sequence[float]) -> "ConvexBody":
        """l^lam ball with per-axis radii; canonicalizes lam=inf and lam=1."""
        sigma = tuple(float(s) for s in sigma)
        if math.isinf(lam):
            return ConvexBody.parallelepiped(sigma)
        if lam == 1.0 and len(set(sigma)) == 1:
            return ConvexBody.octahedron(sigma[0], len(sigma))
        return ConvexBody("lp_ball", len(sigma), lam=float(lam), sigma=sigma)

    @staticmethod
    def parallelepiped(sigma: Sequence[float]) -> "ConvexBody":
        sigma = tuple(abs(float(s)) for s in sigma)
        return ConvexBody("parallelepiped", len(sigma), sigma=sigma)

    # -- geometry ----------------------------------------------------------

    def functional(self, t: Sequence[float]) -> float:
        """1-homogeneous gauge of the body: t is inside iff functional <= 1."""
        t = np.asarray(t, dtype=float)
        if t.shape != (self.m,):
            raise ValueError(f"point has dimension {t.shape}, body has m={self.m}")
        a = np.abs(t)
        if self.kind == "cube":
            return float(a.max() / self.M)
        if self.kind == "ball":
            return float(np.sqrt((a * a).sum()) / self.M)
        if self.kind == "octahedron":
            return float(a.sum() / self.M)
        if self.kind == "lp_ball":
            r = a / np.asarray(self.sigma)
            return float((r**self.lam).sum() ** (1.0 / self.lam))
        # parallelepiped; zero radii force the coordinate to vanish
        worst = 0.0
        for aj, sj in zip(a, self.sigma):
            if sj == 0.0:
                if aj != 0.0:
                    return math.inf
            else:
                worst = max(worst, aj / sj)
        return worst

    def membership(self, t: Sequence[float]) -> bool:
        return self.functional(t) <= 1.0 + MEMBERSHIP_TOL

    def axis_bound(self, j: int) -> float:
        """Largest |t_j| over the body (half-width of the bounding box)."""
        if self.kind in ("cube", "ball", "octahedron"):
            return self.M
        return self.sigma[j]

    def scale(self, factor: float) -> "ConvexBody":
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        if self.kind in ("cube", "ball", "octahedron"):
            return ConvexBody(self.kind, self.m, M=self.M * factor)
        if self.kind == "lp_ball":
            return ConvexBody(
                "lp_ball", self.m, lam=self.lam,
                sigma=tuple(s * factor for s in self.sigma),
            )
        return ConvexBody.parallelepiped(tuple(s * factor for s in self.sigma))

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        params: dict = {}
        if self.kind in ("cube", "ball", "octahedron"):
            params["M"] = self.M
        elif self.kind == "lp_ball":
            params["lam"] = self.lam
            params["sigma"] = list(self.sigma)
        else:
            params["sigma"] = list(self.sigma)
        return json.dumps({"kind": self.kind, "m": self.m, "params": params})

    @staticmethod
    def from_json(text: str) -> "ConvexBody":
        d = json.loads(text)
        kind, m, params = d["kind"], d["m"], d["params"]
        if kind in ("cube", "ball", "octahedron"):
            return ConvexBody(kind, m, M=params["M"])
        if kind == "lp_ball":
            return ConvexBody.lp_ball(params["lam"], params["sigma"])
        return ConvexBody.parallelepiped(params["sigma"])


@dataclass(frozen=True)
class _TranslatedBody:
    """Shifted copy of a body; deliberately breaks the sign-flip symmetry.

    Exists so the symmetry verifier has something to reject in tests.
    """

    base: ConvexBody
    offset: tuple[float, ...]

    @property
    def m(self) -> int:
        return self.base.m

    def membership(self, t: Sequence[float]) -> bool:
        t = np.asarray(t, dtype=float)
        return self.base.membership(t - np.asarray(self.offset))

    def axis_bound(self, j: int) -> float:
        return self.base.axis_bound(j) + abs(self.offset[j])


def translate(body: ConvexBody, offset: Sequence[float]) -> _TranslatedBody:
    return _TranslatedBody(body, tuple(float(v) for v in offset))


@dataclass(frozen=True)
class ExponentSet:
    """Multi-indices k in Z^m_+ lying inside a dilated body, in lex order."""

    m: int
    a: float
    even_only: bool
    exponents: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        exps = self.exponents
        if list(exps) != sorted(set(exps)):
            raise ValueError("exponents must be lexicographically sorted, no duplicates")
        for k in exps:
            if len(k) != self.m or any(v < 0 for v in k):
                raise ValueError(f"bad multi-index {k}")
            if self.even_only and any(v % 2 for v in k):
                raise ValueError(f"odd multi-index {k} in an even-only set")

    def __len__(self) -> int:
        return len(self.exponents)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.exponents)

    def __contains__(self, k) -> bool:
        return tuple(k) in set(self.exponents)

    def max_degrees(self) -> tuple[int, ...]:
        """Per-axis maximum exponent (0s for the empty set edge case)."""
        if not self.exponents:
            return tuple(0 for _ in range(self.m))
        arr = np.asarray(self.exponents)
        return tuple(int(v) for v in arr.max(axis=0))

    def max_total_degree(self) -> int:
        if not self.exponents:
            return 0
        return max(sum(k) for k in self.exponents)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"k{j + 1}" for j in range(self.m)])
            for k in self.exponents:
                writer.writerow(list(k))


@dataclass(frozen=True)
class PiCheck:
    """Outcome of the randomized sign-flip symmetry check."""

    ok: bool
    witness: tuple[float, ...] | None = None

    def __bool__(self) -> bool:
        return self.ok


def membership(body: ConvexBody, t: Sequence[float]) -> bool:
    """True iff t lies in the (closed) body, with boundary tolerance."""
    return body.membership(t)


def pi_condition_check(body, samples: int, seed: int = 0) -> PiCheck:
    """Randomized verifier of sign-flip symmetry.

    Draws `samples` points of the body and checks that every one of the 2^m
    sign-flipped images stays inside.  Returns the first failing point as a
    witness.  Probabilistic: a True answer is evidence, not proof.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    m = body.m
    bounds = np.array([body.axis_bound(j) for j in range(m)])
    found = 0
    attempts = 0
    while found < samples and attempts < 1000 * samples:
        attempts += 1
        t = rng.uniform(-bounds, bounds)
        if not body.membership(t):
            continue
        found += 1
        for signs in itertools.product((1.0, -1.0), repeat=m):
            flipped = t * np.asarray(signs)
            if not body.membership(flipped):
                return PiCheck(False, tuple(float(v) for v in t))
    return PiCheck(True, None)


def lattice_points(body: ConvexBody, a: float, even_only: bool = False,
                   cap: int = LATTICE_CAP) -> ExponentSet:
    """All k in Z^m_+ with k inside a*body, lex sorted.

    even_only keeps only all-even multi-indices.  Boundary points count as
    inside.  Raises LatticeCapError if the bounding box alone exceeds `cap`.
    """
    if a < 0:
        raise ValueError("scale a must be >= 0")
    m = body.m
    if a == 0:
        return ExponentSet(m, a, even_only, (tuple(0 for _ in range(m)),))
    bounds = []
    box = 1
    for j in range(m):
        b = int(math.floor(a * body.axis_bound(j) * (1.0 + MEMBERSHIP_TOL) + 1e-9))
        bounds.append(b)
        box *= b + 1
        if box > cap:
            raise LatticeCapError(f"bounding box holds > {cap} lattice points")
    step = 2 if even_only else 1
    out = []
    limit = a * (1.0 + MEMBERSHIP_TOL)
    for k in itertools.product(*(range(0, b + 1, step) for b in bounds)):
        if body.functional(np.asarray(k, dtype=float)) <= limit:
            out.append(k)
    out.sort()
    return ExponentSet(m, a, even_only, tuple(out))


def scale_body(body: ConvexBody, factor: float) -> ConvexBody:
    """Body with membership(t) equivalent to membership of t/factor in the original."""
    return body.scale(factor)


def total_degree_set(n: int, m: int) -> ExponentSet:
    """Exponents of all m-variate polynomials of total degree at most n."""
    return lattice_points(ConvexBody.octahedron(1.0, m), float(n))


def tensor_degree_set(n: int, m: int) -> ExponentSet:
    """Exponents of polynomials of degree at most n in each variable separately."""
    return lattice_points(ConvexBody.cube(1.0, m), float(n))
