"""Planar affine geometry: parallelogram covering, perturbation bounds, locus membership.

Norms on R^2 are sup norms; the induced matrix norm is the largest row l1 sum.
A parallelogram is ``c + M W(r)`` with ``W(r) = {|x| + |y| <= r}``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

SQRT_HALF = 2.0 ** -0.5
LEMMA_T = np.array([[SQRT_HALF, 0.7], [0.0, SQRT_HALF]])
LEMMA_B = np.array([1.0, 1.0])
LEMMA_P = np.array([-2.10, 0.20])
LEMMA_Q = np.array([4.90, 2.45])
INTERIOR_ETA = 4e-6
GUARD = 1e-12
CONTAIN_TOL = 1e-12


class ChainBreak(ArithmeticError):
    """A positivity requirement inside the perturbation chain failed."""

    def __init__(self, stage: str, value: float):
        super().__init__(f"chain breaks at {stage}: {value!r}")
        self.stage = stage
        self.value = value


class NotContractive(ValueError):
    pass


def mat2(a) -> np.ndarray:
    m = np.array(a, dtype=float).reshape(2, 2)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def vec2(v) -> np.ndarray:
    x = np.array(v, dtype=float).reshape(2)
    if not np.all(np.isfinite(x)):
        raise ValueError("vector entries must be finite")
    return x


def op_norm(m) -> float:
    """Induced sup norm: largest row l1 sum."""
    return float(np.max(np.sum(np.abs(np.asarray(m, dtype=float)), axis=1)))


def vec_norm(v) -> float:
    return float(np.max(np.abs(v)))


@dataclass(frozen=True, eq=False)
class Parallelogram:
    M: np.ndarray
    r: float = 1.0
    center: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        M = mat2(self.M)
        if self.r <= 0:
            raise ValueError("scale must be positive")
        det = float(np.linalg.det(M))
        if det == 0.0 or not math.isfinite(det):
            raise ValueError("parallelogram matrix must be invertible")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "center", vec2(self.center))
        object.__setattr__(self, "_inv", np.linalg.inv(M))

    @property
    def vertices(self) -> np.ndarray:
        p, q = self.M[:, 0], self.M[:, 1]
        r = self.r
        return self.center + np.array([r * p, r * q, -r * p, -r * q])

    def coords(self, v) -> np.ndarray:
        return self._inv @ (np.asarray(v, dtype=float) - self.center)

    def contains(self, pts, tol: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        c = (pts - self.center) @ self._inv.T
        return np.abs(c).sum(axis=1) <= self.r * (1.0 + tol)

    def split(self) -> list["Parallelogram"]:
        h = 0.5 * self.r
        p, q = self.M[:, 0], self.M[:, 1]
        return [Parallelogram(self.M, h, self.center + s) for s in (h * p, h * q, -h * p, -h * q)]

    def scaled(self, factor: float) -> "Parallelogram":
        return replace(self, r=self.r * factor)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform points by rejection from the bounding square of ``W(r)``."""
        out = []
        need = n
        while need > 0:
            xy = rng.uniform(-self.r, self.r, size=(2 * need, 2))
            xy = xy[np.abs(xy).sum(axis=1) <= self.r][:need]
            out.append(xy)
            need -= len(xy)
        return self.center + np.concatenate(out) @ self.M.T

    def as_dict(self) -> dict:
        return {"M": self.M.tolist(), "r": self.r, "center": self.center.tolist()}


def point_in(par: Parallelogram, v, tol: float = 0.0) -> bool:
    """Closed membership: ``||M^-1 (v - c)||_1 <= r``."""
    return bool(par.contains(v, tol)[0])


@dataclass(frozen=True, eq=False)
class AffineMap:
    A: np.ndarray
    t: np.ndarray

    def __call__(self, x):
        return self.A @ np.asarray(x, dtype=float) + self.t

    def compose(self, other: "AffineMap") -> "AffineMap":
        return AffineMap(self.A @ other.A, self.A @ other.t + self.t)

    def image(self, par: Parallelogram) -> Parallelogram:
        return Parallelogram(self.A @ par.M, par.r, self(par.center))


def compose_affine(word: Sequence[float], T, b) -> AffineMap:
    """``x -> T^j x + sum_i u_i T^(i-1) b`` for ``word = (u_1, ..., u_j)``."""
    T, b = mat2(T), vec2(b)
    A = np.eye(2)
    t = np.zeros(2)
    for u in word:
        t = t + u * (A @ b)
        A = A @ T
    return AffineMap(A, t)


def family_images(base: Parallelogram, T, b, j: int = 5, allowed: Sequence[int] = (-1, 0, 1)) -> list[Parallelogram]:
    return [compose_affine(u, T, b).image(base) for u in itertools.product(allowed, repeat=j)]


def _axes(par: Parallelogram) -> np.ndarray:
    # edge directions of c + M W(r) are p + q and p - q; normals are rotations
    p, q = par.M[:, 0], par.M[:, 1]
    return np.array([[-(p + q)[1], (p + q)[0]], [-(p - q)[1], (p - q)[0]]])


def intersects(a: Parallelogram, b: Parallelogram, tol: float = CONTAIN_TOL) -> bool:
    """Separating-axis test for two convex quadrilaterals; touching counts as meeting."""
    va, vb = a.vertices, b.vertices
    for axis in np.vstack([_axes(a), _axes(b)]):
        pa, pb = va @ axis, vb @ axis
        slack = tol * (np.abs(pa).max() + np.abs(pb).max() + 1.0)
        if pa.max() < pb.min() - slack or pb.max() < pa.min() - slack:
            return False
    return True


@dataclass
class CoverCertificate:
    covered: bool
    depth: int
    depth_used: int
    leaves: int
    pieces: int
    witness: Optional[Parallelogram] = None
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {"covered": self.covered, "depth": self.depth, "depth_used": self.depth_used,
             "leaves": self.leaves, "pieces": self.pieces,
             "witness": None if self.witness is None else self.witness.as_dict()}
        d.update(self.extras)
        return d


def cover_check(target: Parallelogram, family: Sequence[Parallelogram], depth: int,
                tol: float = CONTAIN_TOL) -> CoverCertificate:
    """Decide whether ``target`` lies in the union of ``family``, refining up to ``depth`` times.

    A piece is settled when its four vertices sit in one member (members are
    convex).  Otherwise it is split in four and each child keeps only the
    members it meets.  A ``True`` answer is a proof; ``False`` only means the
    recursion ran out of depth or found a piece meeting no member.
    """
    if not family:
        raise ValueError("family must be nonempty")
    stats = {"leaves": 0, "pieces": 0, "depth_used": 0}

    def rec(piece: Parallelogram, members: list[Parallelogram], level: int) -> Optional[Parallelogram]:
        stats["pieces"] += 1
        stats["depth_used"] = max(stats["depth_used"], level)
        verts = piece.vertices
        for m in members:
            if m.contains(verts, tol).all():
                stats["leaves"] += 1
                return None
        if level == depth:
            return piece
        for child in piece.split():
            keep = [m for m in members if intersects(child, m)]
            if not keep:
                stats["pieces"] += 1
                return child
            bad = rec(child, keep, level + 1)
            if bad is not None:
                return bad
        return None

    witness = rec(target, list(family), 0)
    return CoverCertificate(witness is None, depth, stats["depth_used"], stats["leaves"], stats["pieces"], witness)


def lemma_point(T=LEMMA_T, b=LEMMA_B) -> np.ndarray:
    """``T^-1 b - T^-2 b - T^-3 b - T^-4 b + T^-5 b``."""
    Ti = np.linalg.inv(mat2(T))
    v = np.zeros(2)
    P = np.eye(2)
    for s in (1, -1, -1, -1, 1):
        P = P @ Ti
        v = v + s * (P @ b)
    return v


def verify_covering_lemma(depth: int = 8, scale: float = 0.95, family_scale: float = 1.0) -> CoverCertificate:
    """Cover ``U = M W(1)`` by the 243 images ``T_u(V)``, ``V = M W(scale)``; also place the lemma point in ``V``."""
    M = np.column_stack([LEMMA_P, LEMMA_Q])
    U = Parallelogram(M, 1.0)
    V = Parallelogram(M, scale)
    fam = family_images(V.scaled(family_scale), LEMMA_T, LEMMA_B, 5)
    cert = cover_check(U, fam, depth)
    v = lemma_point()
    coords = V.coords(v)
    # the printed approximation (2.95837, 1.75736) is -v; V is symmetric so either sign works
    cert.extras = {"family_size": len(fam), "scale": scale, "family_scale": family_scale,
                   "point": v.tolist(), "point_coords": coords.tolist(),
                   "point_coords_abs": np.abs(coords).tolist(), "point_in_V": point_in(V, v)}
    return cert


# -- perturbation chain -----------------------------------------------------------------------

@dataclass(frozen=True)
class RobustnessChain:
    eta: float
    r_max: float
    envelope: float
    norm_R: float
    norm_Tinv_j: float
    norm_Tpinv_j: float
    norm_S_minus_I: float
    norm_d: float
    rho_V: float
    delta: float
    delta_prime: float
    margin: float
    verdict: bool

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _up(x: float) -> float:
    return x + GUARD


def robustness_eta(T=LEMMA_T, b=LEMMA_B, p=LEMMA_P, q=LEMMA_Q, scale: float = 0.95, j: int = 5,
                   eta: float = 4e-6, envelope: Optional[float] = 1.5) -> RobustnessChain:
    """Bound how far ``T`` may move (sup-norm radius ``eta``) while the covering survives.

    Every constant is recomputed from ``T, b, p, q``; each step adds ``GUARD``.
    ``envelope`` replaces ``r_max`` in the power estimates when ``r_max`` is below it.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    if j < 1:
        raise ValueError("j must be >= 1")
    T, b = mat2(T), vec2(b)
    M = np.column_stack([vec2(p), vec2(q)])
    r_max = op_norm(T) + eta
    r = envelope if envelope is not None and r_max < envelope else r_max
    norm_R = _up(j * r ** (j - 1) * eta)
    norm_Tinv_j = _up(op_norm(np.linalg.matrix_power(np.linalg.inv(T), j)))
    denom = 1.0 - norm_Tinv_j * norm_R
    if denom <= 0:
        raise ChainBreak("inverse", denom)
    norm_Tpinv_j = _up(norm_Tinv_j / denom)
    norm_S = _up(norm_Tpinv_j * norm_R)
    drift = sum(i * r ** (i - 1) * eta for i in range(1, j)) * vec_norm(b)
    norm_d = _up(norm_Tpinv_j * drift)
    rho_V = scale * max(vec_norm(p), vec_norm(q))
    delta = _up(norm_S * rho_V)
    delta_prime = _up(delta + norm_d)
    margin = ((1.0 - scale) / 2.0) / _up(op_norm(np.linalg.inv(M)))
    return RobustnessChain(eta, r_max, r, norm_R, norm_Tinv_j, norm_Tpinv_j, norm_S, norm_d, rho_V,
                           delta, delta_prime, margin, delta_prime <= margin)


def _passes(eta: float, **kw) -> bool:
    try:
        return robustness_eta(eta=eta, **kw).verdict
    except ChainBreak:
        return False


def max_eta(lo: float = 1e-9, hi: float = 1e-3, rel: float = 1e-6, **kw) -> float:
    """Largest passing ``eta`` in ``[lo, hi]`` by bisection (verdicts are monotone in ``eta``)."""
    if not _passes(lo, **kw):
        return 0.0
    if _passes(hi, **kw):
        return hi
    while hi - lo > rel * lo:
        mid = 0.5 * (lo + hi)
        if _passes(mid, **kw):
            lo = mid
        else:
            hi = mid
    return lo


# -- locus membership ---------------------------------------------------------------------

def spectral_radius(m) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(mat2(m)))))


def _exact_det(m: np.ndarray) -> Fraction:
    a, b, c, d = (Fraction(float(x)) for x in m.ravel())
    return a * d - b * c


def trivial_connected(T1, T2) -> bool:
    """``|det T1| + |det T2| >= 1`` for contractive ``T1, T2``; evaluated exactly on the float entries."""
    T1, T2 = mat2(T1), mat2(T2)
    for name, m in (("T1", T1), ("T2", T2)):
        if spectral_radius(m) >= 1.0:
            raise NotContractive(f"{name} has spectral radius >= 1")
    return abs(_exact_det(T1)) + abs(_exact_det(T2)) >= 1


def interior_matrix(kind: str, params: Sequence[float]) -> np.ndarray:
    if kind == "diag":
        g, lam = params
        if g == lam:
            raise ValueError("diag case needs distinct eigenvalues")
        return mat2([[g, 0.7], [0.0, lam]])
    if kind == "jordan":
        (lam,) = params
        return mat2([[lam, 0.7], [0.0, lam]])
    if kind == "rotation":
        rho, im = params
        if im <= 0:
            raise ValueError("rotation case needs a positive imaginary part")
        return mat2([[rho, 0.7], [-(im * im) / 0.7, rho]])
    raise ValueError(f"unknown kind {kind!r}")


def locus_interior_test(kind: str, params: Sequence[float], eta: float = INTERIOR_ETA) -> bool:
    """True when the model matrix for ``kind`` lies within ``eta`` of the lemma matrix."""
    m = interior_matrix(kind, params)
    return op_norm(m - LEMMA_T) + GUARD < eta
