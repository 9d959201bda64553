"""Piecewise-linear convex functions and first-order interpolation checks.

A :class:`MaxAffine` stores pieces ``(f_i, g_i, y_i)`` and represents

    F(x) = max_i  f_i + <g_i, x - y_i>.

It provides an exact subgradient oracle with a selectable tie-breaking
policy, an exact proximal oracle (through the simplex-constrained dual) and
a generator of random instances with a known minimizer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import ConvergenceError, DimensionError, as_vector

__all__ = [
    "MaxAffine",
    "ProxResult",
    "FirstOrderData",
    "InterpolationReport",
    "interpolation_check",
    "random_instance",
    "RandomInstance",
]

ACTIVE_RTOL = 1e-9
ANCHOR_RTOL = 1e-12


class ProxResult(NamedTuple):
    y: np.ndarray
    g: np.ndarray
    f: float


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class MaxAffine:
    """Finite maximum of affine functions.

    Parameters
    ----------
    values : array_like, shape (k,)
        Piece values ``f_i`` at the anchors.
    slopes : array_like, shape (k, d)
        Piece slopes ``g_i`` (one per row).
    anchors : array_like, shape (k, d)
        Anchor points ``y_i`` (one per row).
    """

    def __init__(self, values, slopes, anchors):
        values = np.asarray(values, dtype=float).reshape(-1)
        slopes = np.atleast_2d(np.asarray(slopes, dtype=float))
        anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
        if values.size == 0:
            raise ValueError("a MaxAffine needs at least one piece")
        if slopes.shape != anchors.shape or slopes.shape[0] != values.size:
            raise DimensionError(
                f"inconsistent piece shapes: values {values.shape}, "
                f"slopes {slopes.shape}, anchors {anchors.shape}"
            )
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(slopes))
                and np.all(np.isfinite(anchors))):
            raise ValueError("pieces must be finite")
        self.values = _frozen(values)
        self.slopes = _frozen(slopes)
        self.anchors = _frozen(anchors)

    @property
    def dim(self) -> int:
        return self.slopes.shape[1]

    @property
    def n_pieces(self) -> int:
        return self.values.size

    def __repr__(self):
        return f"MaxAffine(n_pieces={self.n_pieces}, dim={self.dim})"

    def pieces(self, x) -> np.ndarray:
        """Values of every affine piece at ``x``."""
        x = as_vector(x, self.dim)
        return self.values + np.einsum("ij,ij->i", self.slopes, x - self.anchors)

    def evaluate(self, x) -> tuple[float, np.ndarray]:
        """Return ``(F(x), active)`` where ``active`` lists the near-maximal pieces."""
        p = self.pieces(x)
        val = float(p.max())
        active = np.flatnonzero(p >= val - ACTIVE_RTOL * (1.0 + abs(val)))
        return val, active

    def __call__(self, x) -> float:
        return float(self.pieces(x).max())

    def subgradient(self, x, policy="lowest") -> np.ndarray:
        """A subgradient of ``F`` at ``x``.

        ``policy`` is one of

        * ``"lowest"``: slope of the active piece with the lowest index;
        * ``"anchor"``: slope of a piece anchored at ``x`` if that piece is
          active, otherwise ``"lowest"``;
        * an array of nonnegative piece weights, restricted to the active set
          and renormalised (a convex combination of active slopes).
        """
        x = as_vector(x, self.dim)
        _, active = self.evaluate(x)
        if isinstance(policy, str):
            if policy == "anchor":
                scale = 1.0 + np.linalg.norm(x)
                hits = [i for i in active
                        if np.linalg.norm(self.anchors[i] - x) <= ANCHOR_RTOL * scale]
                if hits:
                    return self.slopes[min(hits)].copy()
                return self.slopes[active[0]].copy()
            if policy == "lowest":
                return self.slopes[active[0]].copy()
            raise ValueError(f"unknown subgradient policy {policy!r}")
        w = np.asarray(policy, dtype=float).reshape(-1)
        if w.size != self.n_pieces or np.any(w < 0):
            raise ValueError("weights must be nonnegative, one per piece")
        wa = w[active]
        if wa.sum() <= 0:
            raise ValueError("weights vanish on the active set")
        return (wa / wa.sum()) @ self.slopes[active]

    def oracle(self, policy="lowest"):
        """Subgradient oracle ``x -> (F(x), g)``."""
        def call(x):
            return self(x), self.subgradient(x, policy)
        return call

    def prox(self, x, L: float, weights_out: bool = False):
        """Proximal point ``argmin_z F(z) + (L/2)||z - x||^2``.

        Solved through its dual over the probability simplex,

            max_lam  sum_i lam_i (f_i + <g_i, x - y_i>) - ||sum_i lam_i g_i||^2 / (2L),

        so the work scales with the number of pieces, not with ``d``.
        Returns ``ProxResult(y, g, f)`` with ``g = L (x - y)`` a subgradient
        at ``y`` and ``f = F(y)``.
        """
        from .plansolve import simplex_qp

        if not L > 0:
            raise ValueError("prox parameter L must be positive")
        x = as_vector(x, self.dim)
        c = self.pieces(x)
        S = self.slopes
        Q = (S @ S.T) / L
        lam = simplex_qp(Q, c)
        g = lam @ S
        y = x - g / L
        f = self(y)
        # support pieces must be maximal at y
        p = self.pieces(y)
        support = lam > 0
        resid = float(np.max(f - p[support])) if np.any(support) else 0.0
        gnorm = float(np.linalg.norm(g))
        if resid > 1e-9 * (1.0 + abs(f) + gnorm * (1.0 + np.linalg.norm(y))):
            raise ConvergenceError(f"prox KKT residual {resid:.3e} too large")
        res = ProxResult(y, g, f)
        if weights_out:
            return res, lam
        return res

    def prox_oracle(self):
        """Proximal oracle ``(x, L) -> (y, F(y))``."""
        def call(x, L):
            r = self.prox(x, L)
            return r.y, r.f
        return call

    def embed(self, dim: int) -> "MaxAffine":
        """Zero-pad slopes and anchors to a larger ambient dimension."""
        if dim < self.dim:
            raise DimensionError("cannot embed into a smaller dimension")
        pad = ((0, 0), (0, dim - self.dim))
        return MaxAffine(self.values, np.pad(self.slopes, pad), np.pad(self.anchors, pad))


@dataclass
class FirstOrderData:
    """Records ``(x_i, f_i, g_i)``, optionally with a minimizer record and a Lipschitz bound."""

    points: np.ndarray
    values: np.ndarray
    grads: np.ndarray
    x_star: np.ndarray | None = None
    f_star: float | None = None
    M: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.x_star is not None:
            self.x_star = as_vector(self.x_star)
        k = self.values.size
        pts = np.asarray(self.points, dtype=float)
        if k == 0:
            d = self.x_star.size if self.x_star is not None else (pts.shape[-1] if pts.ndim == 2 else 0)
            self.points = pts.reshape(0, d)
        else:
            self.points = pts.reshape(k, -1)
        self.grads = np.asarray(self.grads, dtype=float).reshape(self.points.shape)
        if self.x_star is not None:
            if self.x_star.size != self.points.shape[1]:
                raise DimensionError("star record dimension disagrees with records")
            if self.f_star is None:
                raise ValueError("a star record needs f_star")

    def __len__(self):
        return self.values.size

    def prefix(self, n: int) -> "FirstOrderData":
        return FirstOrderData(self.points[:n], self.values[:n], self.grads[:n], M=self.M)

    def all_records(self):
        """Stack the records, appending the star record (zero gradient) when present."""
        X, f, G = self.points, self.values, self.grads
        if self.x_star is not None:
            d = self.x_star.size
            X = np.vstack([X.reshape(-1, d), self.x_star])
            f = np.append(f, self.f_star)
            G = np.vstack([G.reshape(-1, d), np.zeros(d)])
        return X, f, G


@dataclass
class InterpolationReport:
    min_Q: float
    argmin_Q: tuple[int, int] | None
    min_S: float | None
    argmin_S: int | None
    tol: float
    valid: bool
    Q: np.ndarray = field(repr=False, default=None)

    def describe(self, n_records: int | None = None) -> str:
        def name(i):
            return "star" if n_records is not None and i == n_records else str(i)
        parts = []
        if self.argmin_Q is not None:
            i, j = self.argmin_Q
            parts.append(f"min Q[{name(i)},{name(j)}] = {self.min_Q:.6g}")
        if self.min_S is not None:
            parts.append(f"min S[{name(self.argmin_S)}] = {self.min_S:.6g}")
        return ", ".join(parts) + f" (tol {self.tol:.3g}, {'valid' if self.valid else 'INVALID'})"


def interpolation_check(data: FirstOrderData, require_lipschitz: bool = False,
                        tol: float | None = None) -> InterpolationReport:
    """Check the convex (and Lipschitz) interpolation conditions.

    ``Q[i, j] = f_i - f_j - <g_j, x_i - x_j>`` must be nonnegative for all
    ``i != j`` and, when ``M`` is given, ``S_i = M^2 - ||g_i||^2`` must be
    nonnegative. The star record (index ``len(data)``) is included when present.
    """
    if require_lipschitz and data.M is None:
        raise ValueError("Lipschitz check requested but M is missing")
    X, f, G = data.all_records()
    k = f.size
    if tol is None:
        if k:
            scale = max(float(np.max(np.abs(f))),
                        float(np.max(np.linalg.norm(G, axis=1) * np.linalg.norm(X, axis=1))))
        else:
            scale = 0.0
        tol = 1e-8 * (1.0 + scale)
    if k >= 2:
        diff = X[:, None, :] - X[None, :, :]
        Q = f[:, None] - f[None, :] - np.einsum("jk,ijk->ij", G, diff)
        masked = Q + np.diag(np.full(k, np.inf))
        idx = np.unravel_index(np.argmin(masked), masked.shape)
        min_Q = float(masked[idx])
        arg = (int(idx[0]), int(idx[1]))
    else:
        Q = np.zeros((k, k))
        min_Q, arg = float("inf"), None
    min_S = arg_S = None
    if data.M is not None and k:
        S = data.M ** 2 - np.sum(G * G, axis=1)
        arg_S = int(np.argmin(S))
        min_S = float(S[arg_S])
    valid = min_Q >= -tol and (min_S is None or min_S >= -tol)
    return InterpolationReport(min_Q, arg, min_S, arg_S, tol, bool(valid), Q)


class RandomInstance(NamedTuple):
    F: MaxAffine
    x0: np.ndarray
    x_star: np.ndarray
    f_star: float


def random_instance(rng: np.random.Generator, dim: int, n_pieces: int,
                    M: float = 1.0, R: float = 1.0) -> RandomInstance:
    """Random ``M``-Lipschitz max-affine function with a known minimizer.

    A generating function ``h`` is built from pieces through ``(x_star, f_star)``
    whose slopes have zero in their convex hull, plus pieces lying below
    ``f_star`` at ``x_star``. The returned instance collects the tangents of
    ``h`` at ``x_star`` and at random sample points, so every piece is active
    at its own anchor and ``x_star`` is a minimizer with value ``f_star``.
    ``||x0 - x_star|| <= R``.
    """
    if n_pieces < 2:
        raise ValueError("need at least two pieces")

    def ball(radius):
        v = rng.standard_normal(dim)
        return v / np.linalg.norm(v) * radius * rng.uniform() ** (1.0 / dim)

    x0 = rng.standard_normal(dim)
    x_star = x0 + ball(R)
    f_star = float(rng.normal())

    n_through = min(n_pieces, int(rng.integers(2, 4)))
    S = [ball(M) for _ in range(n_through - 1)]
    S.append(-np.mean(S, axis=0))
    n_below = max(n_pieces, 4)
    B = [ball(M) for _ in range(n_below)]
    off = rng.uniform(0.05, 1.0, size=n_below) * M * R
    h_slopes = np.array(S + B)
    h_vals = np.concatenate([np.zeros(n_through), -off])

    def h_piece(x):
        p = h_vals + h_slopes @ (x - x_star)
        i = int(np.argmax(p))
        return f_star + p[i], h_slopes[i]

    values = [f_star] * n_through
    slopes = list(S)
    anchors = [x_star] * n_through
    while len(values) < n_pieces:
        p = x_star + ball(1.5 * R)
        v, g = h_piece(p)
        values.append(v)
        slopes.append(g)
        anchors.append(p)
    order = rng.permutation(n_pieces)
    F = MaxAffine(np.array(values)[order], np.array(slopes)[order], np.array(anchors)[order])
    return RandomInstance(F, x0, x_star, f_star)
