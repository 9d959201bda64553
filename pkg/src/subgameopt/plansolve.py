"""Small convex programs solved once per iteration by the planning methods.

Everything here works in Gram (coefficient) coordinates: the ambient
dimension only enters when vectors are reconstructed at the end.

* :func:`simplex_qp` - exact active-set solver for concave quadratics over
  the probability simplex (used for proximal steps and for the proximal plan).
* :func:`solve_klm_plan` - the cutting-plane planning SOCP, by a log-barrier
  interior-point method.
* :func:`solve_spppa_plan` - the proximal planning program (linear objective,
  one rotated-cone constraint, nonnegativity), by a Dinkelbach iteration on
  its homogenised ratio form with :func:`simplex_qp` as the inner solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .core import ConvergenceError, DimensionError, as_columns, as_vector
from .maxaffine import FirstOrderData, InterpolationReport, interpolation_check

__all__ = [
    "simplex_qp",
    "KLMPlan",
    "InfeasibleHistoryError",
    "solve_klm_plan",
    "static_klm_plan",
    "PlanInputs",
    "plan_inputs",
    "ProxPlan",
    "solve_spppa_plan",
    "canonical_plan",
    "certificate_H_prime",
    "dual_residuals",
]

UNBOUNDED_CAP = 1e12


# ---------------------------------------------------------------------------
# simplex-constrained QP
# ---------------------------------------------------------------------------

def _null_basis(m: int) -> np.ndarray:
    q, _ = np.linalg.qr(np.ones((m, 1)), mode="complete")
    return q[:, 1:]


def simplex_qp(Q, c, max_iter: int | None = None, return_info: bool = False):
    """Maximize ``<c, lam> - lam^T Q lam / 2`` over the probability simplex.

    Primal active-set method. ``Q`` only needs to be positive semidefinite;
    zero-curvature descent directions on a face are followed to the next
    bound. The returned weights satisfy the KKT conditions to round-off.

    Raises
    ------
    ConvergenceError
        If the iteration cap is hit.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    k = c.size
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (k, k):
        raise DimensionError(f"Q has shape {Q.shape}, expected ({k}, {k})")
    if k == 0:
        raise ValueError("empty simplex")
    Q = 0.5 * (Q + Q.T)
    scale = max(1e-300, float(np.max(np.abs(c))), float(np.max(np.abs(Q))))
    if max_iter is None:
        max_iter = 50 * k + 100

    lam = np.zeros(k)
    j = int(np.argmax(c - 0.5 * np.diag(Q)))
    lam[j] = 1.0
    free = [j]
    on_face_min = False
    it = 0
    for it in range(max_iter):
        grad = Q @ lam - c
        F = np.array(free)
        p = None
        ray = False
        if len(F) > 1 and not on_face_min:
            N = _null_basis(len(F))
            H = N.T @ Q[np.ix_(F, F)] @ N
            r = N.T @ grad[F]
            w, V = np.linalg.eigh(H)
            flat = w <= 1e-12 * max(float(np.max(np.abs(w))), 1e-300)
            rr = V.T @ r
            if np.any(flat) and np.linalg.norm(rr[flat]) > 1e-14 * scale:
                d = -V[:, flat] @ rr[flat]
                ray = True
            else:
                d = -V[:, ~flat] @ (rr[~flat] / w[~flat])
            p = N @ d
            if np.linalg.norm(p) <= 1e-15:
                p = None
        if p is None:
            nu = float(np.mean(grad[F]))
            rho = grad - nu
            rho[F] = np.inf
            i = int(np.argmin(rho))
            if rho[i] >= -4.0 * np.finfo(float).eps * scale:
                break
            free.append(i)
            on_face_min = False
            continue
        neg = p < 0
        ratios = -lam[F][neg] / p[neg]
        amax = float(ratios.min()) if np.any(neg) else np.inf
        alpha = amax if ray else min(1.0, amax)
        lam[F] += alpha * p
        if alpha == amax:
            drop = int(F[neg][int(np.argmin(ratios))])
            lam[drop] = 0.0
            free.remove(drop)
            on_face_min = False
        else:
            on_face_min = True
        lam[F] = np.maximum(lam[F], 0.0)
    else:
        raise ConvergenceError(f"simplex_qp did not converge in {max_iter} iterations")

    lam = np.maximum(lam, 0.0)
    lam /= lam.sum()
    if not return_info:
        return lam
    grad = Q @ lam - c
    supp = lam > 0
    nu = float(np.mean(grad[supp]))
    stat = float(np.max(np.abs(grad[supp] - nu)))
    comp = float(max(0.0, -np.min(grad[~supp] - nu))) if np.any(~supp) else 0.0
    return lam, {"iterations": it + 1, "kkt": max(stat, comp), "multiplier": -nu}


# ---------------------------------------------------------------------------
# log-barrier interior point for:  min c.x  s.t.  A x <= b,  x'Px/2 + q.x + r <= 0
# ---------------------------------------------------------------------------

def _barrier_solve(c, A, b, P, q, r, x, scale, gap_tol, max_outer=80, max_newton=60):
    m = A.shape[0] + 1

    def slacks(z):
        return b - A @ z, -(0.5 * z @ P @ z + q @ z + r)

    s, sh = slacks(x)
    if np.any(s <= 0) or sh <= 0:
        raise ValueError("barrier start is not strictly feasible")
    t = m / scale
    for _ in range(max_outer):
        for _ in range(max_newton):
            s, sh = slacks(x)
            dh = P @ x + q
            grad = t * c + A.T @ (1.0 / s) + dh / sh
            H = (A.T * (1.0 / s ** 2)) @ A + np.outer(dh, dh) / sh ** 2 + P / sh
            try:
                dx = np.linalg.solve(H, -grad)
            except np.linalg.LinAlgError:
                dx = np.linalg.lstsq(H, -grad, rcond=None)[0]
            slope = float(grad @ dx)
            if -slope / 2.0 <= 1e-13:
                break
            alpha = 1.0
            while alpha > 1e-14:
                xn = x + alpha * dx
                sn, shn = slacks(xn)
                if np.all(sn > 0) and shn > 0:
                    # barrier change computed from ratios to avoid cancellation at large t
                    dphi = t * alpha * (c @ dx) - np.sum(np.log(sn / s)) - np.log(shn / sh)
                    if dphi <= 0.25 * alpha * slope:
                        break
                alpha *= 0.5
            else:
                break
            x = xn
        if m / t <= gap_tol:
            break
        t *= 10.0
    else:
        raise ConvergenceError("barrier method did not reach the target gap")
    s, sh = slacks(x)
    return x, 1.0 / (t * s), 1.0 / (t * sh), m / t


# ---------------------------------------------------------------------------
# cutting-plane (KLM) plan
# ---------------------------------------------------------------------------

class InfeasibleHistoryError(ValueError):
    """First-order history cannot come from an M-Lipschitz convex function."""

    def __init__(self, report: InterpolationReport, n_records: int):
        self.report = report
        super().__init__("history fails interpolation: " + report.describe(n_records))


@dataclass(frozen=True)
class KLMPlan:
    """Optimizer of the cutting-plane planning program.

    ``y`` is the next query point, ``theta = f_half - t`` the guarantee,
    ``coeffs`` the coordinates of ``y - x0`` in the orthonormal basis
    ``basis`` of the span of the observed subgradients.
    """

    y: np.ndarray
    zeta: float
    t: float
    theta: float
    f_half: float
    multipliers: np.ndarray = field(repr=False)
    gap: float = 0.0
    coeffs: np.ndarray = field(default=None, repr=False)
    basis: np.ndarray = field(default=None, repr=False)


def static_klm_plan(x0, M: float, R: float, N: int, f_ref: float = 0.0) -> KLMPlan:
    """The plan before any oracle call: ``theta = M R / sqrt(N + 1)`` at ``y = x0``."""
    x0 = as_vector(x0)
    zeta = R / np.sqrt(N + 1)
    theta = M * zeta
    return KLMPlan(x0.copy(), float(zeta), f_ref - theta, float(theta), f_ref,
                   np.zeros(0), 0.0, np.zeros(0), np.zeros((x0.size, 0)))


def _span_coordinates(G: np.ndarray):
    """Orthonormal coordinates for the span of the rows of ``G``.

    Returns ``(A, basis)`` with ``basis`` having orthonormal columns and
    ``A = G @ basis`` recomputed from it, so constraint values in
    coefficient space agree with the ambient ones to round-off even when
    ``G`` is nearly rank deficient.
    """
    U, s, _ = np.linalg.svd(G.T, full_matrices=False)
    smax = float(s[0]) if s.size else 0.0
    keep = s > max(1e-12 * smax, 1e-300)
    basis = U[:, keep]
    return G @ basis, basis


def solve_klm_plan(history: FirstOrderData, x0, M: float, R: float, N: int,
                   check: bool = True) -> KLMPlan:
    """Solve the planning program of the cutting-plane-like method at ``n = len(history)``.

    maximize ``f_half - t`` over ``(y, zeta, t)`` subject to
    ``t >= f_i + <g_i, y - x_i>``, ``f_half - M zeta <= t`` and
    ``||y - x0||^2 + (N - n + 1) zeta^2 <= R^2``, with ``y`` restricted to
    ``x0 + span{g_i}`` (which contains an optimizer).
    """
    n = len(history)
    if not 1 <= n <= N:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
    if M <= 0 or R <= 0:
        raise ValueError("M and R must be positive")
    x0 = as_vector(x0, history.points.shape[1])
    if check:
        rep = interpolation_check(FirstOrderData(history.points, history.values,
                                                 history.grads, M=M))
        if not rep.valid:
            raise InfeasibleHistoryError(rep, n)

    X, f, G = history.points, history.values, history.grads
    f_half = float(f.min())
    k = N - n + 1
    A, basis = _span_coordinates(G)
    rnk = A.shape[1]
    offs = f + np.einsum("ij,ij->i", G, x0 - X)

    # variables z = (beta, zeta, t); minimize t
    nv = rnk + 2
    cvec = np.zeros(nv)
    cvec[-1] = 1.0
    Alin = np.zeros((n + 1, nv))
    Alin[:n, :rnk] = A
    Alin[:n, -1] = -1.0
    Alin[n, rnk] = -M
    Alin[n, -1] = -1.0
    blin = np.concatenate([-offs, [-f_half]])
    P = np.zeros((nv, nv))
    P[:rnk, :rnk] = 2.0 * np.eye(rnk)
    P[rnk, rnk] = 2.0 * k
    q = np.zeros(nv)
    rr = -R ** 2

    scale = M * R
    z = np.zeros(nv)
    z[rnk] = R / (2.0 * np.sqrt(k))
    z[-1] = max(float(offs.max()), f_half - M * z[rnk]) + 0.1 * scale
    z, u, xi, gap = _barrier_solve(cvec, Alin, blin, P, q, rr, z, scale, 1e-12 * scale)
    beta, zeta, t = z[:rnk], float(z[rnk]), float(z[-1])
    y = x0 + basis @ beta
    return KLMPlan(y, zeta, t, f_half - t, f_half, np.concatenate([u, [xi]]), gap, beta, basis)


# ---------------------------------------------------------------------------
# proximal (SPPPA) plan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlanInputs:
    """Data of the proximal planning program for one iteration.

    Columns of ``Z`` are ``z_{i+1} - x0`` and columns of ``G`` are ``g_i``
    over the (possibly windowed) history; ``m`` indexes the incumbent within
    that window and ``offset`` is the history index of window entry 0.
    """

    x0: np.ndarray
    tau: np.ndarray
    f: np.ndarray
    q: np.ndarray
    a: np.ndarray
    b: np.ndarray
    Z: np.ndarray
    G: np.ndarray
    Y: np.ndarray
    m: int
    offset: int = 0

    @property
    def n(self) -> int:
        return self.tau.size

    @property
    def f_m(self) -> float:
        return float(self.f[self.m])

    @property
    def y_m(self) -> np.ndarray:
        return self.Y[:, self.m]


def plan_inputs(x0, ys, fs, gs, taus, zs, memory: int | None = None) -> PlanInputs:
    """Assemble :class:`PlanInputs` from a proximal history.

    ``ys``, ``gs`` hold ``y_i, g_i`` and ``zs`` holds ``z_{i+1}`` for
    ``i = 0..n-1``. With ``memory=k`` only the last ``k`` records are used.
    """
    x0 = as_vector(x0)
    d = x0.size
    Y = as_columns(ys, d)
    G = as_columns(gs, d)
    Zc = as_columns(zs, d)
    tau = np.asarray(taus, dtype=float).reshape(-1)
    f = np.asarray(fs, dtype=float).reshape(-1)
    n = f.size
    if not (Y.shape[1] == G.shape[1] == Zc.shape[1] == tau.size == n):
        raise DimensionError("history sequences have different lengths")
    if n == 0:
        raise ValueError("empty history")
    lo = 0 if memory is None else max(0, n - int(memory))
    Y, G, Zc, tau, f = Y[:, lo:], G[:, lo:], Zc[:, lo:], tau[lo:], f[lo:]
    m = int(np.argmin(f))
    Z = Zc - x0[:, None]
    q = f - np.einsum("ij,ij->j", G, Y - x0[:, None])
    a = 0.5 * np.sum(Z * Z, axis=0) + tau * (f - f[m])
    b = q - f[m]
    return PlanInputs(x0, tau, f, q, a, b, Z, G, Y, m, lo)


@dataclass(frozen=True)
class ProxPlan:
    """Solution and certificate of the proximal planning program.

    ``status`` is ``"optimal"``, ``"unbounded"`` (the incumbent is a
    minimizer) or ``"feasible"`` (a fixed feasible point such as the
    canonical one, with no dual information).
    """

    mu: np.ndarray
    lambda_star: np.ndarray
    tau_prime: float
    z_prime: np.ndarray
    epsilon: float
    xi: float
    w: np.ndarray
    status: str
    m: int
    xi_kkt: float = float("nan")
    iterations: int = 0


def _recession_direction(W, ct, col_scale, ktol=1e-9):
    """LP test for a ray of the planning program in scaled variables.

    Looks for ``w >= 0`` with ``sum(w) = 1`` whose image ``W w`` vanishes to
    ``ktol * col_scale`` in every coordinate, maximizing ``ct . w``; a ray
    exists when that maximum is nonnegative up to round-off. ``W`` is the
    triangular factor of the scaled columns, so ``||W w||`` equals the
    length of the combined vector without the precision loss of a Gram
    square root.
    """
    n2 = ct.size
    delta = ktol * col_scale
    A_ub = np.vstack([W, -W])
    b_ub = np.full(2 * W.shape[0], delta)
    res = linprog(-ct, A_ub=A_ub, b_ub=b_ub, A_eq=np.ones((1, n2)), b_eq=[1.0],
                  bounds=[(0, None)] * n2, method="highs")
    if res.status == 2:
        return None
    if res.status != 0:
        raise ConvergenceError(f"recession LP failed: {res.message}")
    cscale = max(float(np.max(np.abs(ct))), 1e-300)
    if -res.fun >= -ktol * cscale:
        return res.x
    return None


def solve_spppa_plan(inputs: PlanInputs, max_iter: int = 200) -> ProxPlan:
    """Maximize ``<tau, mu> + <1, lam>`` over ``mu, lam >= 0`` subject to
    ``||Z mu - G lam||^2 / 2 <= <mu, a> + <lam, b>``.

    With ``v = (mu, lam)``, ``p = (tau, 1)``, ``c = (a, b)`` and ``K`` the
    Gram matrix of ``[Z, -G]``, the optimal value equals
    ``1 / min {v'Kv / (2 c.v) : v >= 0, p.v = 1}``; the inner minimum is
    found by Dinkelbach's method, each step an exact simplex QP.
    """
    n = inputs.n
    B = np.hstack([inputs.Z, -inputs.G])
    p = np.concatenate([inputs.tau, np.ones(n)])
    c = np.concatenate([inputs.a, inputs.b])
    if np.any(p <= 0):
        raise ValueError("tau entries must be positive")
    K = B.T @ B
    D = 1.0 / p
    Kt = K * np.outer(D, D)
    ct = c * D

    col_scale = float(np.sqrt(np.max(np.diag(Kt))))
    if col_scale > 0:
        ray = _recession_direction(np.linalg.qr(B * D, mode="r"), ct, col_scale)
    else:
        ray = np.eye(2 * n)[0]
    if ray is not None:
        v = ray * D
        return ProxPlan(v[:n], v[n:], float("inf"), inputs.x0 + B @ v, 0.0, 0.0,
                        np.zeros_like(inputs.x0), "unbounded", inputs.m)

    # Dinkelbach on theta = min  w'Kt w / (2 ct.w)  over the simplex
    def ratio(u):
        cu = float(ct @ u)
        return 0.5 * float(u @ Kt @ u) / cu if cu > 0 else np.inf

    last = n - 1
    w = np.zeros(2 * n)
    w[last] = 1.0
    theta = ratio(w)
    it = 0
    for it in range(1, max_iter + 1):
        wn = simplex_qp(Kt, theta * ct)
        theta_new = ratio(wn)
        if theta_new > theta * (1.0 + 1e-12):
            break
        progressed = theta_new < theta * (1.0 - 4.0 * np.finfo(float).eps)
        w, theta = wn, theta_new
        if not progressed or theta <= 0:
            break
    else:
        raise ConvergenceError("Dinkelbach iteration did not converge")

    tau_prev = float(inputs.tau[last])
    if theta <= 0 or 1.0 / theta > UNBOUNDED_CAP * tau_prev:
        v = w * D
        return ProxPlan(v[:n], v[n:], float("inf"), inputs.x0 + B @ v, 0.0, 0.0,
                        np.zeros_like(inputs.x0), "unbounded", inputs.m, iterations=it)

    v = (w * D) / theta
    mu, lam = v[:n], v[n:]
    tau_prime = float(p @ v)
    dz = B @ v
    z_prime = inputs.x0 + dz
    eps = float(c @ v) - 0.5 * float(dz @ dz)
    xi = 2.0 * tau_prime / float(dz @ dz)
    # stationarity of the inner problem at w: gradient equals nu on the support, xi = theta / nu
    grad = Kt @ w - theta * ct
    nu = float(np.mean(grad[w > 0]))
    xi_kkt = theta / nu if nu > 0 else float("nan")
    return ProxPlan(mu, lam, tau_prime, z_prime, eps, xi, xi * dz, "optimal", inputs.m,
                    xi_kkt, it)


def canonical_plan(inputs: PlanInputs) -> ProxPlan:
    """The fixed feasible point ``mu = e_last, lam = 0`` with incumbent ``last``.

    Choosing the most recent record as incumbent makes the resulting step
    coincide with the optimized proximal point recurrence.
    """
    n = inputs.n
    mu = np.zeros(n)
    mu[-1] = 1.0
    lam = np.zeros(n)
    dz = inputs.Z[:, -1]
    eps = float(inputs.a[-1] - inputs.tau[-1] * (inputs.f[-1] - inputs.f_m)) - 0.5 * float(dz @ dz)
    return ProxPlan(mu, lam, float(inputs.tau[-1]), inputs.x0 + dz, eps, float("nan"),
                    np.full_like(dz, np.nan), "feasible", n - 1)


def certificate_H_prime(plan: ProxPlan, inputs: PlanInputs, rtol: float = 1e-9) -> float:
    """Recompute the certificate slack ``<mu,a> + <lam,b> - ||Z mu - G lam||^2 / 2``.

    Uses the ambient vectors directly and checks agreement with
    ``plan.epsilon``. For plans whose incumbent differs from ``inputs.m``
    the ``a``, ``b`` vectors are re-centred on ``plan.m``.
    """
    if plan.status == "unbounded":
        raise ValueError("no certificate for an unbounded plan")
    a, b = inputs.a, inputs.b
    if plan.m != inputs.m:
        shift = inputs.f[inputs.m] - inputs.f[plan.m]
        a = a + inputs.tau * shift
        b = b + shift
    dz = inputs.Z @ plan.mu - inputs.G @ plan.lambda_star
    lin = float(plan.mu @ a + plan.lambda_star @ b)
    eps = lin - 0.5 * float(dz @ dz)
    scale = max(float(plan.mu @ np.abs(a) + plan.lambda_star @ np.abs(b)),
                0.5 * float(dz @ dz), 1e-300)
    if abs(eps - plan.epsilon) > rtol * scale:
        raise AssertionError(f"certificate mismatch: {eps!r} vs {plan.epsilon!r}")
    return eps


def dual_residuals(plan: ProxPlan, inputs: PlanInputs, relative: bool = False) -> tuple[float, float]:
    """Largest violations of the two dual constraint families at ``(xi, w)``.

    ``tau + xi a - Z'w <= 0`` and ``1 + xi b + G'w <= 0``, evaluated with
    ambient inner products. With ``relative=True`` each entry is divided by
    the largest magnitude among its terms, which is the accuracy floor of
    the cancellation when ``xi`` is large.
    """
    za, gb = inputs.Z.T @ plan.w, inputs.G.T @ plan.w
    r1 = inputs.tau + plan.xi * inputs.a - za
    r2 = 1.0 + plan.xi * inputs.b + gb
    if relative:
        r1 = r1 / np.maximum.reduce([inputs.tau, np.abs(plan.xi * inputs.a), np.abs(za)])
        r2 = r2 / np.maximum.reduce([np.ones_like(gb), np.abs(plan.xi * inputs.b), np.abs(gb)])
    return float(np.max(r1)), float(np.max(r2))
