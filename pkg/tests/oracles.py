"""Independent reference computations used by the tests.

Each oracle takes a different route from the library code: exhaustive
support enumeration instead of an active-set walk, a primal equality
system instead of the simplex dual, and a general-purpose SQP solver
instead of the barrier or Dinkelbach iterations.
"""

from itertools import combinations

import numpy as np
from scipy.optimize import minimize


def enum_simplex_qp(Q, c):
    """Maximize ``c.l - l'Ql/2`` over the simplex by trying every support."""
    Q = np.asarray(Q, dtype=float)
    c = np.asarray(c, dtype=float)
    k = c.size
    best, best_val = None, -np.inf
    for size in range(1, k + 1):
        for S in combinations(range(k), size):
            S = list(S)
            # stationarity on S: Q_SS l_S + nu 1 = c_S, sum l_S = 1
            A = np.zeros((size + 1, size + 1))
            A[:size, :size] = Q[np.ix_(S, S)]
            A[:size, size] = 1.0
            A[size, :size] = 1.0
            rhs = np.concatenate([c[S], [1.0]])
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            if np.linalg.norm(A @ sol - rhs) > 1e-9 * (1 + np.abs(rhs).max()):
                continue
            lam = np.zeros(k)
            lam[S] = sol[:size]
            if lam.min() < -1e-12:
                continue
            lam = np.clip(lam, 0, None)
            lam /= lam.sum()
            val = c @ lam - 0.5 * lam @ Q @ lam
            if val > best_val + 1e-14:
                best, best_val = lam, val
    return best, best_val


def enum_prox(F, x, L):
    """Prox of a max-affine function by enumerating the active pieces at the output.

    For an active set ``S`` with weights ``l`` the output is
    ``y = x - sum_S l_i g_i / L`` and all pieces in ``S`` share the value
    ``t`` at ``y``; the candidate is kept when ``l >= 0`` and no other
    piece exceeds ``t``.
    """
    x = np.asarray(x, dtype=float)
    G, f0, Y = F.slopes, F.values, F.anchors
    k = f0.size
    best, best_obj = None, np.inf
    for size in range(1, k + 1):
        for S in combinations(range(k), size):
            S = list(S)
            GS = G[S]
            # unknowns (l_S, t): f_i + g_i.(x - y_i) - g_i.GS'l / L - t = 0, sum l = 1
            A = np.zeros((size + 1, size + 1))
            A[:size, :size] = -(GS @ GS.T) / L
            A[:size, size] = -1.0
            A[size, :size] = 1.0
            rhs = np.concatenate([-(f0[S] + np.einsum("ij,ij->i", GS, x - Y[S])), [1.0]])
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            if np.linalg.norm(A @ sol - rhs) > 1e-9 * (1 + np.abs(rhs).max()):
                continue
            lam = sol[:size]
            if lam.min() < -1e-10:
                continue
            y = x - lam @ GS / L
            vals = f0 + np.einsum("ij,ij->i", G, y - Y)
            t = vals.max()
            obj = t + 0.5 * L * np.sum((y - x) ** 2)
            if obj < best_obj - 1e-14:
                best, best_obj = y, obj
    return best, best_obj


def klm_plan_sqp(points, values, grads, x0, M, R, N):
    """Cutting-plane planning program solved with SLSQP in ambient coordinates.

    Returns ``theta = min(values) - t`` at the optimum.
    """
    X = np.asarray(points, dtype=float)
    f = np.asarray(values, dtype=float)
    G = np.asarray(grads, dtype=float)
    n, d = X.shape
    k = N - n + 1
    f_half = f.min()
    cons = [
        {"type": "ineq", "fun": lambda z: z[-1] - f - np.einsum("ij,j->i", G, z[:d]) + np.einsum("ij,ij->i", G, X)},
        {"type": "ineq", "fun": lambda z: np.array([z[-1] - f_half + M * z[d]])},
        {"type": "ineq", "fun": lambda z: np.array([R ** 2 - np.sum((z[:d] - x0) ** 2) - k * z[d] ** 2])},
    ]
    z0 = np.concatenate([x0, [R / (2 * np.sqrt(k))], [f.max() + M * R]])
    best = None
    for _ in range(3):
        res = minimize(lambda z: z[-1], z0, constraints=cons, method="SLSQP",
                       options={"ftol": 1e-14, "maxiter": 2000})
        if best is None or res.fun < best.fun:
            best = res
        z0 = res.x
    return f_half - best.fun


def spppa_plan_sqp(inputs):
    """Primal proximal planning program by SLSQP, started from the canonical point."""
    n = inputs.n
    B = np.hstack([inputs.Z, -inputs.G])
    p = np.concatenate([inputs.tau, np.ones(n)])
    c = np.concatenate([inputs.a, inputs.b])
    scale = 1.0 / p
    # optimize over u = v / scale so that the canonical start has unit entries
    cons = [{"type": "ineq",
             "fun": lambda u: np.array([c @ (u * scale) - 0.5 * np.sum((B @ (u * scale)) ** 2)])}]
    u0 = np.zeros(2 * n)
    u0[n - 1] = p[n - 1]
    res = minimize(lambda u: -(p @ (u * scale)), u0, constraints=cons,
                   bounds=[(0, None)] * (2 * n), method="SLSQP",
                   options={"ftol": 1e-15, "maxiter": 5000})
    return -res.fun, res.x * scale


def soft_threshold(x, t):
    return np.sign(x) * max(abs(x) - t, 0.0)
