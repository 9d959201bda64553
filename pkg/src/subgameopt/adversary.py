"""Worst-case instances consistent with an observed history, and their verifiers.

Given the first ``n`` oracle responses seen by KLM or SPPPA, the builders
extend the history by future records along fresh orthonormal directions and
add a minimizer record, producing a max-affine function on which *every*
span method that agrees with the history ends with a gap no smaller than the
method's current guarantee. The verifiers re-derive the equalities that make
the bound tight and test the one-new-direction-per-query property.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import as_columns, as_vector, orthonormal_basis, orthonormal_complement, span_residual
from .maxaffine import FirstOrderData, MaxAffine, interpolation_check, random_instance
from .methods import (
    ProxTrace,
    as_schedule,
    guarantee_psi,
    run_klm,
    run_spppa,
    run_subgradient,
)
from .plansolve import (
    KLMPlan,
    ProxPlan,
    canonical_plan,
    solve_spppa_plan,
    static_klm_plan,
)

__all__ = [
    "HardInstance",
    "NoHardInstanceError",
    "build_klm_hard",
    "build_spppa_hard",
    "hard_records",
    "TightnessReport",
    "verify_tightness",
    "ZeroChainReport",
    "verify_zero_chain",
    "SelfplayReport",
    "selfplay",
]


class NoHardInstanceError(ValueError):
    """The plan is unbounded: the incumbent already minimizes every consistent function."""


@dataclass
class HardInstance:
    """A max-affine function built to match a guarantee.

    Pieces are ordered past records, future records ``n..N``, then the
    minimizer piece (zero slope). ``future`` maps names (``x``, ``f``,
    ``g`` and, for the proximal flavor, ``y``, ``tau``, ``z``) to arrays
    whose row ``k`` belongs to index ``n + k``. ``past`` holds the history in
    the same layout (rows ``0..n-1``). ``E`` has the fresh directions
    ``e_n..e_N`` as columns.
    """

    flavor: str
    F: MaxAffine
    x0: np.ndarray
    minimizer: np.ndarray
    f_star: float
    certified_gap: float
    guarantee: float
    n: int
    N: int
    past: dict
    future: dict
    E: np.ndarray
    M: float | None = None
    R: float | None = None
    L: np.ndarray | None = None
    plan: object = field(default=None, repr=False)
    padded_from: int | None = None

    @property
    def dim(self) -> int:
        return self.x0.size


def _pad(v: np.ndarray, d: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1] == d:
        return v
    width = [(0, 0)] * (v.ndim - 1) + [(0, d - v.shape[-1])]
    return np.pad(v, width)


def _target_dim(G_rows: np.ndarray, d: int, k: int, d_ambient: int | None):
    rank = orthonormal_basis(G_rows.T if G_rows.size else np.zeros((d, 0))).shape[1]
    need = rank + k
    target = d if d_ambient is None else int(d_ambient)
    if target < d:
        raise ValueError("d_ambient is smaller than the data dimension")
    if target < need:
        warnings.warn(f"ambient dimension {target} too small; zero-padding to {need}",
                      RuntimeWarning, stacklevel=3)
        target = need
    return target


def build_klm_hard(history: FirstOrderData, plan: KLMPlan | None, x0, M: float, R: float,
                   N: int, d_ambient: int | None = None) -> HardInstance:
    """Hard instance for the cutting-plane method after ``n = len(history)`` responses.

    The future points step from the plan's ``y`` by ``theta / M`` along fresh
    orthonormal directions ``e_n..e_N``, all with value ``f_{n-1/2}`` and
    slope ``M e_i``; the minimizer sits one more step away with value ``t``.
    With ``n = 0`` the plan is the static one and ``history`` may be empty.
    """
    x0 = as_vector(x0)
    d = x0.size
    n = len(history)
    if n > N:
        raise ValueError("history longer than the horizon")
    if plan is None:
        if n:
            raise ValueError("a plan is required when the history is nonempty")
        plan = static_klm_plan(x0, M, R, N)
    X = history.points.reshape(n, -1) if n else np.zeros((0, d))
    Fv = np.asarray(history.values, dtype=float).reshape(-1)
    G = history.grads.reshape(n, -1) if n else np.zeros((0, d))
    k = N - n + 1
    D = _target_dim(G, d, k, d_ambient)
    padded = d if D != d else None
    x0, X, G, y = _pad(x0, D), _pad(X, D), _pad(G, D), _pad(plan.y, D)
    E = orthonormal_complement(G.T, k, D)

    step = plan.theta / M
    fx = np.zeros((k, D))
    cur = y.copy()
    for r in range(k):
        fx[r] = cur
        cur = cur - step * E[:, r]
    x_star = cur
    f_star = float(plan.t)
    ff = np.full(k, float(plan.f_half))
    fg = M * E.T

    values = np.concatenate([Fv, ff, [f_star]])
    slopes = np.vstack([G, fg, np.zeros((1, D))])
    anchors = np.vstack([X, fx, x_star[None, :]])
    F = MaxAffine(values, slopes, anchors)
    return HardInstance("klm", F, x0, x_star, f_star, float(plan.theta), float(plan.theta),
                        n, N, {"x": X, "f": Fv, "g": G}, {"x": fx, "f": ff, "g": fg}, E,
                        M=M, R=R, plan=plan, padded_from=padded)


def build_spppa_hard(trace: ProxTrace | None, n: int, plan: ProxPlan | None, L, N: int,
                     x0=None, d_ambient: int | None = None, f_ref: float = 0.0) -> HardInstance:
    """Hard instance for the proximal planning method after ``n`` iterations.

    Uses the first ``n`` rows of ``trace`` and the plan of iteration ``n``
    (``mu, lambda, tau', z', xi``). Future records follow the proximal
    recurrence from ``(tau', f_m, y_m, z')`` with slopes along fresh
    orthonormal directions, sized so that every step is tight; the
    minimizer is ``y_star = z_{N+1}`` with value ``f_m - 1/xi``.

    With ``n = 0`` no history is needed (pass ``x0``); the construction then
    starts from ``tau' = 0``, ``z' = x0`` and a unit gap below ``f_ref``.
    """
    Ls = as_schedule(L, N)
    if n == 0:
        if x0 is None:
            if trace is None:
                raise ValueError("x0 is required when n = 0 and no trace is given")
            x0 = trace.x0
        x0 = as_vector(x0)
        d = x0.size
        Gp = np.zeros((0, d))
        past = {k: np.zeros((0, d)) for k in ("x", "y", "g", "z")}
        past.update(f=np.zeros(0), tau=np.zeros(0))
        tau_p, f_m, y_m, z_p, f_star = 0.0, f_ref, x0, x0, f_ref - 1.0
        plan = None
    else:
        if trace is None or trace.n_iter < n:
            raise ValueError(f"trace has fewer than {n} iterations")
        x0 = trace.x0
        d = x0.size
        if plan is None:
            plan = solve_spppa_plan(trace.inputs(n))
        if plan.status == "unbounded":
            raise NoHardInstanceError("plan is unbounded; the incumbent is a minimizer")
        if not plan.xi > 0:
            raise ValueError("plan carries no positive dual scalar xi")
        past = {"x": trace.x[:n], "y": trace.y[:n], "f": trace.f[:n], "g": trace.g[:n],
                "tau": trace.tau[:n], "z": trace.z[:n]}
        Gp = past["g"]
        tau_p = float(plan.tau_prime)
        f_m = float(past["f"][plan.m])
        y_m = past["y"][plan.m]
        z_p = plan.z_prime
        f_star = f_m - 1.0 / plan.xi

    k = N - n + 1
    D = _target_dim(Gp, d, k, d_ambient)
    padded = d if D != d else None
    x0 = _pad(x0, D)
    past = {key: (_pad(v, D) if v.ndim == 2 else v) for key, v in past.items()}
    y_m, z_p = _pad(y_m, D), _pad(z_p, D)
    E = orthonormal_complement(past["g"].T, k, D)

    fut = {key: np.zeros((k, D)) for key in ("x", "y", "g", "z")}
    fut["f"] = np.zeros(k)
    fut["tau"] = np.zeros(k)
    t_prev, f_prev, y_prev, z_cur = tau_p, f_m, y_m, z_p
    for r in range(k):
        i = n + r
        Li = Ls[i]
        if f_prev - f_star <= 0:
            raise ValueError(f"nonpositive gap f_{i - 1} - f_star = {f_prev - f_star:.3e}")
        t_i = t_prev + (1.0 + np.sqrt(1.0 + 2.0 * Li * t_prev)) / Li
        x_i = (t_prev / t_i) * y_prev + ((t_i - t_prev) / t_i) * z_cur
        g_i = np.sqrt((f_prev - f_star) / (t_i - t_prev)) * E[:, r]
        f_i = f_prev - float(g_i @ g_i) / Li
        y_i = x_i - g_i / Li
        z_cur = z_cur - (t_i - t_prev) * g_i
        fut["tau"][r], fut["x"][r], fut["g"][r] = t_i, x_i, g_i
        fut["f"][r], fut["y"][r], fut["z"][r] = f_i, y_i, z_cur
        t_prev, f_prev, y_prev = t_i, f_i, y_i
    y_star = z_cur

    values = np.concatenate([past["f"], fut["f"], [f_star]])
    slopes = np.vstack([past["g"], fut["g"], np.zeros((1, D))])
    anchors = np.vstack([past["y"], fut["y"], y_star[None, :]])
    F = MaxAffine(values, slopes, anchors)
    psi = 1.0 / float(fut["tau"][-1])
    r0 = 0.5 * float(np.sum((x0 - y_star) ** 2))
    inst = HardInstance("spppa", F, x0, y_star, float(f_star), psi * r0, psi, n, N, past, fut, E,
                        L=Ls, plan=plan, padded_from=padded)
    inst.future["tau_prime"] = tau_p
    inst.future["m"] = -1 if plan is None else int(plan.m)
    return inst


def hard_records(inst: HardInstance) -> FirstOrderData:
    """Past, future and minimizer records of a hard instance (for interpolation checks)."""
    key = "x" if inst.flavor == "klm" else "y"
    pts = np.vstack([inst.past[key], inst.future[key]])
    vals = np.concatenate([inst.past["f"], inst.future["f"]])
    grads = np.vstack([inst.past["g"], inst.future["g"]])
    return FirstOrderData(pts, vals, grads, x_star=inst.minimizer, f_star=inst.f_star, M=inst.M)


# ---------------------------------------------------------------------------
# tightness
# ---------------------------------------------------------------------------

@dataclass
class TightnessReport:
    """Residuals of the equalities that make a hard instance tight.

    ``residuals`` maps a name to the largest absolute residual of that
    family; ``passed`` compares each against ``tol``. ``A`` and ``delta``
    are the sequences ``tau_i (f_i - f_star)`` and ``tau_i - tau_{i-1}``
    (proximal flavor only).
    """

    flavor: str
    residuals: dict
    tol: float
    scale: float
    violations: list
    A: np.ndarray | None = None
    delta: np.ndarray | None = None

    @property
    def passed(self) -> bool:
        return not self.violations


def _q(f_a, f_b, g_b, p_a, p_b):
    return f_a - f_b - float(g_b @ (p_a - p_b))


def verify_tightness(inst: HardInstance, rtol: float | None = None) -> TightnessReport:
    """Recompute the tightness equalities of a built instance.

    Cutting-plane flavor: ``Q_{i,j} = 0`` for future ``i < j``,
    ``Q_{star,i} = 0``, ``||g_i|| = M``, ``F(x_i) = f_i`` and
    ``F(x_N) - f_star = certified_gap``.

    Proximal flavor: ``Q_{m,n}``, ``Q_{i-1,i}``, ``Q_{star,i}`` and the
    potential ``H_i`` vanish; the inner-product identities for ``j < i``
    hold; ``tau_i (f_i - f_star)`` is nondecreasing and starts above
    ``tau' (f_m - f_star)``.
    """
    fut, past = inst.future, inst.past
    n, N = inst.n, inst.N
    k = N - n + 1
    res: dict[str, float] = {}
    A = delta = None
    if inst.flavor == "klm":
        rtol = 1e-8 if rtol is None else rtol
        M = inst.M
        scale = max(1.0, M * inst.R, float(np.max(np.abs(inst.F.values))))
        X, f, G = fut["x"], fut["f"], fut["g"]
        q_fwd = [abs(_q(f[a], f[b], G[b], X[a], X[b])) for a in range(k) for b in range(a + 1, k)]
        res["Q_future"] = max(q_fwd, default=0.0)
        res["Q_star"] = max(abs(_q(inst.f_star, f[b], G[b], inst.minimizer, X[b])) for b in range(k))
        res["S_future"] = float(np.max(np.abs(M ** 2 - np.sum(G * G, axis=1)))) / M
        res["values"] = max(abs(inst.F(X[b]) - f[b]) for b in range(k))
        res["gap"] = abs(inst.F(X[-1]) - inst.f_star - inst.certified_gap)
        res["distance_excess"] = max(0.0, float(np.linalg.norm(inst.x0 - inst.minimizer)) - inst.R)
    elif inst.flavor == "spppa":
        rtol = 1e-7 if rtol is None else rtol
        Y, f, G, tau, Z = fut["y"], fut["f"], fut["g"], fut["tau"], fut["z"]
        fs, ys = inst.f_star, inst.minimizer
        tau_p = fut["tau_prime"]
        fscale = max(1.0, float(np.max(np.abs(inst.F.values))),
                     float(np.max(np.linalg.norm(inst.F.slopes, axis=1)
                                  * (1.0 + np.linalg.norm(inst.F.anchors, axis=1)))))
        r0 = 0.5 * float(np.sum((inst.x0 - ys) ** 2))
        hscale = max(r0, float(tau[-1]) * fscale)
        scale = fscale
        qs = [abs(_q(f[r - 1], f[r], G[r], Y[r - 1], Y[r])) for r in range(1, k)]
        if n > 0:
            m = fut["m"]
            qs.append(abs(_q(past["f"][m], f[0], G[0], past["y"][m], Y[0])))
        res["Q_chain"] = max(qs, default=0.0)
        res["Q_star"] = max(abs(_q(fs, f[r], G[r], ys, Y[r])) for r in range(k))
        H = tau * (fs - f) + r0 - 0.5 * np.sum((Z - ys) ** 2, axis=1)
        res["H"] = float(np.max(np.abs(H))) * fscale / hscale
        # inner products <g_j, y_i - y_j>, j < i, i >= n
        lem6 = 0.0
        z_p = inst.plan.z_prime if inst.plan is not None else inst.x0
        z_p = _pad(z_p, inst.dim)
        y_m = past["y"][fut["m"]] if n > 0 else inst.x0
        for r in range(k):
            yi, ti = Y[r], tau[r]
            for j in range(n):
                gj, yj = past["g"][j], past["y"][j]
                lhs = float(gj @ (yi - yj))
                rhs = float(gj @ (z_p - yj)) + (tau_p / ti) * float(gj @ (y_m - z_p))
                lem6 = max(lem6, abs(lhs - rhs))
            for s in range(r):
                lhs = float(G[s] @ (yi - Y[s]))
                rhs = -((ti - tau[s]) / ti) * (f[s] - fs)
                lem6 = max(lem6, abs(lhs - rhs))
        res["inner_products"] = lem6
        A = tau * (f - fs)
        start = tau_p * ((past["f"][fut["m"]] if n > 0 else 0.0) - fs) if n > 0 else 0.0
        drops = np.concatenate([[A[0] - start], np.diff(A)])
        res["monotonicity"] = float(max(0.0, -drops.min())) * fscale / hscale
        delta = np.diff(np.concatenate([[tau_p], tau]))
    else:
        raise ValueError(f"unknown flavor {inst.flavor!r}")
    tol = rtol * scale
    violations = [name for name, v in res.items() if not v <= tol]
    return TightnessReport(inst.flavor, res, tol, scale, violations, A, delta)


# ---------------------------------------------------------------------------
# zero chain
# ---------------------------------------------------------------------------

@dataclass
class ZeroChainReport:
    """Largest projection residual per level ``j`` (queries in the span of ``g_0..g_{j-1}``)."""

    flavor: str
    levels: np.ndarray
    residuals: np.ndarray
    tol: float
    n_samples: int

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tol)


def verify_zero_chain(inst: HardInstance, L=None, n_samples: int = 50, seed: int = 0,
                      tol: float = 1e-8) -> ZeroChainReport:
    """Check that queries in ``x0 + span{g_0..g_{j-1}}`` only reveal ``g_j``.

    For each level ``j = n..N-1`` the construction point and ``n_samples``
    random points of that affine span are queried. Cutting-plane flavor: the
    lowest-index subgradient must lie in ``span{g_0..g_j}``. Proximal flavor:
    the prox with parameter ``L_j`` must lie in ``x0 + span{g_0..g_j}``.
    Residuals are relative to the size of the returned vector.
    """
    rng = np.random.default_rng(seed)
    if inst.flavor == "spppa":
        Ls = as_schedule(inst.L if L is None else L, inst.N)
    grads = np.vstack([inst.past["g"], inst.future["g"]])
    pts = np.vstack([inst.past["x"], inst.future["x"]])
    radius = 1.0 + float(np.linalg.norm(inst.x0 - inst.minimizer))
    levels = np.arange(inst.n, inst.N)
    out = np.zeros(levels.size)
    for li, j in enumerate(levels):
        basis = orthonormal_basis(grads[:j].T) if j else np.zeros((inst.dim, 0))
        keep = as_columns(grads[: j + 1].T, inst.dim)
        samples = [pts[j]]
        for _ in range(n_samples):
            c = rng.standard_normal(basis.shape[1]) * radius
            samples.append(inst.x0 + basis @ c)
        worst = 0.0
        for x in samples:
            if inst.flavor == "klm":
                v = inst.F.subgradient(x, "lowest")
            else:
                v = inst.F.prox(x, Ls[j]).y - inst.x0
            r = span_residual(v, keep) / max(1.0, float(np.linalg.norm(v)))
            worst = max(worst, r)
        out[li] = worst
    return ZeroChainReport(inst.flavor, levels, out, tol, n_samples)


# ---------------------------------------------------------------------------
# self-play
# ---------------------------------------------------------------------------

@dataclass
class SelfplayReport:
    """Outcome of replaying a method and an opponent on the hard instance.

    Gaps are ``F(output) - f_star`` for the cutting-plane flavor and the
    normalized ``(F(output) - f_star) / (||x0 - y_star||^2 / 2)`` for the
    proximal flavor; ``guarantee`` is ``theta_n`` or ``psi_n`` on the same
    scale.
    """

    algorithm: str
    n: int
    N: int
    guarantee: float
    continued_gap: float
    opponent_gap: float
    tol: float
    instance: HardInstance = field(repr=False)
    discrepancies: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.discrepancies

    def summary(self) -> dict:
        return {"algorithm": self.algorithm, "n": self.n, "N": self.N,
                "guarantee": self.guarantee, "continued_gap": self.continued_gap,
                "opponent_gap": self.opponent_gap, "tol": self.tol,
                "passed": self.passed, "discrepancies": list(self.discrepancies)}


def selfplay(algorithm: str, n: int, N: int, seed: int = 0, dim: int = 6, n_pieces: int = 8,
             M: float = 1.0, R: float = 1.0, L=1.0, opponent: str | None = None,
             rtol: float = 1e-6) -> SelfplayReport:
    """Certify subgame perfection at checkpoint ``n`` on a seeded random instance.

    The method runs on the seed instance, its first ``n`` responses define a
    hard instance, then (a) the same method rerun on the hard instance must
    end exactly at its guarantee, and (b) an opponent span method that
    agrees with the history (``"subgradient"`` for KLM, ``"oppa"`` for SPPPA)
    must do no better.
    """
    if not 0 <= n <= N:
        raise ValueError(f"checkpoint n={n} outside [0, {N}]")
    rng = np.random.default_rng(seed)
    seed_inst = random_instance(rng, dim, n_pieces, M, R)
    disc: list[str] = []
    if algorithm == "klm":
        opponent = opponent or "subgradient"
        if opponent != "subgradient":
            raise ValueError("the cutting-plane opponent is the subgradient method")
        tr = run_klm(seed_inst.F.oracle("anchor"), seed_inst.x0, M, R, N)
        inst = build_klm_hard(tr.history(n), tr.plans[n], seed_inst.x0, M, R, N)
        x0 = inst.x0
        forced = list(inst.past["x"])
        cont = run_klm(inst.F.oracle("anchor"), x0, M, R, N, forced=forced)
        cont_gap = inst.F(cont.x[-1]) - inst.f_star
        opp = run_subgradient(inst.F.oracle("anchor"), x0, R / (M * np.sqrt(N + 1)), N,
                              forced=forced)
        opp_gap = inst.F(opp.x[-1]) - inst.f_star
        guarantee = inst.certified_gap
        tol = rtol * M * R
        if np.any(np.abs(cont.f[:n] - tr.f[:n]) > tol):
            disc.append("hard instance does not reproduce the observed values")
    elif algorithm == "spppa":
        opponent = opponent or "oppa"
        if opponent != "oppa":
            raise ValueError("the proximal opponent is the optimized proximal point recurrence")
        Ls = as_schedule(L, N)
        tr = run_spppa(seed_inst.F.prox_oracle(), seed_inst.x0, Ls, N)
        if n > 0 and len(tr.plans) < n:
            raise NoHardInstanceError("the seed run found a minimizer before the checkpoint")
        plan = tr.plans[n - 1] if n > 0 else None
        inst = build_spppa_hard(tr, n, plan, Ls, N, x0=seed_inst.x0)
        x0 = inst.x0
        r0 = 0.5 * float(np.sum((x0 - inst.minimizer) ** 2))
        cont = run_spppa(inst.F.prox_oracle(), x0, Ls, N)
        cont_gap = (cont.f_output - inst.f_star) / r0
        if cont.status != "completed":
            disc.append("continued run stopped early on the hard instance")

        def switch(it, inputs):
            return solve_spppa_plan(inputs) if it < n else canonical_plan(inputs)

        opp = run_spppa(inst.F.prox_oracle(), x0, Ls, N, planner=switch)
        opp_gap = (opp.f_output - inst.f_star) / r0
        guarantee = inst.guarantee
        tol = rtol * guarantee
        if n > 0 and np.any(np.abs(cont.f[:n] - tr.f[:n]) > 1e-8 * (1 + np.abs(tr.f[:n]))):
            disc.append("hard instance does not reproduce the observed values")
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if abs(cont_gap - guarantee) > tol:
        disc.append(f"continued gap {cont_gap:.12g} differs from guarantee {guarantee:.12g}")
    if opp_gap < guarantee - tol:
        disc.append(f"opponent gap {opp_gap:.12g} below guarantee {guarantee:.12g}")
    return SelfplayReport(algorithm, n, N, float(guarantee), float(cont_gap), float(opp_gap),
                          float(tol), inst, disc)
