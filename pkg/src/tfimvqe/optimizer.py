"""Deterministic local optimizers: L-BFGS (strong Wolfe) and a derivative-free
linear-approximation trust-region method in the COBYLA family.

Both return the best point evaluated, never raise on failed steps, and count
every objective evaluation so budgets are enforceable and comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_WOLFE_C1 = 1e-4
_WOLFE_C2 = 0.9
_LS_MAX_STEPS = 25  # bracketing extensions / zoom bisections before giving up
_CURVATURE_GUARD = 1e-10


@dataclass
class OptOptions:
    max_evals: int = 20000
    grad_tol: float = 1e-8  # L-BFGS: infinity norm of the gradient
    memory: int = 10  # L-BFGS: stored (s, y) pairs
    initial_trust_radius: float = 0.5  # COBYLA
    final_trust_radius: float = 1e-6  # COBYLA

    def __post_init__(self):
        if self.max_evals < 1:
            raise ValueError(f"max_evals must be positive, got {self.max_evals}")
        if self.grad_tol <= 0:
            raise ValueError(f"grad_tol must be positive, got {self.grad_tol}")
        if self.memory < 1:
            raise ValueError(f"memory must be positive, got {self.memory}")
        if not 0 < self.final_trust_radius <= self.initial_trust_radius:
            raise ValueError(
                "need 0 < final_trust_radius <= initial_trust_radius, got "
                f"{self.final_trust_radius} vs {self.initial_trust_radius}"
            )


@dataclass
class OptResult:
    x_best: np.ndarray
    f_best: float
    n_evals: int
    n_grad_evals: int
    converged: bool
    termination_reason: str  # tolerance | max_evals | trust_radius | line_search_failure
    n_iters: int = 0
    f_history: tuple[float, ...] = field(default=())  # accepted iterate values


class _BudgetExhausted(Exception):
    pass


def _check_x0(x0) -> np.ndarray:
    x = np.array(x0, dtype=np.float64, copy=True)
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"x0 must be a nonempty 1-D array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")
    return x


def lbfgs_minimize(objective, gradient, x0, opts: OptOptions | None = None,
                   *, value_and_gradient=None) -> OptResult:
    """Limited-memory BFGS with a strong-Wolfe line search.

    `value_and_gradient`, when given, replaces separate objective/gradient
    calls with one fused evaluation (counted as one of each).
    """
    opts = opts or OptOptions()
    x = _check_x0(x0)
    if value_and_gradient is None and (objective is None or gradient is None):
        raise ValueError("need objective and gradient, or value_and_gradient")

    counters = {"f": 0, "g": 0}
    best = {"x": x.copy(), "f": math.inf}

    def vg(z):
        if counters["f"] >= opts.max_evals:
            raise _BudgetExhausted
        counters["f"] += 1
        counters["g"] += 1
        if value_and_gradient is not None:
            fv, gv = value_and_gradient(z)
        else:
            fv, gv = objective(z), gradient(z)
        fv = float(fv)
        gv = np.asarray(gv, dtype=np.float64)
        if not math.isfinite(fv):
            raise ValueError(f"objective returned non-finite value {fv}")
        if fv < best["f"]:
            best["f"], best["x"] = fv, np.array(z, copy=True)
        return fv, gv

    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    rho_hist: list[float] = []
    converged = False
    reason = "max_evals"
    n_iters = 0
    history: list[float] = []
    try:
        f, g = vg(x)
        history.append(f)
        while True:
            if float(np.max(np.abs(g))) < opts.grad_tol:
                converged, reason = True, "tolerance"
                break
            d = _two_loop_direction(g, s_hist, y_hist, rho_hist)
            dg = float(np.dot(d, g))
            if dg >= 0:  # curvature information went bad; fall back to steepest descent
                s_hist.clear(); y_hist.clear(); rho_hist.clear()
                d = -g
                dg = -float(np.dot(g, g))
            alpha0 = 1.0 if s_hist else min(1.0, 1.0 / max(float(np.linalg.norm(g)), 1e-12))
            step = _strong_wolfe(vg, x, f, g, d, dg, alpha0)
            if step is None:
                reason = "line_search_failure"
                break
            x_new, f_new, g_new = step
            s = x_new - x
            y = g_new - g
            sy = float(np.dot(s, y))
            if sy > _CURVATURE_GUARD * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
                s_hist.append(s)
                y_hist.append(y)
                rho_hist.append(1.0 / sy)
                if len(s_hist) > opts.memory:
                    s_hist.pop(0); y_hist.pop(0); rho_hist.pop(0)
            x, f, g = x_new, f_new, g_new
            n_iters += 1
            history.append(f)
    except _BudgetExhausted:
        reason = "max_evals"
    return OptResult(best["x"], best["f"], counters["f"], counters["g"],
                     converged, reason, n_iters, tuple(history))


def _two_loop_direction(g, s_hist, y_hist, rho_hist) -> np.ndarray:
    q = -g.copy()
    if not s_hist:
        return q
    alphas = []
    for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
        a = rho * float(np.dot(s, q))
        alphas.append(a)
        q -= a * y
    s, y = s_hist[-1], y_hist[-1]
    q *= float(np.dot(s, y)) / float(np.dot(y, y))  # H0 scaling
    for (s, y, rho), a in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
        b = rho * float(np.dot(y, q))
        q += (a - b) * s
    return q


def _cubic_argmin(a, fa, da, b, fb, db):
    # minimizer of the cubic interpolant through (a, fa, da), (b, fb, db)
    d1 = da + db - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - da * db
    if disc < 0:
        return None
    d2 = math.copysign(math.sqrt(disc), b - a)
    denom = db - da + 2.0 * d2
    if denom == 0:
        return None
    t = b - (b - a) * (db + d2 - d1) / denom
    return t if math.isfinite(t) else None


def _strong_wolfe(vg, x, f0, g0, d, dg0, alpha0):
    """Nocedal-Wright bracketing line search; returns (x_new, f_new, g_new) or None."""

    def phi(alpha):
        xa = x + alpha * d
        fa, ga = vg(xa)
        return xa, fa, ga, float(np.dot(ga, d))

    alpha_prev, f_prev, dg_prev = 0.0, f0, dg0
    alpha = alpha0
    for i in range(_LS_MAX_STEPS):
        xa, fa, ga, dga = phi(alpha)
        if fa > f0 + _WOLFE_C1 * alpha * dg0 or (i > 0 and fa >= f_prev):
            return _zoom(phi, f0, dg0, alpha_prev, f_prev, dg_prev, alpha, fa, dga)
        if abs(dga) <= -_WOLFE_C2 * dg0:
            return xa, fa, ga
        if dga >= 0:
            return _zoom(phi, f0, dg0, alpha, fa, dga, alpha_prev, f_prev, dg_prev)
        alpha_prev, f_prev, dg_prev = alpha, fa, dga
        alpha *= 2.0
    return None


def _zoom(phi, f0, dg0, lo, f_lo, dg_lo, hi, f_hi, dg_hi):
    result_lo = None
    for _ in range(_LS_MAX_STEPS):
        alpha = _cubic_argmin(lo, f_lo, dg_lo, hi, f_hi, dg_hi)
        width = abs(hi - lo)
        inner_lo, inner_hi = min(lo, hi) + 0.1 * width, max(lo, hi) - 0.1 * width
        if alpha is None or not inner_lo <= alpha <= inner_hi:
            alpha = 0.5 * (lo + hi)
        xa, fa, ga, dga = phi(alpha)
        if fa > f0 + _WOLFE_C1 * alpha * dg0 or fa >= f_lo:
            hi, f_hi, dg_hi = alpha, fa, dga
        else:
            if abs(dga) <= -_WOLFE_C2 * dg0:
                return xa, fa, ga
            if dga * (hi - lo) >= 0:
                hi, f_hi, dg_hi = lo, f_lo, dg_lo
            lo, f_lo, dg_lo = alpha, fa, dga
            result_lo = (xa, fa, ga)
        if width < 1e-14 * max(1.0, abs(lo)):
            break
    # Wolfe could not be certified; accept a strict-decrease point if we saw one.
    if result_lo is not None and result_lo[1] < f0:
        return result_lo
    return None


def cobyla_minimize(objective, x0, opts: OptOptions | None = None) -> OptResult:
    """Derivative-free minimization via linear interpolation models on a simplex.

    Maintains n+1 points, fits a linear model, and takes steps of the current
    trust radius along its negative gradient; the radius shrinks from
    initial_trust_radius to final_trust_radius as progress stalls.  Vertices
    that drift too far or too close get repositioned one at a time; a
    rank-deficient simplex is rebuilt outright around the incumbent, since
    single-vertex patches cannot fix collinearity among the remaining
    vertices.  Unconstrained.
    """
    opts = opts or OptOptions()
    x0 = _check_x0(x0)
    n = x0.size
    rho = opts.initial_trust_radius
    rho_end = opts.final_trust_radius

    counters = {"f": 0}
    best = {"x": x0.copy(), "f": math.inf}

    def feval(z):
        if counters["f"] >= opts.max_evals:
            raise _BudgetExhausted
        counters["f"] += 1
        v = float(objective(z))
        if not math.isfinite(v):
            raise ValueError(f"objective returned non-finite value {v}")
        if v < best["f"]:
            best["f"], best["x"] = v, z.copy()
        return v

    converged = False
    reason = "max_evals"
    n_iters = 0
    try:
        sim = np.empty((n + 1, n))
        fvals = np.empty(n + 1)
        sim[0] = x0
        fvals[0] = feval(x0)
        for i in range(n):
            v = x0.copy()
            v[i] += rho
            sim[i + 1] = v
            fvals[i + 1] = feval(v)

        while True:
            n_iters += 1
            ib = int(np.argmin(fvals))
            if ib != 0:
                sim[[0, ib]] = sim[[ib, 0]]
                fvals[[0, ib]] = fvals[[ib, 0]]
            span = sim[1:] - sim[0]
            dists = np.linalg.norm(span, axis=1)

            fix = _distance_defect(span, dists, rho)
            if fix is not None:
                j, u = fix
                g_hint = _model_gradient(span, fvals)
                if g_hint is not None and float(np.dot(g_hint, u)) > 0:
                    u = -u
                xg = sim[0] + rho * u
                fg = feval(xg)
                sim[j + 1] = xg
                fvals[j + 1] = fg
                continue

            if np.linalg.svd(span, compute_uv=False)[-1] < 0.25 * rho:
                g_hint = _model_gradient(span, fvals)
                for i in range(n):
                    v = sim[0].copy()
                    v[i] += -rho if (g_hint is not None and g_hint[i] > 0) else rho
                    sim[i + 1] = v
                    fvals[i + 1] = feval(v)
                continue

            g = _model_gradient(span, fvals)
            gnorm = 0.0 if g is None else float(np.linalg.norm(g))
            improved = False
            if gnorm > 1e-300:
                xt = sim[0] - (rho / gnorm) * g
                ft = feval(xt)
                jw = int(np.argmax(fvals[1:])) + 1
                if ft < fvals[jw]:
                    sim[jw] = xt
                    fvals[jw] = ft
                improved = fvals[0] - ft > 0.1 * rho * gnorm
            if improved:
                continue
            if rho <= rho_end * (1.0 + 1e-12):
                converged, reason = True, "trust_radius"
                break
            rho = max(0.5 * rho, rho_end)
    except _BudgetExhausted:
        reason = "max_evals"
    return OptResult(best["x"], best["f"], counters["f"], 0, converged, reason, n_iters)


def _model_gradient(span, fvals):
    try:
        return np.linalg.solve(span, fvals[1:] - fvals[0])
    except np.linalg.LinAlgError:
        return None


def _distance_defect(span, dists, rho):
    """(vertex offset j, unit direction u) for the worst vertex-distance
    violation, or None when all vertices sit within [0.5, 2.1] * rho of the
    incumbent."""
    j = int(np.argmax(dists))
    if dists[j] > 2.1 * rho:
        return j, span[j] / dists[j]
    j = int(np.argmin(dists))
    if dists[j] < 0.5 * rho:
        if dists[j] > 1e-300:
            return j, span[j] / dists[j]
        u = np.zeros(span.shape[1])
        u[j % span.shape[1]] = 1.0
        return j, u
    return None
