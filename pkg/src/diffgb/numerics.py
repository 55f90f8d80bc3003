"""Floating-point execution of generated schemes on 1-D grids.

Schemes are compiled to stencil updates with exact rational coefficient
evaluation (one rounding per coefficient).  The Riemann problem for the
inviscid Burgers equation has the closed-form moving-shock solution used
both for initial/ghost data and for error metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .schemegen import ProductScheme, Scheme


def heaviside(y: float) -> float:
    if y > 0:
        return 1.0
    if y < 0:
        return 0.0
    return 0.5


def exact_riemann(u_l: float, u_r: float, x: float, t: float) -> float:
    """Moving-shock weak solution: jump at 1/2 travelling at (u_l+u_r)/2."""
    s = 0.5 + 0.5 * (u_l + u_r) * t
    return u_l * heaviside(s - x) + u_r * heaviside(x - s)


@dataclass(frozen=True)
class RiemannIC:
    u_l: float
    u_r: float

    def __call__(self, x: float, t: float = 0.0) -> float:
        return exact_riemann(self.u_l, self.u_r, x, t)


@dataclass(frozen=True)
class GridConfig:
    cells: int = 200
    courant: float = 0.9
    t_end: float = 2.0 / 3.0
    x_min: float = 0.0
    x_max: float = 1.0
    boundary: str = "fixed"

    def __post_init__(self):
        if self.cells < 4:
            raise ValueError("need at least 4 cells")
        if self.courant <= 0:
            raise ValueError("Courant number must be positive")
        if self.boundary not in ("fixed", "periodic"):
            raise ValueError("boundary must be 'fixed' or 'periodic'")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.cells

    @property
    def tau(self) -> float:
        return self.courant * self.h


class NotExplicitError(Exception):
    def __init__(self, message: str, nodes=()):
        super().__init__(message)
        self.nodes = tuple(nodes)


class BlowUpError(Exception):
    def __init__(self, step: int):
        super().__init__(f"blow-up at step {step}")
        self.step = step


@dataclass
class StencilUpdate:
    """u[n + span][j + solve_dx] solved from the remaining nodes.

    ``sweep`` marks additional new-level u nodes left of the solved one;
    they are read from the freshly computed level in a left-to-right
    march.  ``f_terms`` are flux nodes evaluated as u^2 (or a custom
    flux) at strictly older levels.
    """

    u_terms: tuple  # (dt, dx, coeff) excluding the solved node
    f_terms: tuple
    solve_dx: int
    span: int
    sweep: bool
    # conservation flux of u_t + u u_x = 0; the shock then travels at
    # (u_l + u_r)/2, matching the exact solution used for ghosts/errors
    flux = staticmethod(lambda u: 0.5 * u * u)

    def offsets(self):
        dxs = [self.solve_dx] + [dx for _, dx, _ in self.u_terms] + [dx for _, dx, _ in self.f_terms]
        return min(dxs), max(dxs)


@dataclass
class GodunovUpdate:
    """First-order shock-capturing update with the exact Burgers flux."""

    span: int = 1
    sweep: bool = False
    solve_dx: int = 0

    @staticmethod
    def numerical_flux(ul, ur):
        """max of u^2 over [ur, ul] for a shock, min over [ul, ur] otherwise."""
        fl, fr = 0.5 * ul * ul, 0.5 * ur * ur
        shock = ul >= ur
        rare = np.where((ul < 0.0) & (ur > 0.0), 0.0, np.minimum(fl, fr))
        return np.where(shock, np.maximum(fl, fr), rare)


def compile_update(scheme: Scheme, h: float, tau: float, params: dict = None, *, allow_sweep: bool = False):
    """Numeric stencil for an explicit scheme at the given mesh values."""
    if isinstance(scheme, ProductScheme):
        return GodunovUpdate()
    meta = scheme.meta
    if meta.time_axis < 0:
        raise NotExplicitError("scheme has no time direction")
    env = {name: Fraction(tau if ax == meta.time_axis else h) for ax, name in meta.step_params}
    for k, v in (params or {}).items():
        env[k] = Fraction(v)
    nodes = []
    for (k, mu), c in sorted(scheme.poly.terms.items()):
        val = c.evaluate(env)
        if val == 0:
            continue
        nodes.append((k, mu[meta.time_axis], mu[meta.space_axis], float(val)))
    if not nodes:
        raise NotExplicitError("scheme vanishes at the given parameter values")
    span = max(dt for _, dt, _, _ in nodes)
    top_f = [(dt, dx) for k, dt, dx, _ in nodes if k == meta.f and dt == span]
    if top_f:
        raise NotExplicitError(
            f"flux nodes at the new time level make the update nonlinear: {top_f}", top_f
        )
    top_u = sorted((dx for k, dt, dx, _ in nodes if k == meta.u and dt == span))
    if not top_u:
        raise NotExplicitError("no solved-for node at the maximal time level")
    solve_dx = top_u[-1]
    if len(top_u) > 1 and not allow_sweep:
        raise NotExplicitError(
            f"not explicit: {len(top_u)} unknowns at the new time level, "
            f"space offsets {top_u}",
            [(span, dx) for dx in top_u],
        )
    solve_coeff = next(v for k, dt, dx, v in nodes if k == meta.u and dt == span and dx == solve_dx)
    u_terms = []
    f_terms = []
    for k, dt, dx, v in nodes:
        if k == meta.u:
            if dt == span and dx == solve_dx:
                continue
            u_terms.append((dt, dx, -v / solve_coeff))
        else:
            f_terms.append((dt, dx, -v / solve_coeff))
    return StencilUpdate(
        u_terms=tuple(u_terms),
        f_terms=tuple(f_terms),
        solve_dx=solve_dx,
        span=span,
        sweep=len(top_u) > 1,
    )


@dataclass
class SimResult:
    x: np.ndarray
    u: np.ndarray
    u_exact: np.ndarray
    t_final: float
    steps: int
    l1: float
    linf: float
    shock_pos: float
    max_abs: float
    blow_step: int = None
    conservation_drift: float = 0.0


def simulate(update, ic: RiemannIC, grid: GridConfig, *, steps: int = None, stop_max_abs: float = None, track_conservation: bool = False) -> SimResult:
    """March the update to t_end (or a step count) and compare with the
    exact shock solution.  Fixed boundaries freeze ghost nodes at exact
    values; the periodic mode wraps indices."""
    h, tau = grid.h, grid.tau
    periodic = grid.boundary == "periodic"
    n_steps = steps if steps is not None else int(round(grid.t_end / tau))
    if periodic:
        x = grid.x_min + h * np.arange(grid.cells)
    else:
        x = grid.x_min + h * np.arange(grid.cells + 1)
    exact_vec = np.vectorize(lambda xx, tt: exact_riemann(ic.u_l, ic.u_r, xx, tt))
    span = update.span
    levels = [exact_vec(x, l * tau) for l in range(span)]
    max_abs = max(float(np.max(np.abs(lv))) for lv in levels)
    blow_step = None
    drift = 0.0
    t = (span - 1) * tau
    k = 0
    for k in range(1, n_steps + 1):
        t_new = t + tau
        if isinstance(update, GodunovUpdate):
            new = _godunov_step(update, levels[-1], x, h, tau, ic, t, periodic)
        elif update.sweep:
            new = _sweep_step(update, levels, x, h, tau, ic, t_new, periodic)
        else:
            new = _vector_step(update, levels, x, h, tau, ic, t_new, periodic)
        if track_conservation:
            drift = max(drift, abs(float(np.sum(new) - np.sum(levels[-1]))))
        m = float(np.max(np.abs(new))) if np.all(np.isfinite(new)) else float("inf")
        if not np.isfinite(m):
            if stop_max_abs is None:
                raise BlowUpError(k)
            blow_step = k
            max_abs = float("inf")
            levels = levels[1:] + [new] if span > 1 else [new]
            t = t_new
            break
        max_abs = max(max_abs, m)
        levels = levels[1:] + [new] if span > 1 else [new]
        t = t_new
        if stop_max_abs is not None and m > stop_max_abs:
            blow_step = k
            break
    u = levels[-1]
    u_exact = exact_vec(x, t)
    diff = np.abs(u - u_exact)
    finite = np.all(np.isfinite(u))
    return SimResult(
        x=x,
        u=u,
        u_exact=u_exact,
        t_final=t,
        steps=k,
        l1=float(h * np.sum(diff)) if finite else float("inf"),
        linf=float(np.max(diff)) if finite else float("inf"),
        shock_pos=locate_shock(x, u, 0.5 * (ic.u_l + ic.u_r)),
        max_abs=max_abs,
        blow_step=blow_step,
        conservation_drift=drift,
    )


def _extend(arr, x, h, t, ic, g_lo, g_hi, periodic):
    if periodic:
        return arr, 0
    lo = [exact_riemann(ic.u_l, ic.u_r, x[0] - (i + 1) * h, t) for i in reversed(range(g_lo))]
    hi = [exact_riemann(ic.u_l, ic.u_r, x[-1] + (i + 1) * h, t) for i in range(g_hi)]
    return np.concatenate([lo, arr, hi]), g_lo


def _vector_step(update, levels, x, h, tau, ic, t_new, periodic):
    lo, hi = update.offsets()
    g_lo = max(0, update.solve_dx - lo)
    g_hi = max(0, hi - update.solve_dx)
    n = len(x)
    new = np.zeros(n)
    exts = {}
    for dt in range(update.span):
        t_level = t_new - (update.span - dt) * tau
        exts[dt] = _extend(levels[dt], x, h, t_level, ic, g_lo, g_hi, periodic)
    for dt, dx, c in update.u_terms:
        arr, off = exts[dt]
        idx = off + dx - update.solve_dx
        if periodic:
            new += c * np.roll(arr, -(dx - update.solve_dx))
        else:
            new += c * arr[idx : idx + n]
    for dt, dx, c in update.f_terms:
        arr, off = exts[dt]
        farr = update.flux(arr)
        idx = off + dx - update.solve_dx
        if periodic:
            new += c * np.roll(farr, -(dx - update.solve_dx))
        else:
            new += c * farr[idx : idx + n]
    return new


def _sweep_step(update, levels, x, h, tau, ic, t_new, periodic):
    if periodic:
        raise NotExplicitError("sweep updates require fixed boundaries")
    n = len(x)
    lo, hi = update.offsets()
    g_lo = max(0, update.solve_dx - lo)
    g_hi = max(0, hi - update.solve_dx)
    exts = {}
    for dt in range(update.span):
        t_level = t_new - (update.span - dt) * tau
        exts[dt] = _extend(levels[dt], x, h, t_level, ic, g_lo, g_hi, periodic)
    new = np.empty(n)
    for w in range(n):
        acc = 0.0
        for dt, dx, c in update.u_terms:
            rel = dx - update.solve_dx
            if dt == update.span:
                j = w + rel
                v = new[j] if j >= 0 else exact_riemann(ic.u_l, ic.u_r, x[0] + j * h, t_new)
            else:
                arr, off = exts[dt]
                v = arr[off + w + rel]
            acc += c * v
        for dt, dx, c in update.f_terms:
            arr, off = exts[dt]
            v = arr[off + w + dx - update.solve_dx]
            acc += c * 0.5 * v * v
        new[w] = acc
    return new


def _godunov_step(update, u, x, h, tau, ic, t, periodic):
    if periodic:
        ul = u
        ur = np.roll(u, -1)
        fstar = GodunovUpdate.numerical_flux(ul, ur)
        return u - (tau / h) * (fstar - np.roll(fstar, 1))
    ext, off = _extend(u, x, h, t, ic, 1, 1, periodic)
    ul = ext[:-1]
    ur = ext[1:]
    fstar = GodunovUpdate.numerical_flux(ul, ur)
    return u - (tau / h) * (fstar[1:] - fstar[:-1])


def locate_shock(x, u, mid: float):
    """Interpolated crossing of the mid state at the steepest transition."""
    best = None
    for j in range(len(u) - 1):
        a, b = u[j] - mid, u[j + 1] - mid
        if a == b:
            continue
        if a * b <= 0:
            drop = abs(u[j] - u[j + 1])
            if best is None or drop > best[0]:
                best = (drop, j)
    if best is None:
        return float("nan")
    j = best[1]
    frac = (mid - u[j]) / (u[j + 1] - u[j])
    return float(x[j] + frac * (x[j + 1] - x[j]))


# ---------------------------------------------------------------------------
# conservation and consistency checks
# ---------------------------------------------------------------------------


def conservation_check(update, grid: GridConfig, init, *, steps: int = 50, seed: int = 0) -> dict:
    """Periodic run; the discrete total of u may drift only by roundoff."""
    if grid.boundary != "periodic":
        raise ValueError("conservation check requires a periodic grid")
    h = grid.h
    x = grid.x_min + h * np.arange(grid.cells)
    if callable(init):
        u0 = np.array([init(xx) for xx in x], dtype=float)
    else:
        u0 = np.asarray(init, dtype=float)
    span = update.span
    levels = [u0.copy() for _ in range(span)]
    drift = 0.0
    max_abs = float(np.max(np.abs(u0)))
    for _ in range(steps):
        if isinstance(update, GodunovUpdate):
            new = _godunov_step(update, levels[-1], x, h, grid.tau, None, 0.0, True)
        else:
            new = _vector_step(update, levels, x, h, grid.tau, None, 0.0, True)
        drift = max(drift, abs(float(np.sum(new) - np.sum(levels[-1]))))
        max_abs = max(max_abs, float(np.max(np.abs(new))))
        levels = levels[1:] + [new] if span > 1 else [new]
    eps = np.finfo(float).eps
    bound = 64.0 * eps * grid.cells * max_abs
    return {"drift": drift, "bound": bound, "ok": drift <= bound, "max_abs": max_abs}


@dataclass
class ConsistencyReport:
    residuals: list
    hs: list
    orders: list
    exact: bool

    @property
    def order(self):
        return min(self.orders) if self.orders else float("inf")


def consistency_order(scheme: Scheme, fields: dict, hs, *, courant: float = 0.5, params: dict = None, samples: int = 7) -> ConsistencyReport:
    """Estimate the approximation order by evaluating the scheme residual
    on exact smooth fields at decreasing mesh sizes.

    ``fields`` maps indeterminate names to callables of the grid
    coordinates in axis order.  The residual is normalized by the
    solved-node coefficient and the time step, so a first-order scheme
    reports p close to 1.
    """
    meta = scheme.meta
    ring = scheme.ring
    n_ax = len(ring.shifts)
    residuals = []
    for h in hs:
        steps = {}
        for ax, name in meta.step_params:
            steps[ax] = courant * h if ax == meta.time_axis else h
        env = {name: Fraction(steps[ax]) for ax, name in meta.step_params}
        for k, v in (params or {}).items():
            env.setdefault(k, Fraction(v))
        nodes = []
        for (k, mu), c in sorted(scheme.poly.terms.items()):
            val = float(c.evaluate(env))
            if val:
                nodes.append((ring.indets[k], mu, val))
        scale = _residual_scale(scheme, nodes, steps)
        worst = 0.0
        for s in range(samples):
            base = [0.25 + 0.4 * s / max(1, samples - 1)] * n_ax
            acc = 0.0
            for name, mu, val in nodes:
                coords = tuple(base[a] + mu[a] * steps[a] for a in range(n_ax))
                acc += val * fields[name](*coords)
            worst = max(worst, abs(acc) / scale)
        residuals.append(worst)
    orders = []
    for i in range(len(hs) - 1):
        if residuals[i + 1] == 0 or residuals[i] == 0:
            continue
        orders.append(float(np.log(residuals[i] / residuals[i + 1]) / np.log(hs[i] / hs[i + 1])))
    exact = all(r <= 1e-12 for r in residuals)
    return ConsistencyReport(residuals=residuals, hs=list(hs), orders=orders, exact=exact)


def _residual_scale(scheme, nodes, steps):
    meta = scheme.meta
    if meta.time_axis >= 0:
        span = max(mu[meta.time_axis] for _, mu, _ in nodes)
        top = [abs(v) for name, mu, v in nodes if mu[meta.time_axis] == span]
        return max(top) * steps[meta.time_axis]
    return max(abs(v) for _, _, v in nodes)
