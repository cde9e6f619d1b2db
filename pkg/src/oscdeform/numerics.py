"""Shared numerical kernels: IVP integration, quadrature, root finding,
and finite-difference residual scanning.

The solver is scipy's DOP853 (8th-order embedded Runge-Kutta) wrapped into
project types.  Quadrature and root finding are small self-contained
routines so tolerances and failure modes stay explicit and reproducible.
"""

from __future__ import annotations

import math
import warnings
from collections import namedtuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    MaxDepth,
    NonFiniteState,
    NoSignChange,
    StepSizeUnderflow,
)

PhaseState = namedtuple("PhaseState", ["t", "x", "v"])
PhaseState.__doc__ = "A point of phase space: time, position, velocity."


class Trajectory:
    """An ordered sequence of PhaseStates with strictly increasing time."""

    def __init__(self, states, meta=None):
        states = [PhaseState(*s) for s in states]
        for a, b in zip(states, states[1:]):
            if not b.t > a.t:
                raise ValueError("trajectory times must strictly increase "
                                 "(%r then %r)" % (a.t, b.t))
        self.states = states
        self.meta = dict(meta) if meta else {}

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __getitem__(self, i):
        return self.states[i]

    @property
    def t(self):
        return np.array([s.t for s in self.states])

    @property
    def x(self):
        return np.array([s.x for s in self.states])

    @property
    def v(self):
        return np.array([s.v for s in self.states])


class IvpProblem:
    """Initial-value problem description.

    kind 'second':  rhs(t, x, v) -> xdd,   y0 = (x0, v0)
    kind 'first':   rhs(t, x)    -> xd,    y0 = x0 (scalar)
    kind 'system':  rhs(t, y)    -> dy,    y0 = (y0_0, y0_1)  (2 components)
    """

    KINDS = ("first", "second", "system")

    def __init__(self, rhs, kind, t0, y0, t1, rtol=1e-10, atol=1e-12):
        if kind not in self.KINDS:
            raise ValueError("kind must be one of %r" % (self.KINDS,))
        if not (math.isfinite(t0) and math.isfinite(t1)) or t0 == t1:
            raise ValueError("t-span must be finite and non-degenerate")
        if not (rtol > 0 and atol > 0):
            raise ValueError("tolerances must be positive")
        self.rhs = rhs
        self.kind = kind
        self.t0 = float(t0)
        self.t1 = float(t1)
        if kind == "first":
            self.y0 = np.array([float(y0)])
        else:
            y0 = np.asarray(y0, dtype=float)
            if y0.shape != (2,):
                raise ValueError("y0 must have two components for kind %r" % kind)
            self.y0 = y0
        self.rtol = float(rtol)
        self.atol = float(atol)


def _vector_field(problem):
    rhs = problem.rhs
    if problem.kind == "second":
        def field(t, y):
            return (y[1], rhs(t, y[0], y[1]))
    elif problem.kind == "first":
        def field(t, y):
            return (rhs(t, y[0]),)
    else:
        def field(t, y):
            return rhs(t, y)
    return field


def integrate(problem, t_eval=None, dense=False):
    """Integrate an IvpProblem with the DOP853 adaptive pair.

    Returns a Trajectory sampled at t_eval (or at the solver's own steps).
    With dense=True the trajectory meta carries callables 'x_of_t' and
    'v_of_t' interpolating the solution over the integrated span.
    """
    field = _vector_field(problem)
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
    sol = solve_ivp(field, (problem.t0, problem.t1), problem.y0,
                    method="DOP853", rtol=problem.rtol, atol=problem.atol,
                    t_eval=t_eval, dense_output=True)
    if not sol.success:
        msg = (sol.message or "").lower()
        if "step size" in msg:
            raise StepSizeUnderflow(sol.message)
        raise NonFiniteState(sol.message or "integration failed")
    if not np.all(np.isfinite(sol.y)):
        raise NonFiniteState("integration produced non-finite state")

    rhs = problem.rhs
    if problem.kind == "first":
        def x_of_t(t):
            return float(sol.sol(t)[0])

        def v_of_t(t):
            return float(rhs(t, float(sol.sol(t)[0])))
    else:
        def x_of_t(t):
            return float(sol.sol(t)[0])

        def v_of_t(t):
            return float(sol.sol(t)[1])

    ts = sol.t
    xs = [x_of_t(t) for t in ts]
    vs = [v_of_t(t) for t in ts]
    order = np.argsort(ts)
    states = [PhaseState(float(ts[i]), xs[i], vs[i]) for i in order]
    meta = {"method": "DOP853", "rtol": problem.rtol, "atol": problem.atol}
    if dense:
        meta["x_of_t"] = x_of_t
        meta["v_of_t"] = v_of_t
        meta["t_span"] = (min(problem.t0, problem.t1),
                          max(problem.t0, problem.t1))
    return Trajectory(states, meta)


# --- quadrature ---------------------------------------------------------------

def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(f, a, fa, b, fb, whole, m, fm, tol, depth):
    if depth <= 0:
        raise MaxDepth("adaptive quadrature recursion limit on [%g, %g]" % (a, b))
    lm, flm, left = _simpson(f, a, fa, m, fm)
    rm, frm, right = _simpson(f, m, fm, b, fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    half = 0.5 * tol
    return (_adaptive(f, a, fa, m, fm, left, lm, flm, half, depth - 1)
            + _adaptive(f, m, fm, b, fb, right, rm, frm, half, depth - 1))


def quad(f, a, b, tol=1e-11, max_depth=50):
    """Definite integral of f over [a, b] by adaptive Simpson's rule."""
    a = float(a)
    b = float(b)
    if a == b:
        return 0.0
    if b < a:
        return -quad(f, b, a, tol=tol, max_depth=max_depth)
    fa = f(a)
    fb = f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)
    return _adaptive(f, a, fa, b, fb, whole, m, fm, tol, max_depth)


class CumulativeIntegral:
    """Smooth evaluator of F(t) = integral of f from origin to t.

    Fixed-order Gauss-Legendre panels of constant width are accumulated
    lazily in both directions from the origin; the partial panel containing
    t is evaluated with the same rule.  Because node placement varies
    smoothly with t, F is smooth in t (unlike adaptive quadrature whose
    subdivision pattern jumps), which matters when F feeds finite
    differences.
    """

    def __init__(self, f, origin, cell=0.25, nodes=24):
        self.f = f
        self.origin = float(origin)
        self.cell = float(cell)
        gl_x, gl_w = np.polynomial.legendre.leggauss(nodes)
        self._gl_x = gl_x
        self._gl_w = gl_w
        self._fwd = [0.0]   # _fwd[k] = F(origin + k*cell)
        self._bwd = [0.0]   # _bwd[k] = F(origin - k*cell)

    def _panel(self, a, b):
        c = 0.5 * (a + b)
        h = 0.5 * (b - a)
        total = 0.0
        for xi, wi in zip(self._gl_x, self._gl_w):
            total += wi * self.f(c + h * xi)
        return h * total

    def __call__(self, t):
        t = float(t)
        s = (t - self.origin) / self.cell
        if s >= 0:
            k = int(math.floor(s))
            while len(self._fwd) <= k:
                a = self.origin + (len(self._fwd) - 1) * self.cell
                self._fwd.append(self._fwd[-1] + self._panel(a, a + self.cell))
            base = self._fwd[k]
            edge = self.origin + k * self.cell
        else:
            # full panels strictly between t and the origin, so the rule
            # never samples beyond t (where f may be singular)
            kk = int(math.floor(-s))
            while len(self._bwd) <= kk:
                b = self.origin - (len(self._bwd) - 1) * self.cell
                self._bwd.append(self._bwd[-1] - self._panel(b - self.cell, b))
            base = self._bwd[kk]
            edge = self.origin - kk * self.cell
        if t == edge:
            return base
        return base + self._panel(edge, t)


# --- root finding ---------------------------------------------------------------

def find_root(f, lo, hi, tol=1e-12, fprime=None, max_iter=200):
    """Root of f on a sign-changing bracket [lo, hi].

    Newton steps (when fprime is given) are accepted only while they stay
    inside the current bracket and shrink |f|; otherwise the step falls back
    to Illinois-damped regula falsi with a bisection safeguard.
    """
    lo = float(lo)
    hi = float(hi)
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NoSignChange("f(%g)=%g and f(%g)=%g have the same sign"
                           % (lo, flo, hi, fhi))
    def secant(a, fa, b, fb):
        if fb != fa:
            c = (a * fb - b * fa) / (fb - fa)
            if a <= c <= b:
                return c
        return 0.5 * (a + b)

    x = 0.5 * (lo + hi)
    fx = f(x)
    side = 0
    for _ in range(max_iter):
        if fx == 0.0:
            return x
        if (hi - lo) <= tol * (1.0 + abs(x)):
            return secant(lo, flo, hi, fhi)
        # tighten the bracket with the current point
        if (fx > 0) == (fhi > 0):
            hi, fhi = x, fx
            if side == 1:
                flo *= 0.5
            side = 1
        else:
            lo, flo = x, fx
            if side == -1:
                fhi *= 0.5
            side = -1
        nxt = None
        if fprime is not None:
            d = fprime(x)
            if d != 0.0 and math.isfinite(d):
                cand = x - fx / d
                if lo < cand < hi:
                    nxt = cand
        if nxt is None:
            denom = fhi - flo
            if denom != 0.0:
                cand = (lo * fhi - hi * flo) / denom
                if lo < cand < hi:
                    nxt = cand
        if nxt is None or min(nxt - lo, hi - nxt) < 1e-3 * (hi - lo):
            nxt = 0.5 * (lo + hi)
        x = nxt
        fx = f(x)
    return x


# --- finite-difference residual scanning ------------------------------------------

def fd_derivatives(x_of_t, t, h):
    """Richardson-extrapolated central first and second derivatives."""
    x0 = x_of_t(t)
    xp = x_of_t(t + h)
    xm = x_of_t(t - h)
    xph = x_of_t(t + 0.5 * h)
    xmh = x_of_t(t - 0.5 * h)
    v_h = (xp - xm) / (2.0 * h)
    v_h2 = (xph - xmh) / h
    a_h = (xp - 2.0 * x0 + xm) / (h * h)
    a_h2 = (xph - 2.0 * x0 + xmh) / (0.25 * h * h)
    return x0, (4.0 * v_h2 - v_h) / 3.0, (4.0 * a_h2 - a_h) / 3.0


def residual_scan(form, x_of_t, t_samples, h=1e-3):
    """Max |form.residual(t, x, xd, xdd)| over samples, with xd and xdd from
    Richardson-extrapolated central differences of x_of_t."""
    worst = 0.0
    bad = []
    for t in np.asarray(t_samples, dtype=float):
        x0, v, a = fd_derivatives(x_of_t, float(t), h)
        r = form.residual(float(t), x0, v, a)
        if not math.isfinite(r):
            bad.append(float(t))
            worst = math.inf
            continue
        worst = max(worst, abs(r))
    if bad:
        warnings.warn("non-finite residual at t = %s" % (bad,))
    return worst


def trajectory_residual(form, x_of_t, v_of_t, t_samples, h=5e-3):
    """Max |residual| along a trajectory using the integrator's velocity and a
    Richardson finite difference of v for the acceleration.

    Differencing v (already one derivative) instead of x twice keeps the
    round-off amplification one power of h lower.
    """
    worst = 0.0
    for t in np.asarray(t_samples, dtype=float):
        t = float(t)
        a_h = (v_of_t(t + h) - v_of_t(t - h)) / (2.0 * h)
        a_h2 = (v_of_t(t + 0.5 * h) - v_of_t(t - 0.5 * h)) / h
        a = (4.0 * a_h2 - a_h) / 3.0
        r = form.residual(t, x_of_t(t), v_of_t(t), a)
        worst = max(worst, abs(r))
    return worst
