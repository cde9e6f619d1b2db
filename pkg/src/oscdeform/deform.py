"""Phase-space deformation machinery.

A harmonic oscillator in the deformed coordinates (x+g, xd+f) obeys

    (xd + f) = omega * cot(omega*t + alpha) * (x + g)

for arbitrary C^1 deformations f(t,x,v), g(t,x,v).  Eliminating the
cotangent produces a generalized Lienard-type second-order ODE whose
coefficients are assembled here symbolically from f, g and their partial
derivatives.  The module also provides the phase (generating) function,
the deformed energy and its exact rate law, crossing-time extraction, the
time-varying-frequency generalization, and a quadratic-damping family with
a complex tanh phase law.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from . import exprdsl
from .errors import (
    CotangentPole,
    DegenerateParameters,
    ImplicitNoRoot,
    ImplicitRelation,
    NoCrossing,
    NonSmoothPoint,
    SingularCoefficient,
    UnboundNameError,
    ZeroDenominator,
)
from .exprdsl import (
    Expr,
    Num,
    Var,
    add,
    as_expr,
    depends_on,
    differentiate,
    div,
    evaluate,
    mul,
    neg,
    parameters,
    powe,
    sub,
    substitute_params,
)
from .numerics import (
    CumulativeIntegral,
    IvpProblem,
    PhaseState,
    Trajectory,
    find_root,
    integrate,
)

_ALLOWED_VARS = {"t", "x", "v"}


def _expr_fn(e):
    def fn(t, x, v, _e=e):
        return evaluate(_e, {"t": t, "x": x, "v": v})
    return fn


class DeformedOscillator:
    """A harmonic oscillator composed with deformations x -> x+g, xd -> xd+f.

    f and g may be Expr trees or source strings over the variables t, x, v;
    named parameters are bound through `params` at construction.  omega is
    the base frequency (> 0) and alpha the phase constant of the first
    integral.
    """

    def __init__(self, f, g, omega, alpha=0.0, params=None):
        f = as_expr(f)
        g = as_expr(g)
        if params:
            f = substitute_params(f, params)
            g = substitute_params(g, params)
        for e in (f, g):
            extra = exprdsl.variables(e) - _ALLOWED_VARS
            if extra:
                raise ValueError("deformations may reference only t, x, v; "
                                 "got %s" % sorted(extra))
            free = parameters(e)
            if free:
                raise UnboundNameError(sorted(free)[0])
        if not omega > 0:
            raise ValueError("omega must be positive")
        self.f = f
        self.g = g
        self.omega = float(omega)
        self.alpha = float(alpha)
        self.f_t = differentiate(f, "t")
        self.f_x = differentiate(f, "x")
        self.f_v = differentiate(f, "v")
        self.g_t = differentiate(g, "t")
        self.g_x = differentiate(g, "x")
        self.g_v = differentiate(g, "v")
        self._fns = {name: _expr_fn(getattr(self, name))
                     for name in ("f", "g", "f_t", "f_x", "f_v",
                                  "g_t", "g_x", "g_v")}
        self.f_depends_v = depends_on(f, "v")
        self.g_depends_v = depends_on(g, "v")

    def with_alpha(self, alpha):
        osc = DeformedOscillator.__new__(DeformedOscillator)
        osc.__dict__.update(self.__dict__)
        osc.alpha = float(alpha)
        return osc

    def theta(self, t):
        return self.omega * t + self.alpha

    def val(self, name, t, x, v):
        return self._fns[name](t, x, v)


class OdeForm:
    """Second-order form  coeff_xdd*xdd + coeff_xd*xd + remainder = 0.

    Coefficients are functions of (t, x, v); they may be supplied as Expr
    trees (kept for printing) or plain callables.
    """

    def __init__(self, coeff_xdd, coeff_xd, remainder):
        self.exprs = {}
        self.coeff_xdd = self._wrap("coeff_xdd", coeff_xdd)
        self.coeff_xd = self._wrap("coeff_xd", coeff_xd)
        self.remainder = self._wrap("remainder", remainder)

    def _wrap(self, name, obj):
        if isinstance(obj, Expr):
            self.exprs[name] = obj
            return _expr_fn(obj)
        if callable(obj):
            return obj
        e = Num(float(obj))
        self.exprs[name] = e
        return _expr_fn(e)

    def residual(self, t, x, v, a):
        return (self.coeff_xdd(t, x, v) * a
                + self.coeff_xd(t, x, v) * v
                + self.remainder(t, x, v))


def generate_ode(osc):
    """Assemble the generalized Lienard form generated by (f, g, omega).

    The construction substitutes f, g and their six partials into a fixed
    template; no simplification beyond constant folding is attempted.
    Correctness is established by residual checks, not by the printed shape.
    """
    f, g = osc.f, osc.g
    f_t, f_x, f_v = osc.f_t, osc.f_x, osc.f_v
    g_t, g_x, g_v = osc.g_t, osc.g_x, osc.g_v
    x = Var("x")
    v = Var("v")
    xpg = add(x, g)
    w2 = Num(osc.omega ** 2)

    coeff_xdd = sub(mul(add(Num(1.0), f_v), xpg), mul(add(v, f), g_v))
    coeff_xd = sub(sub(mul(f_x, xpg), mul(f, sub(g_x, Num(1.0)))), g_t)
    remainder = sub(add(mul(xpg, add(f_t, mul(w2, xpg))),
                        sub(mul(f, f), mul(f, g_t))),
                    mul(mul(v, v), g_x))
    return OdeForm(coeff_xdd, coeff_xd, remainder)


def explicit_acceleration(form, state, eps_sing=1e-12):
    """Solve the form for xdd at a phase-space point."""
    t, x, v = state
    c0 = form.coeff_xdd(t, x, v)
    if abs(c0) <= eps_sing:
        raise SingularCoefficient(
            "coefficient of xdd is %r at t=%r, x=%r, v=%r" % (c0, t, x, v))
    return -(form.coeff_xd(t, x, v) * v + form.remainder(t, x, v)) / c0


def first_integral_rhs(osc, state, delta=1e-9, allow_implicit=False):
    """Slope field of the first integral: omega*cot(theta)*(x+g) - f.

    For v-independent deformations this is the explicit xd.  When f or g
    depend on v the relation is implicit in v; pass allow_implicit=True to
    evaluate it at the state's own v (for fixed-point/Newton iteration), or
    use first_integral_velocity to solve it.
    """
    t, x, v = state
    if (osc.f_depends_v or osc.g_depends_v) and not allow_implicit:
        raise ImplicitRelation(
            "f or g depends on v; solve v = rhs(v) via first_integral_velocity")
    th = osc.theta(t)
    s = math.sin(th)
    if abs(s) < delta:
        raise CotangentPole("sin(omega*t+alpha) = %r at t = %r" % (s, t))
    return (osc.omega * math.cos(th) / s * (x + osc.val("g", t, x, v))
            - osc.val("f", t, x, v))


def first_integral_velocity(osc, t, x, v_guess=None, delta=1e-9,
                            tol=1e-13, max_iter=60):
    """Velocity selected by the first integral at (t, x).

    Solves G(v) = (v+f)*sin(theta) - omega*cos(theta)*(x+g) = 0.  For
    v-independent f, g this reduces to the explicit slope field (with the
    cotangent-pole guard); when g depends on v the scaled form stays regular
    even at the poles of the cotangent.
    """
    th = osc.theta(t)
    s = math.sin(th)
    c = math.cos(th)
    w = osc.omega

    if not (osc.f_depends_v or osc.g_depends_v):
        if abs(s) < delta:
            raise CotangentPole("sin(omega*t+alpha) = %r at t = %r" % (s, t))
        return w * c / s * (x + osc.val("g", t, x, 0.0)) - osc.val("f", t, x, 0.0)

    if abs(s) < delta and not osc.g_depends_v:
        raise CotangentPole(
            "implicit velocity is singular at the pole when g is v-independent")

    def G(v):
        return ((v + osc.val("f", t, x, v)) * s
                - w * c * (x + osc.val("g", t, x, v)))

    def Gp(v):
        return (1.0 + osc.val("f_v", t, x, v)) * s - w * c * osc.val("g_v", t, x, v)

    v = 0.0 if v_guess is None else float(v_guess)
    scale = abs(w * c * x) + abs(s) + 1.0
    for _ in range(max_iter):
        gv = G(v)
        if abs(gv) <= tol * scale * (1.0 + abs(v)):
            return v
        d = Gp(v)
        if d == 0.0 or not math.isfinite(d):
            break
        step = gv / d
        v_new = v - step
        if not math.isfinite(v_new):
            break
        if abs(step) <= 1e-16 * (1.0 + abs(v)):
            return v_new
        v = v_new
    else:
        if abs(G(v)) <= 1e-9 * scale * (1.0 + abs(v)):
            return v

    # bisection fallback on an expanding bracket around the guess
    center = 0.0 if v_guess is None else float(v_guess)
    for half_width in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0, 256.0):
        lo, hi = center - half_width, center + half_width
        try:
            return find_root(G, lo, hi, tol=1e-14)
        except Exception:
            continue
    raise ImplicitNoRoot("no v solves the first integral at t=%r, x=%r" % (t, x))


def phase_function(osc, state):
    """Ratio a/conj(a) with a = (v+f) - i*omega*(x+g); unit modulus for real
    states and real deformations; equals exp(-2i(omega*t+alpha)) on solutions."""
    t, x, v = state
    fa = osc.val("f", t, x, v)
    ga = osc.val("g", t, x, v)
    amp = complex(v + fa, -osc.omega * (x + ga))
    if amp == 0:
        raise ZeroDenominator("(v+f) and omega*(x+g) both vanish")
    return amp / amp.conjugate()


def energy(osc, state):
    """Deformed energy H = (v+f)^2 + omega^2 (x+g)^2 (non-negative)."""
    t, x, v = state
    fa = osc.val("f", t, x, v)
    ga = osc.val("g", t, x, v)
    return (v + fa) ** 2 + osc.omega ** 2 * (x + ga) ** 2


def energy_rate(osc, state, a=None, delta=1e-9):
    """Exact dH/dt along solutions: 2*omega^2*(x+g)*(dg/dt - f)/sin^2(theta).

    dg/dt is the total derivative g_t + g_x*v + g_v*a; the acceleration is
    required only when g depends on v.
    """
    t, x, v = state
    th = osc.theta(t)
    s = math.sin(th)
    if abs(s) < delta:
        raise CotangentPole("sin(omega*t+alpha) = %r at t = %r" % (s, t))
    gdot = osc.val("g_t", t, x, v) + osc.val("g_x", t, x, v) * v
    if osc.g_depends_v:
        if a is None:
            raise ValueError("acceleration required: g depends on v")
        gdot += osc.val("g_v", t, x, v) * a
    ga = osc.val("g", t, x, v)
    fa = osc.val("f", t, x, v)
    return 2.0 * osc.omega ** 2 * (x + ga) * (gdot - fa) / (s * s)


def fit_alpha(osc, state):
    """Phase constant alpha consistent with the state under the first
    integral, normalized to (-pi, pi]; the branch makes sin(theta) carry the
    sign of x+g."""
    t, x, v = state
    fa = osc.val("f", t, x, v)
    ga = osc.val("g", t, x, v)
    num = osc.omega * (x + ga)
    den = v + fa
    if num == 0.0 and den == 0.0:
        raise ZeroDenominator("state sits at the deformed equilibrium")
    alpha = math.atan2(num, den) - osc.omega * t
    alpha = math.remainder(alpha, 2.0 * math.pi)
    if alpha <= -math.pi:
        alpha += 2.0 * math.pi
    return alpha


# --- crossings -----------------------------------------------------------------

def crossing_times(osc, traj, refine_tol=1e-13):
    """Times where x + g(t,x,v) = 0 along a trajectory.

    Sign changes of the sampled deformed coordinate are refined by root
    finding on the (dense if available, else interpolated) trajectory; a
    refined point only counts when the deformed coordinate is actually small
    there, which rejects sign flips through a divergence.
    """
    ts = traj.t
    xs = traj.x
    vs = traj.v
    if len(ts) < 2:
        raise NoCrossing("trajectory too short")

    x_of_t = traj.meta.get("x_of_t")
    v_of_t = traj.meta.get("v_of_t")
    if x_of_t is None:
        def x_of_t(tq):
            return float(np.interp(tq, ts, xs))
    if v_of_t is None:
        def v_of_t(tq):
            return float(np.interp(tq, ts, vs))

    def F(tq):
        xq = x_of_t(tq)
        return xq + osc.val("g", tq, xq, v_of_t(tq))

    samples = np.array([x + osc.val("g", t, x, v)
                        for t, x, v in zip(ts, xs, vs)])
    scale = 1.0 + float(np.max(np.abs(samples)))
    out = []
    for i in range(len(ts) - 1):
        s0, s1 = samples[i], samples[i + 1]
        if s0 == 0.0:
            out.append(float(ts[i]))
            continue
        if s0 * s1 < 0.0:
            try:
                t_star = find_root(F, float(ts[i]), float(ts[i + 1]),
                                   tol=refine_tol)
            except Exception:
                continue
            if abs(F(t_star)) <= 1e-6 * scale:
                out.append(t_star)
    if samples[-1] == 0.0:
        out.append(float(ts[-1]))
    if not out:
        raise NoCrossing("x+g never changes sign on the trajectory")
    return out


# --- first-integral integration driver -------------------------------------------

def _solve_position(osc, t, target, x_start):
    """Solve x + g(t, x) = target near x_start (g v-independent here)."""
    def h(x):
        return x + osc.val("g", t, x, 0.0) - target

    def hp(x):
        return 1.0 + osc.val("g_x", t, x, 0.0)

    x = float(x_start)
    for _ in range(60):
        hx = h(x)
        if abs(hx) <= 1e-14 * (1.0 + abs(x)):
            return x
        d = hp(x)
        if d == 0.0 or not math.isfinite(d):
            break
        x -= hx / d
    for width in (0.5, 1.0, 2.0, 8.0, 32.0):
        try:
            return find_root(h, x_start - width, x_start + width, tol=1e-15)
        except Exception:
            continue
    raise ImplicitNoRoot("cannot solve x + g = target at t = %r" % t)


def _solve_velocity(osc, t, x, target, v_start):
    """Solve v + f(t, x, v) = target for the velocity."""
    if not osc.f_depends_v:
        return target - osc.val("f", t, x, 0.0)

    def r(v):
        return v + osc.val("f", t, x, v) - target

    def rp(v):
        return 1.0 + osc.val("f_v", t, x, v)

    v = float(v_start)
    for _ in range(60):
        rv = r(v)
        if abs(rv) <= 1e-14 * (1.0 + abs(v)):
            return v
        d = rp(v)
        if d == 0.0 or not math.isfinite(d):
            break
        v -= rv / d
    for width in (0.5, 1.0, 2.0, 8.0, 32.0):
        try:
            return find_root(r, v_start - width, v_start + width, tol=1e-15)
        except Exception:
            continue
    raise ImplicitNoRoot("cannot solve v + f = target at t = %r" % t)


def _poles_inside(osc, t0, t1, margin):
    """Cotangent pole times (n*pi - alpha)/omega strictly inside (t0, t1)."""
    w, al = osc.omega, osc.alpha
    n_lo = math.ceil((w * (t0 + margin) + al) / math.pi)
    n_hi = math.floor((w * (t1 - margin) + al) / math.pi)
    return [(n * math.pi - al) / w for n in range(n_lo, n_hi + 1)]


def _cheb_nodes_diff(n, a, b):
    """Chebyshev extreme points mapped to [a, b] (ascending) and the
    spectral differentiation matrix acting on values at those points."""
    j = np.arange(n + 1)
    xc = np.cos(math.pi * j / n)          # 1 ... -1
    c = np.where((j == 0) | (j == n), 2.0, 1.0) * (-1.0) ** j
    dx = xc[:, None] - xc[None, :] + np.eye(n + 1)
    D = np.outer(c, 1.0 / c) / dx
    D -= np.diag(D.sum(axis=1))
    ts = a + (b - a) * (1.0 - xc) / 2.0   # ascending in t
    return ts, D * (-2.0 / (b - a))


def _cheb_interp(ts, Y):
    """Barycentric interpolant through values Y at the Chebyshev extreme
    points ts produced by _cheb_nodes_diff.

    The weights for this node family are known in closed form, so the
    evaluation is reproducible bit for bit; a generic weight computation
    that reorders nodes for conditioning would make repeated runs differ
    in the last ulp.
    """
    n = len(ts) - 1
    wts = (-1.0) ** np.arange(n + 1)
    wts[0] *= 0.5
    wts[n] *= 0.5

    def ev(tq):
        d = tq - ts
        hit = np.nonzero(d == 0.0)[0]
        if hit.size:
            return float(Y[hit[0]])
        q = wts / d
        return float((q @ Y) / q.sum())

    return ev


def _pole_transit(osc, a, b, pole, y_in, x_seed, v_seed, n=47):
    """Continue the deformed amplitude y = (x+g)/sin(theta) through the
    cotangent pole inside (a, b).

    Marching through the pole is ill-conditioned: the linearized amplitude
    equation has a mode ~ (t-pole)^k with k = (g_x - f_v)/(1 + f_v) at the
    crossing, which collapses below machine precision approaching the pole
    and re-expands afterwards, so any restart from local data loses the
    amplitude.  Instead the sine-multiplied equation

        sin(theta) * dy/dt = dg/dt - f      (regular at the pole)

    is collocated on Chebyshev nodes spanning the whole window with the
    left-edge value pinned, which recovers the re-expanding mode from the
    region where it is numerically visible.  Returns a polynomial
    interpolant for y on [a, b].  Raises NonSmoothPoint when no smooth
    crossing exists (the numerator does not vanish at the pole).
    """
    w = osc.omega
    for bump in range(4):
        ts, D = _cheb_nodes_diff(n + bump, a, b)
        svec = np.array([math.sin(osc.theta(t)) for t in ts])
        # a node sitting on the pole would contribute a zero row; node 0 is
        # exempt because its row is replaced by the boundary condition
        # (which is what allows a window that starts exactly on the pole)
        if np.min(np.abs(svec[1:])) > 1e-8:
            break
    cvec = np.array([math.cos(osc.theta(t)) for t in ts])
    m = len(ts)

    def numerator(i, y, xg, vg, t=None, sv=None, cv=None):
        t = ts[i] if t is None else t
        sv = svec[i] if sv is None else sv
        cv = cvec[i] if cv is None else cv
        x = _solve_position(osc, t, y * sv, xg)
        vv = _solve_velocity(osc, t, x, w * y * cv, vg)
        num = (osc.val("g_t", t, x, vv) + osc.val("g_x", t, x, vv) * vv
               - osc.val("f", t, x, vv))
        return num, x, vv

    num0, xg, vg = numerator(0, y_in, x_seed, v_seed)
    if abs(svec[0]) > 1e-8:
        Y = y_in + (num0 / svec[0]) * (ts - ts[0])
    else:
        Y = np.full(m, float(y_in))
    xs = np.full(m, xg)
    vs = np.full(m, vg)
    scale = 1.0 + abs(y_in)
    fail = NonSmoothPoint(
        "no smooth continuation of the deformed amplitude y = (x+g)/sin "
        "through the pole t = %r; the deformation leaves the crossing "
        "velocity unbounded there" % pole)

    converged = False
    for _ in range(30):
        N = np.empty(m)
        for i in range(m):
            N[i], xs[i], vs[i] = numerator(i, Y[i], xs[i], vs[i])
        F = svec * (D @ Y) - N
        F[0] = Y[0] - y_in
        if not np.all(np.isfinite(F)):
            raise fail
        dN = np.empty(m)
        for i in range(m):
            h = 1e-7 * (1.0 + abs(Y[i]))
            hi_, _, _ = numerator(i, Y[i] + h, xs[i], vs[i])
            lo_, _, _ = numerator(i, Y[i] - h, xs[i], vs[i])
            dN[i] = (hi_ - lo_) / (2.0 * h)
        J = svec[:, None] * D - np.diag(dN)
        J[0, :] = 0.0
        J[0, 0] = 1.0
        # rows whose sine and dN both vanish (neutral crossings) make the
        # raw system numerically singular; equilibrate before judging
        # convergence or solving
        r = np.max(np.abs(J), axis=1)
        r[r == 0.0] = 1.0
        if np.max(np.abs(F / r)) <= 1e-12 * scale:
            converged = True
            break
        try:
            step = np.linalg.solve(J / r[:, None], F / r)
        except np.linalg.LinAlgError:
            raise fail
        Y -= step
        if not np.all(np.isfinite(Y)):
            raise fail
        if np.max(np.abs(step)) <= 1e-14 * (1.0 + np.max(np.abs(Y))):
            converged = True
            break
    if not converged:
        raise fail

    interp = _cheb_interp(ts, Y)
    # a smooth crossing requires the numerator to vanish with the sine
    k = int(np.argmin(np.abs(ts - pole)))
    num_p, _, _ = numerator(k, float(interp(pole)), xs[k], vs[k],
                            t=pole, sv=0.0, cv=math.cos(osc.theta(pole)))
    n_scale = 1.0 + float(np.max(np.abs(N)))
    if abs(num_p) > 1e-6 * n_scale:
        raise fail
    return interp


def integrate_first_integral(osc, t0, x0, t1, t_eval=None, v0=None,
                             rtol=1e-10, atol=1e-12, pole_delta=None):
    """Integrate dx/dt given by the first integral from (t0, x0) to t1 > t0.

    The slope field has cotangent poles at t_n = (n*pi - alpha)/omega, where
    solutions cross x+g = 0.  For v-independent g the driver works in the
    deformed amplitude y = (x+g)/sin(theta): it marches dy/dt between
    poles and crosses each pole by spectral collocation of the regular
    sine-multiplied equation (see _pole_transit); x is recovered by solving
    x + g(t,x) = y*sin(theta) and v from v + f = omega*y*cos(theta), so no
    quantity is ever divided by a small sine.  When g depends on v the
    scaled first integral is regular at the poles and no splitting is
    performed.
    """
    if not t1 > t0:
        raise ValueError("driver requires t1 > t0")
    w = osc.omega
    delta = pole_delta if pole_delta is not None else 1e-6 / w
    if t_eval is None:
        t_eval = np.linspace(t0, t1, 257)
    t_eval = np.asarray(t_eval, dtype=float)
    if np.any(t_eval < t0) or np.any(t_eval > t1):
        raise ValueError("t_eval must lie within [t0, t1]")
    t_eval = np.unique(t_eval)

    start_pole = None
    if abs(math.sin(osc.theta(t0))) < 2.0 * w * delta:
        if osc.g_depends_v:
            raise CotangentPole("initial time sits on a cotangent pole; "
                                "start the span away from "
                                "(n*pi - alpha)/omega")
        # starting exactly on a crossing: x+g must vanish and v0 pins the
        # deformed amplitude through y = (v+f)/(omega*cos(theta))
        if v0 is None:
            raise CotangentPole("initial time sits on a cotangent pole; "
                                "provide v0 to pin the crossing amplitude")
        if abs(x0 + osc.val("g", t0, x0, v0)) > 1e-9 * (1.0 + abs(x0)):
            raise CotangentPole("initial position is off the crossing "
                                "x+g = 0 at a pole start")
        start_pole = (round(osc.theta(t0) / math.pi) * math.pi
                      - osc.alpha) / w

    if v0 is None:
        v0 = first_integral_velocity(osc, t0, x0)

    states = []
    poles_crossed = []

    if osc.g_depends_v:
        # regular at poles: integrate straight through with a warm-started
        # implicit velocity solve
        last_v = [v0]

        def rhs(t, x):
            vv = first_integral_velocity(osc, t, x, v_guess=last_v[0])
            last_v[0] = vv
            return vv

        prob = IvpProblem(rhs, "first", t0, x0, t1, rtol=rtol, atol=atol)
        traj = integrate(prob, t_eval=t_eval, dense=True)
        x_dense = traj.meta["x_of_t"]
        vv = v0
        for t in t_eval:
            xq = x_dense(float(t))
            vv = first_integral_velocity(osc, float(t), xq, v_guess=vv)
            states.append(PhaseState(float(t), xq, vv))
        ts_arr = np.array([s.t for s in states])
        vs_arr = np.array([s.v for s in states])

        def v_dense(tq):
            guess = float(np.interp(tq, ts_arr, vs_arr))
            return first_integral_velocity(osc, float(tq), x_dense(float(tq)),
                                           v_guess=guess)

        meta = {"alpha": osc.alpha, "poles_crossed": [],
                "method": "first-integral/implicit",
                "x_of_t": x_dense, "v_of_t": v_dense}
        return Trajectory(states, meta)

    # v-independent g: march the deformed amplitude between poles and hand
    # each pole window to the collocation transit
    poles = _poles_inside(osc, t0, t1, 2.0 * delta)
    half = 0.3 / w           # collocation half-width around each pole

    x_cell = [float(x0)]
    v_cell = [float(v0)]

    def x_from_y(t, y, guess=None):
        x = _solve_position(osc, t, y * math.sin(osc.theta(t)),
                            x_cell[0] if guess is None else guess)
        x_cell[0] = x
        return x

    def v_from(t, x, y):
        vv = _solve_velocity(osc, t, x, w * y * math.cos(osc.theta(t)),
                             v_cell[0])
        v_cell[0] = vv
        return vv

    def y_rhs(t, y):
        x = x_from_y(t, y)
        vv = v_from(t, x, y)
        num = (osc.val("g_t", t, x, vv) + osc.val("g_x", t, x, vv) * vv
               - osc.val("f", t, x, vv))
        return num / math.sin(osc.theta(t))

    if start_pole is None:
        y0 = (x0 + osc.val("g", t0, x0, v0)) / math.sin(osc.theta(t0))
    else:
        y0 = (v0 + osc.val("f", t0, x0, v0)) / (w * math.cos(osc.theta(t0)))
    pieces = []              # (lo, hi, y callable)

    cur_t, cur_y = t0, y0
    if start_pole is not None and t1 > t0 + 1e-13:
        wb = min(start_pole + half, t1)
        interp = _pole_transit(osc, t0, wb, start_pole, y0, x0, v0)
        pieces.append((t0, wb, lambda tq, fn=interp: float(fn(tq))))
        cur_t, cur_y = wb, float(interp(wb))
        poles_crossed.append(start_pole)
    for p in poles:
        wa, wb = max(p - half, t0), min(p + half, t1)
        if cur_t < wa - 1e-13:
            prob = IvpProblem(y_rhs, "first", cur_t, cur_y, wa,
                              rtol=rtol, atol=atol)
            y_dense = integrate(prob, t_eval=None, dense=True).meta["x_of_t"]
            pieces.append((cur_t, wa, y_dense))
            cur_t, cur_y = wa, float(y_dense(wa))
        interp = _pole_transit(osc, cur_t, wb, p, cur_y,
                               x_cell[0], v_cell[0])
        pieces.append((cur_t, wb, lambda tq, fn=interp: float(fn(tq))))
        cur_t, cur_y = wb, float(interp(wb))
        poles_crossed.append(p)
    if cur_t < t1 - 1e-13 or not pieces:
        prob = IvpProblem(y_rhs, "first", cur_t, cur_y, t1,
                          rtol=rtol, atol=atol)
        y_dense = integrate(prob, t_eval=None, dense=True).meta["x_of_t"]
        pieces.append((cur_t, t1, y_dense))

    def y_at(tq):
        for lo, hi, fn in pieces:
            if lo - 1e-12 <= tq <= hi + 1e-12:
                return float(fn(min(max(tq, lo), hi)))
        raise ValueError("time %r outside the integrated span" % tq)

    for t in t_eval:
        yq = y_at(float(t))
        xq = x_from_y(float(t), yq)
        states.append(PhaseState(float(t), xq, v_from(float(t), xq, yq)))

    ts_arr = np.array([s.t for s in states])
    xs_arr = np.array([s.x for s in states])
    vs_arr = np.array([s.v for s in states])

    def x_of_t(tq):
        tq = float(tq)
        return _solve_position(osc, tq, y_at(tq) * math.sin(osc.theta(tq)),
                               float(np.interp(tq, ts_arr, xs_arr)))

    def v_of_t(tq):
        tq = float(tq)
        xq = x_of_t(tq)
        return _solve_velocity(osc, tq, xq,
                               w * y_at(tq) * math.cos(osc.theta(tq)),
                               float(np.interp(tq, ts_arr, vs_arr)))

    meta = {"alpha": osc.alpha, "poles_crossed": poles_crossed,
            "method": "first-integral/amplitude-frame",
            "x_of_t": x_of_t, "v_of_t": v_of_t}
    return Trajectory(states, meta)


# --- time-varying frequency --------------------------------------------------------

def _t_only(e, name):
    e = as_expr(e)
    extra = exprdsl.variables(e) - {"t"}
    if extra:
        raise ValueError("%s must depend on t only; got variables %s"
                         % (name, sorted(extra)))
    return e


def generate_ode_time_varying(f, g, omega, params=None):
    """Second-order form for t-dependent deformations with frequency omega(t).

    The first integral is xd = omega(t)*cot(Phi(t)+alpha)*(x+g) - f with
    Phi the antiderivative of omega; eliminating the cotangent gives

        (x+g)*xdd + [(f - g') - (omega'/omega)(x+g)]*xd + f'(x+g)
          + omega^2 (x+g)^2 + f(f - g') - (omega'/omega) f (x+g) = 0.
    """
    f = _t_only(f, "f")
    g = _t_only(g, "g")
    omega = _t_only(omega, "omega")
    if params:
        f = substitute_params(f, params)
        g = substitute_params(g, params)
        omega = substitute_params(omega, params)
    for e in (f, g, omega):
        free = parameters(e)
        if free:
            raise UnboundNameError(sorted(free)[0])
    fp = differentiate(f, "t")
    gp = differentiate(g, "t")
    wp = differentiate(omega, "t")
    x = Var("x")
    xpg = add(x, g)
    lam = div(wp, omega)            # omega'/omega
    fmg = sub(f, gp)                # f - g'

    coeff_xdd = xpg
    coeff_xd = sub(fmg, mul(lam, xpg))
    remainder = sub(add(add(mul(fp, xpg), mul(powe(omega, Num(2.0)),
                                              mul(xpg, xpg))),
                        mul(f, fmg)),
                    mul(lam, mul(f, xpg)))
    return OdeForm(coeff_xdd, coeff_xd, remainder)


class TimeVaryingDeformation:
    """First-integral machinery for t-only deformations with omega(t).

    Phi(t) = integral of omega from t_ref accumulates by smooth fixed-order
    quadrature, so the slope field (and anything finite-differenced from it)
    is smooth in t.
    """

    def __init__(self, f, g, omega, alpha=0.0, t_ref=0.0, params=None):
        self.f = _t_only(f, "f")
        self.g = _t_only(g, "g")
        self.omega = _t_only(omega, "omega")
        if params:
            self.f = substitute_params(self.f, params)
            self.g = substitute_params(self.g, params)
            self.omega = substitute_params(self.omega, params)
        for e in (self.f, self.g, self.omega):
            free = parameters(e)
            if free:
                raise UnboundNameError(sorted(free)[0])
        self.alpha = float(alpha)
        self.t_ref = float(t_ref)
        self._f = _expr_fn(self.f)
        self._g = _expr_fn(self.g)
        self._w = _expr_fn(self.omega)
        self.phi = CumulativeIntegral(lambda t: self._w(t, 0.0, 0.0),
                                      self.t_ref)

    def omega_at(self, t):
        return self._w(t, 0.0, 0.0)

    def theta(self, t):
        return self.phi(t) + self.alpha

    def rhs(self, t, x, delta=1e-9):
        th = self.theta(t)
        s = math.sin(th)
        if abs(s) < delta:
            raise CotangentPole("sin(Phi(t)+alpha) = %r at t = %r" % (s, t))
        w = self.omega_at(t)
        return (w * math.cos(th) / s * (x + self._g(t, 0.0, 0.0))
                - self._f(t, 0.0, 0.0))

    def form(self):
        return generate_ode_time_varying(self.f, self.g, self.omega)


# --- quadratic-damping family with tanh phase law ------------------------------------

def riccati_family(b, omega):
    """Form  xdd + (b/omega)*xd^2/x - omega*(b-omega)*x = 0  (x != 0).

    Rejected degenerate parameters: b = omega collapses the linear term and
    b = 0 breaks the phase-law normalization.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    if abs(b - omega) < 1e-12:
        raise DegenerateParameters("b = omega collapses the linear term")
    if abs(b) < 1e-12:
        raise DegenerateParameters("b = 0 is excluded by the phase law")
    x = Var("x")
    v = Var("v")
    coeff_xdd = Num(1.0)
    coeff_xd = mul(Num(b / omega), div(v, x))
    remainder = mul(Num(-omega * (b - omega)), x)
    return OdeForm(coeff_xdd, coeff_xd, remainder)


def riccati_phase(state, omega):
    """Phase function (v - i*omega*x)/(v + i*omega*x) of the plain oscillator."""
    t, x, v = state
    den = complex(v, omega * x)
    if den == 0:
        raise ZeroDenominator("v and omega*x both vanish")
    return complex(v, -omega * x) / den


def _riccati_s(b, omega):
    return cmath.sqrt(complex(b * b - omega * omega))


def riccati_fit_alpha(b, omega, state):
    """Complex phase constant alpha matching the tanh law at one state."""
    if abs(b) < 1e-12 or abs(b - omega) < 1e-12:
        raise DegenerateParameters("b = 0 and b = omega are excluded")
    s = _riccati_s(b, omega)
    X0 = riccati_phase(state, omega)
    target = 1j * (b * X0 + omega) / s
    return cmath.atanh(target) / s - state[0]


def riccati_phase_formula(b, omega, alpha):
    """The closed-form phase law  X(t) = -(omega + i*s*tanh(s*(t+alpha)))/b
    with s = sqrt(b^2 - omega^2) (imaginary s turns tanh into tan)."""
    s = _riccati_s(b, omega)

    def X(t):
        return -(omega + 1j * s * cmath.tanh(s * (t + alpha))) / b
    return X


def riccati_invariant(b, omega):
    """Conserved quantity of the family:
    E = v^2 * x^(2b/omega) - omega^2 (b-omega)/(b+omega) * x^(2(b+omega)/omega)."""
    if abs(b + omega) < 1e-12:
        raise DegenerateParameters("b = -omega degenerates the invariant")
    p = 2.0 * b / omega
    q = 2.0 * (b + omega) / omega
    k = omega * omega * (b - omega) / (b + omega)

    def E(x, v):
        return v * v * x ** p - k * x ** q
    return E
