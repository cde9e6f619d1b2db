"""Applications of the deformation construction.

Two consumers of the oscillator machinery: travelling-wave profiles of
reaction-convection-diffusion (RCD) systems, where the deformation pair
(f, g) generates the diffusion/convection/reaction coefficients, and the
large-amplitude cantilever beam equation, where a position deformation
g(u) built from asinh reproduces the velocity-squared coefficient.
"""

from __future__ import annotations

import math
import warnings
from collections import namedtuple

import numpy as np

from . import exprdsl
from .errors import (
    ApproxOutOfRegime,
    BracketZero,
    DomainViolation,
    ImplicitNoRoot,
    NegativeAlpha,
    NoSignChange,
    UnboundNameError,
)
from .exprdsl import (
    Num,
    Var,
    add,
    as_expr,
    differentiate,
    div,
    evaluate,
    mul,
    neg,
    parameters,
    sub,
    substitute_params,
    variables,
)
from .numerics import (
    CumulativeIntegral,
    IvpProblem,
    PhaseState,
    Trajectory,
    fd_derivatives,
    find_root,
    integrate,
)


def _u_only(e, name, params=None):
    e = as_expr(e)
    if params:
        e = substitute_params(e, params)
    free = parameters(e)
    if free:
        raise UnboundNameError(sorted(free)[0])
    extra = variables(e) - {"u"}
    if extra:
        raise ValueError("%s must depend on u only; got variables %s"
                         % (name, sorted(extra)))
    return e


def _u_fn(e):
    def fn(u):
        return evaluate(e, {"u": float(u)})
    return fn


class RcdSystem:
    """Travelling-wave RCD coefficients.

    D, B, Q may be expressions in u or plain callables.  The equivalent
    phase-plane equation is

        u'' + alpha(u) u'^2 + beta(u) u' + gamma(u) = 0

    with alpha = (ln D)', beta = (Vf + B)/D, gamma = Q/D.  When the system
    was built from a deformation pair the exact coefficient callables are
    attached; otherwise they are recovered from D, B, Q numerically.
    """

    def __init__(self, D, B, Q, Vf=0.0, D0=1.0,
                 alpha=None, beta=None, gamma=None):
        self.Vf = float(Vf)
        self.D0 = float(D0)
        if self.Vf < 0.0:
            raise ValueError("Vf must be >= 0")
        if self.D0 <= 0.0:
            raise ValueError("D0 must be > 0")
        self.D = self._wrap(D)
        self.B = self._wrap(B)
        self.Q = self._wrap(Q)
        self._alpha = alpha
        self._beta = beta
        self._gamma = gamma

    @staticmethod
    def _wrap(obj):
        if callable(obj):
            return obj
        return _u_fn(_u_only(obj, "coefficient"))

    def _dlnD(self, u, h=1e-5):
        """(ln D)' by Richardson-extrapolated central differences."""
        def ln_d(x):
            d = self.D(x)
            if d <= 0.0:
                raise DomainViolation("D(u) <= 0 at u = %r" % (x,))
            return math.log(d)
        c1 = (ln_d(u + h) - ln_d(u - h)) / (2.0 * h)
        c2 = (ln_d(u + h / 2.0) - ln_d(u - h / 2.0)) / h
        return (4.0 * c2 - c1) / 3.0

    def alpha(self, u):
        if self._alpha is not None:
            return self._alpha(u)
        return self._dlnD(u)

    def beta(self, u):
        if self._beta is not None:
            return self._beta(u)
        return (self.Vf + self.B(u)) / self.D(u)

    def gamma(self, u):
        if self._gamma is not None:
            return self._gamma(u)
        return self.Q(u) / self.D(u)


def rcd_from_fg(f, g, omega, Vf=0.0, D0=1.0, params=None):
    """Build the RCD coefficient triple generated by a deformation pair.

    f and g are expressions in u.  The phase-plane coefficients are

        alpha(u) = -g'/(u+g)
        beta(u)  = f' - f (g'-1)/(u+g)
        gamma(u) = omega^2 (u+g) + f^2/(u+g)

    and the physical coefficients D = D0 exp(int_1^u alpha), B = beta*D - Vf,
    Q = gamma*D.  Evaluations where u+g vanishes raise DomainViolation.
    """
    omega = float(omega)
    f = _u_only(f, "f", params)
    g = _u_only(g, "g", params)
    fp = differentiate(f, "u")
    gp = differentiate(g, "u")
    u = Var("u")
    upg = add(u, g)

    alpha_e = neg(div(gp, upg))
    beta_e = sub(fp, div(mul(f, sub(gp, Num(1.0))), upg))
    gamma_e = add(mul(Num(omega * omega), upg), div(mul(f, f), upg))

    upg_fn = _u_fn(upg)

    def guarded(e):
        raw = _u_fn(e)

        def fn(uq):
            if abs(upg_fn(uq)) < 1e-300:
                raise DomainViolation("u + g vanishes at u = %r" % (uq,))
            return raw(uq)
        return fn

    alpha_fn = guarded(alpha_e)
    beta_fn = guarded(beta_e)
    gamma_fn = guarded(gamma_e)

    accum = CumulativeIntegral(alpha_fn, 1.0)

    def D(uq):
        return D0 * math.exp(accum(float(uq)))

    def B(uq):
        return beta_fn(uq) * D(uq) - Vf

    def Q(uq):
        return gamma_fn(uq) * D(uq)

    sys = RcdSystem(D, B, Q, Vf=Vf, D0=D0,
                    alpha=alpha_fn, beta=beta_fn, gamma=gamma_fn)
    sys.f = f
    sys.g = g
    sys.omega = omega
    return sys


def rcd_power_family(beta, gamma, delta, omega=1.0, Vf=0.0, D0=1.0):
    """Closed-form coefficients for g = (beta-1)u, f = -gamma*u + delta*u^2:

        D(u) = D0 u^((1-beta)/beta)
        B(u) = [-2 gamma/beta + (beta+2) delta u / beta] D(u) - Vf
        Q(u) = [omega^2 beta u + u (gamma - delta u)^2 / beta] D(u)

    valid on u > 0 (the D exponent is fractional in general).
    """
    b, gam, dlt, w = float(beta), float(gamma), float(delta), float(omega)
    if b == 0.0:
        raise ValueError("beta must be nonzero")
    expo = (1.0 - b) / b

    def check(u):
        if u <= 0.0 and expo != 0.0:
            raise DomainViolation("power-family coefficients need u > 0")

    def D(u):
        check(u)
        return D0 * u ** expo

    def alpha_fn(u):
        if expo == 0.0:
            return 0.0
        check(u)
        return expo / u

    def beta_fn(u):
        return -2.0 * gam / b + (b + 2.0) * dlt * u / b

    def gamma_fn(u):
        return w * w * b * u + u * (gam - dlt * u) ** 2 / b

    def B(u):
        return beta_fn(u) * D(u) - Vf

    def Q(u):
        return gamma_fn(u) * D(u)

    return RcdSystem(D, B, Q, Vf=Vf, D0=D0,
                     alpha=alpha_fn, beta=beta_fn, gamma=gamma_fn)


def rcd_travelling_wave(params, force_quadrature=False):
    """Travelling-wave profile for the power family:

        u(xi) = sin^beta(theta) e^(gamma xi) / B(xi),
        B = A + delta * int_{xi_ref}^xi sin^beta(theta) e^(gamma tau) dtau,

    theta = omega*xi + alpha.  For beta = 1 the integral has the closed
    antiderivative e^(gamma xi)(gamma sin(theta) - omega cos(theta))
    /(gamma^2+omega^2), used unless force_quadrature is set.  Raises
    BracketZero where B vanishes and DomainViolation outside the
    sin(theta) > 0 interval when beta is fractional.
    """
    beta = float(params["beta"])
    gam = float(params["gamma"])
    dlt = float(params["delta"])
    A = float(params["A"])
    w = float(params.get("omega", 1.0))
    al = float(params.get("alpha", 0.0))
    xi_ref = float(params.get("xi_ref", (math.pi / 2.0 - al) / w))
    beta_integer = beta.is_integer()

    def s_pow(s, p):
        if beta_integer:
            return s ** int(p) if float(p).is_integer() else s ** p
        if s <= 0.0:
            raise DomainViolation(
                "sin(omega*xi+alpha) <= 0 with fractional beta")
        return s ** p

    def integrand(xi):
        return s_pow(math.sin(w * xi + al), beta) * math.exp(gam * xi)

    if beta == 1.0 and not force_quadrature:
        den = gam * gam + w * w

        def anti(xi):
            th = w * xi + al
            return math.exp(gam * xi) * (gam * math.sin(th)
                                         - w * math.cos(th)) / den

        ref = anti(xi_ref)

        def accumulated(xi):
            return anti(xi) - ref
        closed = True
    else:
        accum = CumulativeIntegral(integrand, xi_ref)

        def accumulated(xi):
            return accum(xi)
        closed = False

    def bracket(xi):
        B = A + dlt * accumulated(xi)
        if abs(B) < 1e-12 * (1.0 + abs(A)):
            raise BracketZero("wave bracket vanishes at xi = %r" % (xi,))
        return B

    def u_of_xi(xi):
        xi = float(xi)
        s = math.sin(w * xi + al)
        return s_pow(s, beta) * math.exp(gam * xi) / bracket(xi)

    u_of_xi.params = dict(params)
    u_of_xi.closed_form = closed
    return u_of_xi


def rcd_residual(sys, u_of_xi, xi_samples, h=1e-3):
    """Max absolute residual of u'' + alpha(u)u'^2 + beta(u)u' + gamma(u)
    along a profile, with derivatives by Richardson-extrapolated central
    differences."""
    worst = 0.0
    for xi in np.asarray(xi_samples, dtype=float):
        u, up, upp = fd_derivatives(u_of_xi, float(xi), h)
        r = upp + sys.alpha(u) * up * up + sys.beta(u) * up + sys.gamma(u)
        if not math.isfinite(r):
            warnings.warn("non-finite residual at xi = %r" % (xi,))
            return float("inf")
        worst = max(worst, abs(r))
    return worst


# --- cantilever beam ---------------------------------------------------------------

class BeamModel:
    """Dimensionless large-deflection beam oscillator

        u'' + alpha u/(1+alpha u^2) u'^2
            + omega^2 [u + (beta-alpha) u^3/(1+alpha u^2)] = 0
    """

    def __init__(self, alpha_coef, beta_coef, omega=1.0, c1=0.0):
        self.alpha_coef = float(alpha_coef)
        self.beta_coef = float(beta_coef)
        self.omega = float(omega)
        self.c1 = float(c1)
        if not self.omega > 0.0:
            raise ValueError("omega must be > 0")


def beam_g_expr(model):
    """Position deformation generating the beam's u'^2 coefficient:

        g(u) = 0.5 [ (2 sqrt(alpha) c1 + asinh(sqrt(alpha) u))
                     / sqrt(alpha (1 + alpha u^2)) - u ]
    """
    a = model.alpha_coef
    if a <= 0.0:
        raise NegativeAlpha("the asinh construction needs alpha > 0")
    text = ("0.5*((2*sqrt(%r)*%r + asinh(sqrt(%r)*u))"
            "/sqrt(%r*(1 + %r*u^2)) - u)" % (a, model.c1, a, a, a))
    return exprdsl.parse(text)


def beam_g(model):
    e = beam_g_expr(model)
    return _u_fn(e)


def beam_h_expr(model):
    """Cubic restoring correction h(u) = (beta-alpha) u^3/(1+alpha u^2)."""
    a, b = model.alpha_coef, model.beta_coef
    return exprdsl.parse("(%r)*u^3/(1 + %r*u^2)" % (b - a, a))


SeriesComparison = namedtuple("SeriesComparison",
                              ["g_coeffs", "h_coeffs", "max_mismatch"])


def beam_series_compare(model, order=6):
    """Taylor coefficients of g(u) and h(u) about u = 0 up to `order`,
    plus their largest coefficient mismatch (the approximation g ~ h is
    the basis of the closed-form beam solution)."""
    if not 0 <= order <= 6:
        raise ValueError("order must be between 0 and 6")
    ge = beam_g_expr(model)
    he = beam_h_expr(model)
    g_coeffs = []
    h_coeffs = []
    fact = 1.0
    for k in range(order + 1):
        if k > 0:
            fact *= k
            ge = differentiate(ge, "u")
            he = differentiate(he, "u")
        g_coeffs.append(evaluate(ge, {"u": 0.0}) / fact)
        h_coeffs.append(evaluate(he, {"u": 0.0}) / fact)
    mism = max(abs(gc - hc) for gc, hc in zip(g_coeffs, h_coeffs))
    return SeriesComparison(tuple(g_coeffs), tuple(h_coeffs), mism)


def _beam_rhs(model):
    a, b, w = model.alpha_coef, model.beta_coef, model.omega

    def rhs(t, y):
        u, v = y
        den = 1.0 + a * u * u
        acc = -(a * u / den) * v * v - w * w * (u + (b - a) * u ** 3 / den)
        return [v, acc]
    return rhs


def _beam_implicit_funcs(model):
    """F(u) = u exp(int_0^u rho) with rho = -g/(s(s+g)); F is odd, strictly
    increasing, and d ln F/du = 1/(u+g), so F(u(t)) = K sin(omega t + phi)
    along solutions.  Also returns G = F/(u+g) (regular at u = 0)."""
    a = model.alpha_coef
    g_fn = beam_g(model)

    def g_over_u(u):
        # series of g/u below the cancellation floor
        if abs(u) < 1e-3:
            return -a * u * u / 3.0 + (4.0 / 15.0) * a * a * u ** 4
        return g_fn(u) / u

    def rho(s):
        if abs(s) < 1e-3:
            return a * s / 3.0 - (7.0 / 45.0) * a * a * s ** 3
        g = g_fn(s)
        return -g / (s * (s + g))

    Q = CumulativeIntegral(rho, 0.0)

    def F(u):
        return u * math.exp(Q(float(u)))

    def G(u):
        return math.exp(Q(float(u))) / (1.0 + g_over_u(u))

    return F, G, g_fn


def beam_solve(model, mode, ic, t_span, t_eval=None,
               rtol=1e-10, atol=1e-12):
    """Integrate the beam oscillator.

    mode "direct" integrates the second-order equation for any alpha with
    1 + alpha u^2 > 0.  mode "approx" evaluates the closed-form implicit
    solution F(u) = K sin(omega t + phi), which is exact when the cubic
    correction h matches the deformation series — hence gated to
    beta = 2*alpha/3 (and c1 = 0), the regime where that holds through u^3.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    u0, v0 = float(ic[0]), float(ic[1])
    if t_eval is None:
        t_eval = np.linspace(t0, t1, 257)
    t_eval = np.asarray(t_eval, dtype=float)

    if mode == "direct":
        prob = IvpProblem(_beam_rhs(model), "system", t0, (u0, v0), t1,
                          rtol=rtol, atol=atol)
        traj = integrate(prob, t_eval=t_eval, dense=True)
        traj.meta["mode"] = "direct"
        return traj

    if mode != "approx":
        raise ValueError("mode must be 'approx' or 'direct'")
    a, b, w = model.alpha_coef, model.beta_coef, model.omega
    if a <= 0.0:
        raise NegativeAlpha("approximate mode needs alpha > 0")
    if abs(b - 2.0 * a / 3.0) > 1e-9:
        raise ApproxOutOfRegime(
            "closed-form mode requires beta = 2*alpha/3; got beta = %r"
            % (b,))
    if model.c1 != 0.0:
        raise ApproxOutOfRegime("closed-form mode requires c1 = 0")

    F, G, g_fn = _beam_implicit_funcs(model)
    F0, G0 = F(u0), G(u0)
    th0 = math.atan2(F0, v0 * G0 / w)
    K = math.hypot(F0, v0 * G0 / w)
    if K == 0.0:
        states = [PhaseState(float(t), 0.0, 0.0) for t in t_eval]
        return Trajectory(states, {"mode": "approx", "K": 0.0,
                                   "phi": 0.0})
    phi = th0 - w * t0

    def u_at(t):
        target = K * math.sin(w * t + phi)
        R = abs(target) * (1.0 + 1e-9) + 1e-9
        try:
            return find_root(lambda uu: F(uu) - target, -R, R, tol=1e-14)
        except NoSignChange:
            raise ImplicitNoRoot(
                "implicit beam relation has no root at t = %r" % (t,))

    def v_at(t, u=None):
        if u is None:
            u = u_at(t)
        return w * K * math.cos(w * t + phi) / G(u)

    states = []
    for t in t_eval:
        uq = u_at(float(t))
        states.append(PhaseState(float(t), uq, v_at(float(t), uq)))
    meta = {"mode": "approx", "K": K, "phi": phi,
            "x_of_t": lambda tq: u_at(float(tq)),
            "v_of_t": lambda tq: v_at(float(tq))}
    return Trajectory(states, meta)
