"""Evolution symbol U(t, s) and its Laplace transform V(z, s).

U solves the delay equation d/dt U(t, s) = W(s-1) U(t, s-1) with
U(0, s) = 1/sqrt(2 pi), and is realized as a vertical-line integral

    U(t, s) = B(s)/sqrt(2 pi) * (1/2 i pi)
              * int_{Re sigma = beta} t^(-(sigma-s)) Gamma(sigma-s) / B(sigma) dsigma

with beta in (Re s, 2).  Pulling the line left across the Gamma poles at
sigma = s - m yields the small-time twin representation

    U(t, s) = (1/sqrt(2 pi)) sum_{m < Re s - beta'} t^m/m! prod_{j<=m} W(s-j)
              + B(s)/sqrt(2 pi) * (1/2 i pi) * int_{Re sigma = beta'} (...)

with beta' in (0, Re s); each crossed pole contributes a *positive* Taylor
term (residue of Gamma at -m is (-1)^m/m!, and B(s)/B(s-m) telescopes to
prod_j (-W(s-j)) through the functional equation).  The two routes agree to
machine precision; the sign of the correction integral is plus.

V is the Laplace transform of U in t.  Transforming the line integral
termwise with int_0^inf e^(-zt) t^(-a) dt = Gamma(1-a) z^(a-1) and the
reflection formula gives

    V(z, s) = B(s)/(sqrt(2 pi) z)
              * int_{Re sigma = beta} e^((sigma-s) log(-z))
                / (B(sigma) (1 - e^(2 i pi (s - sigma)))) dsigma

with beta in (Re s, Re s + 1) and log(-z) = log|z| + i (Arg z - pi), i.e.
the branch with arg(-z) in (-2 pi, 0].  The reflection formula's 2 i pi
cancels the 1/(2 i pi) of the inverse transform, so no such prefactor
remains.  Any other branch or line placement breaks either the decay of
the integrand or the numerical Laplace identity, both of which are pinned
by tests.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.special import digamma, loggamma

from wavekin.bfunc import BranchError, _k_plus, default_evaluator
from wavekin.complexfn import EULER, eval_W
from wavekin.contour import ContourSpec, TailModel, integrate_vertical
from wavekin.errors import ConvergenceError

SQRT_2PI = math.sqrt(2.0 * math.pi)
INV_SQRT_2PI = 1.0 / SQRT_2PI

#: Decay scale of |U(t, s)| in s: |U| <= C * exp(-2 t log|ENV_B * s|).
ENV_B = math.exp(EULER / 2.0) / 2.0

# Default half-height of the sigma-window around Im s.  The integrand
# carries Gamma(sigma - s) ~ e^(-pi |v - Im s| / 2), so the truncated
# tail at 26 is ~1e-17 relative to the peak.
_HALF_HEIGHT = 26.0
# Reported-tail rate: slightly under pi/2 to stay conservative against
# the polynomial prefactor of |Gamma| and the slow growth of 1/|B|.
_TAIL_RATE = 0.9 * math.pi / 2.0
# Minimum distance from a shifted line to a crossed Gamma pole.
_POLE_MARGIN = 0.05


@dataclasses.dataclass(frozen=True)
class SymbolSample:
    """One evaluation of the evolution symbol.

    value is U(t, s); err is a non-negative bound combining the
    quadrature error estimate and the reported truncation tail.
    """

    t: float
    s: complex
    value: complex
    err: float

    def __post_init__(self):
        if not self.t >= 0.0:
            raise ValueError(f"t must be >= 0, got {self.t}")
        if not self.err >= 0.0:
            raise ValueError(f"err must be >= 0, got {self.err}")
        if not 0.0 < complex(self.s).real < 2.0:
            raise ValueError(f"Re s must lie in (0, 2), got {self.s}")
        if self.t == 0.0 and self.value != INV_SQRT_2PI:
            raise ValueError("at t = 0 the symbol is exactly 1/sqrt(2 pi)")


def _validate_s(s):
    s = complex(s)
    if not 0.0 < s.real < 2.0:
        raise ValueError(f"Re s must lie in (0, 2), got {s}")
    return s


def _default_beta(s):
    """Line abscissa for the direct representation, inside (Re s, 2)."""
    if s.real >= 2.0 - 1e-6:
        raise ValueError(
            f"no admissible line: (Re s, 2) is empty at Re s = {s.real}"
        )
    return min(s.real + 0.7, 0.5 * (s.real + 2.0))


def _gamma_line_integral(t, s, beta, evaluator, rel_tol, half_height,
                         b_abs):
    """(1/2 i pi) * int_{Re sigma = beta} t^(-(sigma-s)) Gamma(sigma-s)/B(sigma).

    Returns (value, err).  The power and the Gamma factor are combined in
    a single exponent so neither overflows on its own.  b_abs (=|B(s)|)
    sets the honest absolute tolerance: the final symbol value carries a
    B(s)/sqrt(2 pi) prefactor and lives on the scale 1/sqrt(2 pi), so an
    integral below rel_tol * 2 pi / |B(s)| is already negligible even
    when cancellation drives its own relative error up.
    """
    log_t = math.log(t)
    b_line = evaluator.line_interpolator(
        beta, s.imag - half_height - 1.0, s.imag + half_height + 1.0
    )

    def f(sigma):
        a = sigma - s
        return np.exp(loggamma(a) - a * log_t) / b_line(sigma)

    spec = ContourSpec(
        abscissa=beta,
        half_height=half_height,
        rel_tol=rel_tol,
        abs_tol=rel_tol * 2.0 * np.pi / max(b_abs, 1e-300),
        center=s.imag,
    )
    r = integrate_vertical(
        f, spec, tail=TailModel("exp", _TAIL_RATE), osc_freq=abs(log_t)
    )
    value = r.value / (2j * np.pi)
    err = (r.error_estimate + r.truncation_tail) / (2.0 * np.pi)
    return value, err


def eval_U(t, s, beta=None, evaluator=None, rel_tol=1e-10,
           half_height=_HALF_HEIGHT):
    """Evaluate U(t, s) for Re s in (0, 2) via the direct line integral.

    t = 0 returns the exact initial value without quadrature.  beta
    defaults to a point of (Re s, 2) well clear of both ends; any
    admissible beta gives the same value (pinned by tests at 1e-8).
    """
    s = _validate_s(s)
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return SymbolSample(t=0.0, s=s, value=INV_SQRT_2PI, err=0.0)
    if beta is None:
        beta = _default_beta(s)
    if not s.real < beta < 2.0:
        raise ValueError(f"beta must lie in (Re s, 2), got {beta}")
    ev = evaluator if evaluator is not None else default_evaluator()
    b_s = ev.eval_B(s)
    val, err = _gamma_line_integral(t, s, beta, ev, rel_tol, half_height,
                                    abs(b_s))
    scale = abs(b_s) / SQRT_2PI
    return SymbolSample(t=float(t), s=s, value=b_s / SQRT_2PI * val,
                        err=scale * err)


def taylor_terms(s, n_terms):
    """Coefficients of the entire t-series of U: 1/m! prod_{j=1..m} W(s-j).

    The series sqrt(2 pi) U = sum_m c_m t^m follows from iterating the
    delay equation at t = 0; it converges for every t because the product
    grows only logarithmically per factor.
    """
    s = complex(s)
    coeffs = [1.0 + 0.0j]
    prod = 1.0 + 0.0j
    for m in range(1, n_terms):
        prod *= complex(eval_W(np.array([s - m]))[0])
        coeffs.append(prod / math.factorial(m))
    return np.array(coeffs)


def eval_U_taylor(t, s, n_terms=24):
    """Sum the entire t-series of U (independent small-time route)."""
    c = taylor_terms(s, n_terms)
    powers = np.power(complex(t), np.arange(n_terms))
    return complex(np.dot(c, powers)) * INV_SQRT_2PI


def eval_U_small_t(t, s, beta_prime=None, evaluator=None, rel_tol=1e-10,
                   half_height=_HALF_HEIGHT):
    """Evaluate U(t, s) via the left-shifted line, efficient as t -> 0.

    The line sits at beta' in (0, Re s); the Gamma poles crossed on the
    way contribute the Taylor polynomial of U, and the remaining integral
    is O(t^(Re s - beta')).  Preferred below t ~ 0.05 where the direct
    route's oscillation grows.
    """
    s = _validate_s(s)
    if not 0.0 <= t < 1.0:
        raise ValueError(f"the left-line route needs 0 <= t < 1, got {t}")
    if t == 0.0:
        return SymbolSample(t=0.0, s=s, value=INV_SQRT_2PI, err=0.0)
    if beta_prime is None:
        beta_prime = 0.5 * s.real
    if not 0.0 < beta_prime < s.real:
        raise ValueError(
            f"beta_prime must lie in (0, Re s), got {beta_prime}"
        )
    n_crossed = math.ceil(s.real - beta_prime)
    gap = min(abs(s.real - m - beta_prime) for m in range(n_crossed + 1))
    if gap < _POLE_MARGIN:
        raise ValueError(
            f"beta_prime = {beta_prime} sits within {_POLE_MARGIN} of a "
            f"crossed pole line Re s - m; shift it"
        )
    ev = evaluator if evaluator is not None else default_evaluator()
    b_s = ev.eval_B(s)
    poly = complex(np.dot(
        taylor_terms(s, n_crossed),
        np.power(complex(t), np.arange(n_crossed)),
    ))
    val, err = _gamma_line_integral(t, s, beta_prime, ev, rel_tol,
                                    half_height, abs(b_s))
    scale = abs(b_s) / SQRT_2PI
    return SymbolSample(
        t=float(t), s=s,
        value=poly * INV_SQRT_2PI + b_s / SQRT_2PI * val,
        err=scale * err,
    )


def eval_dU_ds(t, s, beta=None, evaluator=None, rel_tol=1e-10,
               half_height=_HALF_HEIGHT):
    """d/ds U(t, s), differentiating under the integral sign.

    The s-dependence sits in three factors: the prefactor B(s) (handled
    with a Cauchy derivative circle), the power t^(s) and Gamma(sigma-s),
    whose derivatives are closed forms and combine into the kernel
    [log t - psi(sigma - s)].  Returns the derivative value; at t = 0 the
    symbol is constant in s, so the derivative is exactly 0.
    """
    s = _validate_s(s)
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return 0.0 + 0.0j
    if beta is None:
        beta = _default_beta(s)
    if not s.real < beta < 2.0:
        raise ValueError(f"beta must lie in (Re s, 2), got {beta}")
    ev = evaluator if evaluator is not None else default_evaluator()
    b_s = ev.eval_B(s)
    b_prime = ev.eval_B_prime(s)
    base, _ = _gamma_line_integral(t, s, beta, ev, rel_tol, half_height,
                                   abs(b_s))

    log_t = math.log(t)
    b_line = ev.line_interpolator(
        beta, s.imag - half_height - 1.0, s.imag + half_height + 1.0
    )

    def f(sigma):
        a = sigma - s
        kern = log_t - digamma(a)
        return np.exp(loggamma(a) - a * log_t) * kern / b_line(sigma)

    spec = ContourSpec(
        abscissa=beta,
        half_height=half_height,
        rel_tol=rel_tol,
        abs_tol=rel_tol * 2.0 * np.pi / max(abs(b_s), 1e-300),
        center=s.imag,
    )
    r = integrate_vertical(
        f, spec, tail=TailModel("exp", _TAIL_RATE), osc_freq=abs(log_t)
    )
    inner = r.value / (2j * np.pi)
    return b_prime / SQRT_2PI * base + b_s / SQRT_2PI * inner


def _log_minus_z(z):
    """log(-z) on the branch with arg(-z) in (-2 pi, 0]."""
    return math.log(abs(z)) + 1j * (np.angle(z) - np.pi)


def eval_V(z, s, beta=None, evaluator=None, rel_tol=1e-10,
           half_height=34.0):
    """Laplace transform V(z, s) of U in t, for Re z > 0, Re s in (0, 2).

    The line sits at beta in (Re s, Re s + 1), between two poles of the
    reflection kernel; the branch of log(-z) is the one with arg(-z) in
    (-2 pi, 0].  For Re z > 0 both line ends decay at rate >= pi/2.
    """
    z = complex(z)
    s = _validate_s(s)
    if not z.real > 0.0:
        raise BranchError(
            f"V needs Re z > 0 (got z = {z}); the branch of log(-z) "
            f"degenerates toward the cut on (-inf, 0]"
        )
    if beta is None:
        beta = s.real + 0.5
    if not s.real < beta < s.real + 1.0:
        raise ValueError(
            f"beta must lie in (Re s, Re s + 1), got {beta}"
        )
    ev = evaluator if evaluator is not None else default_evaluator()
    logmz = _log_minus_z(z)
    b_line = ev.line_interpolator(
        beta, s.imag - half_height - 1.0, s.imag + half_height + 1.0
    )

    def f(sigma):
        v = (sigma - beta).imag
        return (
            np.exp((sigma - s) * logmz)
            * _k_plus(s, beta, v)
            / b_line(sigma)
        )

    b_s = ev.eval_B(s)
    phi = abs(logmz.imag)
    rate = 0.9 * min(phi, 2.0 * math.pi - phi)
    spec = ContourSpec(
        abscissa=beta,
        half_height=half_height,
        rel_tol=rel_tol,
        abs_tol=rel_tol / max(abs(b_s), 1e-300),
        center=s.imag,
    )
    r = integrate_vertical(
        f, spec, tail=TailModel("exp", rate), osc_freq=abs(math.log(abs(z)))
    )
    return b_s / (SQRT_2PI * z) * r.value


def laplace_inverse_U(t, s, d=None, evaluator=None, rel_tol=1e-7,
                      n_subtract=5):
    """Recover U(t, s) from V by Bromwich-line quadrature.

    An independent consistency oracle for eval_U: U(t, s) is the integral
    of e^(zt) V(z, s) dz / (2 i pi) over a vertical line Re z = d.  No
    abscissa is canonical -- V is analytic in the whole right half-plane,
    so any d > 0 works -- hence d is caller-supplied and d-independence is
    asserted in the tests rather than assumed here.

    Direct quadrature of V converges like 1/height (V ~ 1/(sqrt(2 pi) z)),
    so the first n_subtract Taylor terms of U(., s) at t = 0 are inverted
    in closed form (z^(-m-1) <-> t^m/m!) and only the remainder is
    integrated.  With u_m(s) = prod_{j<=m} W(s-j)/sqrt(2 pi) the Taylor
    coefficients forced by the delay equation, the functional equation
    z V(z, s) = W(s-1) V(z, s-1) + 1/sqrt(2 pi) telescopes into

        V(z, s) - sum_{m<M} u_m(s) z^(-m-1)
          = W(s-1) [V(z, s-1) - sum_{k<M-1} u_k(s-1) z^(-k-1)] / z,

    so one eval_V call per node (at argument s - 1) gives an integrand
    decaying like z^(-M-1), and the contour never has to leave Re z > 0,
    where V's branch lives.  Needs Re s in (1, 2) so that s - 1 stays in
    V's strip.
    """
    s = _validate_s(s)
    if not s.real > 1.0:
        raise ValueError(
            f"the inverse transform consults V at s - 1, so it needs "
            f"Re s in (1, 2); got s = {s}")
    if not t > 0.0:
        raise ValueError(f"the inverse transform needs t > 0, got {t}")
    if d is None:
        d = 0.8
    if not d > 0.0:
        raise ValueError(f"the line must sit in Re z > 0, got d = {d}")
    if n_subtract < 2:
        raise ValueError("need n_subtract >= 2 for an integrable remainder")
    ev = evaluator if evaluator is not None else default_evaluator()
    w_shift = complex(eval_W(np.array([s - 1.0]))[0])

    m = np.arange(n_subtract)
    poly = complex(np.dot(taylor_terms(s, n_subtract), t ** m)) * INV_SQRT_2PI
    # u_k(s - 1) = k! * c_k(s - 1) / sqrt(2 pi), c_k the taylor_terms.
    fact = np.cumprod(np.concatenate(([1.0], np.arange(1.0, n_subtract - 1))))
    u_shift = taylor_terms(s - 1.0, n_subtract - 1) * fact * INV_SQRT_2PI

    def f(z):
        v = np.array([eval_V(zi, s - 1.0, evaluator=ev,
                             rel_tol=rel_tol * 1e-2) for zi in z])
        head = np.power.outer(z, -(m[:-1] + 1.0)) @ u_shift
        return np.exp(z * t) * w_shift * (v - head) / z

    # Truncation height from the declared z^(-M-1) tail: the remainder's
    # leading coefficient is W(s-1) u_{M-1}(s-1); a 10x safety margin and
    # a 0.3 share of the absolute budget fix the height.
    tol_abs = rel_tol * INV_SQRT_2PI
    u_lead = abs(w_shift) * max(abs(u_shift[-1]) * (n_subtract - 1),
                                INV_SQRT_2PI)
    height = (10.0 * u_lead / (n_subtract * 0.3 * tol_abs)) ** (1.0 / n_subtract)
    height = min(max(height, 10.0), 220.0)
    spec = ContourSpec(abscissa=d, half_height=height, rel_tol=rel_tol,
                       abs_tol=tol_abs, center=0.0)
    r = integrate_vertical(f, spec,
                           tail=TailModel("power", rate=n_subtract + 1.0),
                           osc_freq=t)
    return poly + complex(r.value) / (2j * np.pi)


def check_U_ode(t, s, dt, evaluator=None, rel_tol=1e-10):
    """Residual of the delay equation at (t, s) by central differences.

    Returns |(U(t+dt) - U(t-dt))/(2 dt) - W(s-1) U(t, s-1)|; needs
    Re s in (1, 2) so the shifted point stays in the strip, and t > dt.
    """
    s = complex(s)
    if not 1.0 < s.real < 2.0:
        raise ValueError(f"the shifted point needs Re s in (1, 2), got {s}")
    if not t > dt > 0.0:
        raise ValueError(f"need t > dt > 0, got t = {t}, dt = {dt}")
    ev = evaluator if evaluator is not None else default_evaluator()
    u_plus = eval_U(t + dt, s, evaluator=ev, rel_tol=rel_tol)
    u_minus = eval_U(t - dt, s, evaluator=ev, rel_tol=rel_tol)
    lhs = (u_plus.value - u_minus.value) / (2.0 * dt)
    w = complex(eval_W(np.array([s - 1.0]))[0])
    rhs = w * eval_U(t, s - 1.0, evaluator=ev, rel_tol=rel_tol).value
    return float(abs(lhs - rhs))


def eval_U_line(t, s_values, beta=None, evaluator=None,
                half_height=_HALF_HEIGHT, panel_width=None, rel_tol=1e-9):
    """Evaluate U(t, s) for many s sharing one real part, on one B-line.

    The workhorse behind profile reconstruction: all s-values share the
    line Re sigma = beta, so B(sigma) is evaluated once on a uniform
    composite Gauss grid and each s takes a windowed dot product against
    its own Gamma weights.  Returns (values, errs) aligned with s_values.
    """
    s_values = np.asarray(s_values, dtype=complex)
    if s_values.size == 0:
        return np.zeros(0, dtype=complex), np.zeros(0)
    re = s_values.real
    if not np.allclose(re, re[0], rtol=0.0, atol=1e-12):
        raise ValueError("all s must share one real part")
    s0 = complex(re[0], 0.0)
    _validate_s(s0)
    if not t > 0.0:
        raise ValueError(f"the batched route needs t > 0, got {t}")
    if beta is None:
        beta = _default_beta(s0)
    if not s0.real < beta < 2.0:
        raise ValueError(f"beta must lie in (Re s, 2), got {beta}")
    ev = evaluator if evaluator is not None else default_evaluator()
    log_t = math.log(t)
    if panel_width is None:
        panel_width = min(0.22, np.pi / (4.0 * (abs(log_t) + 1.0)))

    im = s_values.imag
    lo = im.min() - half_height
    hi = im.max() + half_height
    n_panels = int(math.ceil((hi - lo) / panel_width))
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    x24, w24 = np.polynomial.legendre.leggauss(24)
    x12, w12 = np.polynomial.legendre.leggauss(12)
    v24 = (mids[:, None] + half * x24).ravel()
    v12 = (mids[:, None] + half * x12).ravel()
    b_interp = ev.line_interpolator(beta, lo - 1.0, hi + 1.0)
    inv_b24 = 1.0 / b_interp(beta + 1j * v24)
    inv_b12 = 1.0 / b_interp(beta + 1j * v12)
    w24_full = np.tile(w24 * half, n_panels)
    w12_full = np.tile(w12 * half, n_panels)

    b_line = ev.eval_B_many(s_values)
    values = np.empty(s_values.size, dtype=complex)
    errs = np.empty(s_values.size)
    for i, s in enumerate(s_values):
        j_lo, j_hi = np.searchsorted(edges, [s.imag - half_height,
                                             s.imag + half_height])
        j_lo = max(j_lo - 1, 0)
        j_hi = min(j_hi + 1, n_panels)
        sl24 = slice(j_lo * 24, j_hi * 24)
        sl12 = slice(j_lo * 12, j_hi * 12)
        a24 = beta + 1j * v24[sl24] - s
        a12 = beta + 1j * v12[sl12] - s
        g24 = np.exp(loggamma(a24) - a24 * log_t) * inv_b24[sl24]
        g12 = np.exp(loggamma(a12) - a12 * log_t) * inv_b12[sl12]
        fine = 1j * np.dot(w24_full[sl24], g24)
        coarse = 1j * np.dot(w12_full[sl12], g12)
        inner = fine / (2j * np.pi)
        err = abs(fine - coarse) / (2.0 * np.pi)
        scale = b_line[i] / SQRT_2PI
        values[i] = scale * inner
        errs[i] = abs(scale) * err
    bad = errs > rel_tol * np.maximum(np.abs(values), INV_SQRT_2PI * 1e-4)
    if np.any(bad):
        k = int(np.argmax(errs))
        raise ConvergenceError(
            f"batched line quadrature did not converge at s = "
            f"{s_values[k]}: err {errs[k]:.2e}"
        )
    return values, errs


def envelope(t, s, constant):
    """The decay envelope constant * exp(-2 t log|ENV_B * s|)."""
    return constant * math.exp(-2.0 * t * math.log(abs(ENV_B * complex(s))))
