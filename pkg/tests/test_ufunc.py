"""Tests for the symbol U(t, s), its derivative, and the resolvent V(z, s).

Two independent representations of U (right-contour and small-t residue
series), an entire-series oracle, the delay ODE in t, a Bromwich-line
inverse of V, and frozen decay-envelope constants from the calibration
record cross-check one another.  Frozen point values were measured with
this package's own contour engine after the dual-representation and
functional-equation suites first passed.
"""

import math

import numpy as np
import pytest

from wavekin.bfunc import BranchError, default_evaluator
from wavekin.calibration import constant
from wavekin.complexfn import eval_W
from wavekin.ufunc import (
    INV_SQRT_2PI,
    SymbolSample,
    check_U_ode,
    envelope,
    eval_dU_ds,
    eval_U,
    eval_U_line,
    eval_U_small_t,
    eval_U_taylor,
    eval_V,
    laplace_inverse_U,
)


@pytest.fixture(scope="module")
def ev():
    return default_evaluator()


# ---------------- sample type ----------------


def test_sample_rejects_negative_time():
    with pytest.raises(ValueError):
        SymbolSample(t=-0.1, s=1.0 + 0j, value=0.1 + 0j, err=0.0)


def test_sample_rejects_negative_error():
    with pytest.raises(ValueError):
        SymbolSample(t=0.5, s=1.0 + 0j, value=0.1 + 0j, err=-1e-16)


def test_sample_rejects_s_outside_strip():
    for s in (0.0 + 0j, 2.0 + 0j, -0.5 + 3j, 2.7 + 0j):
        with pytest.raises(ValueError):
            SymbolSample(t=0.5, s=s, value=0.1 + 0j, err=0.0)


def test_sample_pins_initial_value():
    # at t = 0 the only admissible value is the constant 1/sqrt(2 pi)
    ok = SymbolSample(t=0.0, s=1.3 + 2j, value=INV_SQRT_2PI + 0j, err=0.0)
    assert ok.value == INV_SQRT_2PI
    with pytest.raises(ValueError):
        SymbolSample(t=0.0, s=1.3 + 2j, value=0.4 + 0j, err=0.0)


# ---------------- eval_U: contract and limits ----------------


def test_u_regression_anchor(ev):
    # measured once after the dual-representation suite first passed
    u = eval_U(0.2, 1.5, evaluator=ev)
    assert u.value == pytest.approx(0.3746051753556217, rel=1e-11)
    assert abs(u.value.imag) <= 1e-13
    assert u.err <= 1e-9


def test_u_initial_limit(ev):
    # value -> 1/sqrt(2 pi) as t -> 0+ at s = 1, monotonically here
    diffs = [abs(eval_U(t, 1.0, evaluator=ev).value - INV_SQRT_2PI)
             for t in (0.05, 0.02, 0.01)]
    assert diffs[0] > diffs[1] > diffs[2]
    assert diffs[2] <= 1e-6


def test_u_beta_independence_pinned_pair(ev):
    a = eval_U(0.3, 1.2, beta=1.6, evaluator=ev)
    b = eval_U(0.3, 1.2, beta=1.9, evaluator=ev)
    assert abs(a.value - b.value) <= 1e-8


def test_u_beta_independence_random(ev):
    rng = np.random.default_rng(20250814)
    for _ in range(8):
        s = complex(rng.uniform(0.25, 1.75), rng.uniform(-6.0, 6.0))
        t = rng.uniform(0.05, 1.5)
        lo = s.real + 0.05
        b1, b2 = rng.uniform(lo, 1.97, size=2)
        a = eval_U(t, s, beta=b1, evaluator=ev)
        b = eval_U(t, s, beta=b2, evaluator=ev)
        assert abs(a.value - b.value) <= 1e-8


def test_u_rejects_bad_arguments(ev):
    with pytest.raises(ValueError):
        eval_U(-0.1, 1.2, evaluator=ev)
    with pytest.raises(ValueError):
        eval_U(0.5, 2.3, evaluator=ev)
    with pytest.raises(ValueError):
        eval_U(0.5, 2.0 - 1e-9, evaluator=ev)  # no room left for the contour
    with pytest.raises(ValueError):
        eval_U(0.5, 1.2, beta=1.1, evaluator=ev)  # beta must exceed Re s


def test_u_at_t_zero_is_exact(ev):
    u = eval_U(0.0, 0.7 + 3j, evaluator=ev)
    assert u.value == INV_SQRT_2PI
    assert u.err == 0.0


def test_u_conjugate_symmetry(ev):
    a = eval_U(0.4, 1.3 + 5j, evaluator=ev).value
    b = eval_U(0.4, 1.3 - 5j, evaluator=ev).value
    assert abs(np.conj(a) - b) <= 1e-12 * abs(a)


# ---------------- eval_U_small_t ----------------


def test_small_t_exact_at_zero(ev):
    for s in (1.0 + 0j, 0.3 + 0.4j, 1.9 - 2j):
        u = eval_U_small_t(0.0, s, evaluator=ev)
        assert u.value == INV_SQRT_2PI
        assert u.err == 0.0


def test_small_t_matches_right_contour(ev):
    a = eval_U(0.2, 1.5, evaluator=ev)
    b = eval_U_small_t(0.2, 1.5, evaluator=ev)
    assert abs(a.value - b.value) <= 1e-8


def test_small_t_departure_bound(ev):
    # |U(t, 1) - 1/sqrt(2 pi)| <= C sqrt(t) with the frozen calibrated C
    c = constant("u_small_t_C")
    t = 0.01
    u = eval_U_small_t(t, 1.0, beta_prime=0.5, evaluator=ev)
    dep = abs(u.value - INV_SQRT_2PI)
    assert dep <= c * math.sqrt(t)
    # the true departure at s = 1 starts at t^3: the m = 1, 2 residues die
    # against poles of B, leaving B(1)/sqrt(2 pi) (t^3/(3! B(-2)) - ...)
    b1 = ev.eval_B(1.0).real
    pred = b1 * INV_SQRT_2PI * (t ** 3 / (6.0 * ev.eval_B(-2.0).real)
                                - t ** 4 / (24.0 * ev.eval_B(-3.0).real))
    assert dep == pytest.approx(pred, rel=1e-3)


def test_small_t_rejects_bad_arguments(ev):
    with pytest.raises(ValueError):
        eval_U_small_t(1.0, 1.2, evaluator=ev)  # needs t < 1
    with pytest.raises(ValueError):
        eval_U_small_t(0.1, 1.2, beta_prime=1.4, evaluator=ev)
    with pytest.raises(ValueError):
        eval_U_small_t(0.1, 1.2, beta_prime=0.0, evaluator=ev)


def test_representations_agree_random_overlap(ev):
    rng = np.random.default_rng(20250815)
    for _ in range(8):
        s = complex(rng.uniform(0.3, 1.8), rng.uniform(-5.0, 5.0))
        t = rng.uniform(0.02, 0.85)
        a = eval_U(t, s, evaluator=ev)
        b = eval_U_small_t(t, s, evaluator=ev)
        assert abs(a.value - b.value) <= 1e-8


def test_series_oracle_agrees(ev):
    # entire-series evaluation, truncation-limited near 1e-8 at t = 0.2
    a = eval_U(0.2, 1.5, evaluator=ev)
    assert abs(a.value - eval_U_taylor(0.2, 1.5, n_terms=28)) <= 1e-6


# ---------------- decay envelopes (frozen constants) ----------------


def test_u_envelope_at_high_frequency(ev):
    c = constant("u_envelope_C")  # calibrated at |s| = 10, t = 1
    u = eval_U(1.0, 1.0 + 20j, evaluator=ev)
    assert abs(u.value) <= c * envelope(1.0, 1.0 + 20j, 1.0)


def test_u_envelope_grid(ev):
    # 10x10 (t, Im s) grid against the frozen grid constant
    c = constant("u_envelope_C_T")
    for im in np.linspace(5.0, 200.0, 10):
        s = 1.0 + 1j * im
        for t in np.linspace(0.1, 1.0, 10):
            u = eval_U(float(t), s, evaluator=ev)
            assert abs(u.value) <= c * envelope(float(t), s, 1.0)


# ---------------- eval_dU_ds ----------------


def test_du_matches_central_differences(ev):
    s, h = 1.0 + 2j, 1e-5
    d = eval_dU_ds(0.3, s, evaluator=ev)
    fd = (eval_U(0.3, s + h, evaluator=ev).value
          - eval_U(0.3, s - h, evaluator=ev).value) / (2.0 * h)
    assert abs(d - fd) <= 1e-6 * abs(fd)


def test_du_envelope_high_frequency(ev):
    # (1 + |s|) |dU/ds| <= C t e^{-2 t log|bs|} with the frozen C
    c = constant("du_envelope_C")
    t, s = 0.2, 1.0 + 30j
    d = eval_dU_ds(t, s, evaluator=ev)
    assert (1.0 + abs(s)) * abs(d) <= c * t * envelope(t, s, 1.0)


def test_du_vanishes_at_t_zero(ev):
    assert eval_dU_ds(0.0, 1.3 + 4j, evaluator=ev) == 0.0


# ---------------- eval_V ----------------


def test_v_regression_anchor(ev):
    # measured against a direct Laplace-transform quadrature of U
    v = eval_V(1.0, 1.5, evaluator=ev)
    assert v == pytest.approx(0.2806201090019026, rel=1e-11, abs=1e-12)


def test_v_functional_equation_residuals(ev):
    for z, s in ((1.0 + 0j, 1.5), (2.0 + 3.0j, 1.2)):
        lhs = z * eval_V(z, s, evaluator=ev)
        w = complex(eval_W(np.array([s - 1.0]))[0])
        rhs = w * eval_V(z, s - 1.0, evaluator=ev) + INV_SQRT_2PI
        assert abs(lhs - rhs) <= 1e-7


def test_v_branch_guard(ev):
    for z in (-1.0 + 0j, -0.3 + 2j, 0.0 + 1j):
        with pytest.raises(BranchError):
            eval_V(z, 1.5, evaluator=ev)


def test_v_rejects_s_outside_strip(ev):
    with pytest.raises(ValueError):
        eval_V(1.0, 2.4, evaluator=ev)


def test_v_conjugate_symmetry(ev):
    a = eval_V(2.0 + 3j, 1.2 + 0.5j, evaluator=ev)
    b = eval_V(2.0 - 3j, 1.2 - 0.5j, evaluator=ev)
    assert abs(np.conj(a) - b) <= 1e-10 * abs(a)


def test_v_inverts_to_u(ev):
    # Bromwich-line quadrature of V at two abscissae reproduces U(1, s):
    # the transform is abscissa-independent, so no canonical d is assumed
    u = eval_U(1.0, 1.5, evaluator=ev).value
    back = [laplace_inverse_U(1.0, 1.5, d=d, evaluator=ev, rel_tol=1e-6)
            for d in (0.8, 1.4)]
    assert abs(back[0] - u) <= 1e-5
    assert abs(back[1] - u) <= 1e-5
    assert abs(back[0] - back[1]) <= 1e-5


# ---------------- delay ODE in t ----------------


def test_ode_residual_real_point(ev):
    assert check_U_ode(0.5, 1.5, 1e-4, evaluator=ev) <= 1e-6


def test_ode_residual_complex_point(ev):
    assert check_U_ode(2.0, 1.2 + 5j, 1e-4, evaluator=ev) <= 1e-6


def test_ode_residual_shrinks_with_dt(ev):
    res = [check_U_ode(0.5, 1.5, dt, evaluator=ev)
           for dt in (8e-3, 4e-3, 2e-3, 1e-3)]
    assert res[0] > res[1] > res[2] > res[3]


def test_ode_rejects_bad_arguments(ev):
    with pytest.raises(ValueError):
        check_U_ode(0.5, 0.9, 1e-4, evaluator=ev)  # shifted point leaves strip
    with pytest.raises(ValueError):
        check_U_ode(1e-5, 1.5, 1e-4, evaluator=ev)  # needs t > dt


# ---------------- batched line evaluation ----------------


def test_line_matches_scalar(ev):
    svals = 1.2 + 1j * np.linspace(-3.0, 3.0, 9)
    vals, errs = eval_U_line(0.7, svals, evaluator=ev)
    scal = np.array([eval_U(0.7, s, evaluator=ev).value for s in svals])
    assert np.abs(vals - scal).max() <= 1e-10
    assert errs.max() < 1e-9


def test_line_matches_scalar_high_window(ev):
    svals = 1.0 + 1j * np.linspace(40.0, 44.0, 5)
    vals, _ = eval_U_line(0.15, svals, evaluator=ev)
    scal = np.array([eval_U(0.15, s, evaluator=ev).value for s in svals])
    assert np.abs(vals - scal).max() <= 1e-10


def test_line_rejects_mixed_real_parts(ev):
    with pytest.raises(ValueError):
        eval_U_line(0.5, np.array([1.2 + 1j, 1.3 + 2j]), evaluator=ev)
