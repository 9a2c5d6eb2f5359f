"""Dev batch A: series vs log-reg, mu bracket, derivative fd, near-one ratio."""
import math
import time

from wavekin.bfunc import default_evaluator
from wavekin.fundsol import (
    LambdaQuery, eval_lambda, eval_lambda_log, eval_lambda_with_error,
    eval_lambda_series, eval_mu, eval_dlambda_dt, eval_dlambda_dx,
    _eval_impl, _series_with_error,
)

ev = default_evaluator()
t0 = time.time()


def stamp(msg):
    print(f"[{time.time() - t0:7.1f}s] {msg}", flush=True)


# --- 1. series vs log_regularized references ---
pts = [(0.25, 2.0), (0.2, 1.6), (0.2, 2.0), (0.2, 3.0), (0.2, 5.0),
       (0.1, 0.5), (0.2, 0.5), (0.2, 0.8), (0.1, 2.0)]
for t, x in pts:
    ref, ref_err, _ = _eval_impl(t, x, "log_regularized", ev)
    try:
        val, err = _series_with_error(t, x, 4, ev)
        rel = abs(val - ref) / abs(ref)
        stamp(f"series t={t} x={x}: ref={ref:.12e} (err {ref_err:.1e}) "
              f"series={val:.12e} (err {err:.1e}) rel={rel:.3e}")
    except Exception as exc:
        stamp(f"series t={t} x={x}: ref={ref:.12e} -> {type(exc).__name__}: {exc}")

# --- 2. mu bracket ---
val, bound = eval_mu(0.1, ev)
import wavekin.fundsol as fs
sc = fs._series_constants(ev)
lead = sc.rho[-6] * 0.1 ** 6
stamp(f"mu(0.1) = {val:.9e} bound={bound:.3e} lead={lead:.9e} "
      f"ratio={val / lead:.4f} bound/lead={bound / abs(lead):.3f}")

# --- 3. dLambda/dt fd at (1.5, 2.0) ---
dt = 1e-4
lp = eval_lambda(LambdaQuery(1.5 + dt, 2.0), ev)
lm = eval_lambda(LambdaQuery(1.5 - dt, 2.0), ev)
fd = (lp - lm) / (2 * dt)
an = eval_dlambda_dt(1.5, 2.0, ev)
stamp(f"dL/dt(1.5,2): fd={fd:.10e} analytic={an:.10e} "
      f"absdiff={abs(fd - an):.3e} rel={abs(fd - an) / abs(fd):.3e}")

# --- 4. dL/dt magnitudes and trend ---
for (t, x) in [(2.0, 0.9), (2.0, 0.5), (2.0, 10.0), (5.0, 2.0), (10.0, 2.0)]:
    v = eval_dlambda_dt(t, x, ev)
    stamp(f"dL/dt({t},{x}) = {v:.6e}  |v|*t^4={abs(v) * t**4:.6f}")

# --- 5. dL/dx: small-x limit and fd ---
v = eval_dlambda_dx(3.0, 0.01, ev)
pred = -12.557412831728742 / 81.0
stamp(f"dL/dx(3,0.01) = {v:.8e} vs c2_lib*3^-4 = {pred:.8e} "
      f"ratio={v / pred:.4f}")
h = 1e-4
lp = eval_lambda(LambdaQuery(2.0, 1.5 + h), ev)
lm = eval_lambda(LambdaQuery(2.0, 1.5 - h), ev)
fd = (lp - lm) / (2 * h)
an = eval_dlambda_dx(2.0, 1.5, ev)
stamp(f"dL/dx(2,1.5): fd={fd:.10e} analytic={an:.10e} "
      f"absdiff={abs(fd - an):.3e} rel={abs(fd - an) / abs(fd):.3e}")

# --- 6. near-one at t=0.05, x = 1 + e^-20 ---
t = 0.05
q = math.log1p(math.exp(-20.0))
u = math.expm1(q)
lr = eval_lambda_log(t, q, "log_regularized", ev)
ratio = lr / (t * abs(q) ** (2 * t - 1.0))
x = 1.0 + math.exp(-20.0)
va, ea = eval_lambda_with_error(LambdaQuery(t, x), ev)
import wavekin.fundsol as fsmod
picked = fsmod._pick_regime_q(t, math.log(x))
stamp(f"near-one t=0.05 q={q:.6e}: logreg={lr:.6e} t*|q|^(2t-1)="
      f"{t * abs(q) ** (2 * t - 1.0):.6e} ratio={ratio:.6f}; auto regime="
      f"{picked} val={va:.6e}")
# also one decade inside the layer and one outside
for scale in (0.25, 4.0):
    qq = scale * math.exp(-20.0)
    lr2 = eval_lambda_log(t, math.log1p(qq), "log_regularized", ev)
    r2 = lr2 / (t * abs(math.log1p(qq)) ** (2 * t - 1.0))
    stamp(f"  q={qq:.3e}: logreg ratio = {r2:.6f}")
# below x=1 too
qq = -math.exp(-20.0)
lr3 = eval_lambda_log(t, qq, "log_regularized", ev)
r3 = lr3 / (t * abs(qq) ** (2 * t - 1.0))
stamp(f"  q={qq:.3e} (x<1): logreg ratio = {r3:.6f}")
stamp("batch A done")
