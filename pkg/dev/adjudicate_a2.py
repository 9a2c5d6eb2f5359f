"""Dev batch A2: localize the short-time-series remainder (x-slope, t-dep)."""
import math
import time

import numpy as np

from wavekin.bfunc import default_evaluator
from wavekin.fundsol import _eval_impl, _series_with_error

ev = default_evaluator()
t0 = time.time()


def stamp(msg):
    print(f"[{time.time() - t0:7.1f}s] {msg}", flush=True)


# x-slope at t = 0.52 where direct & log_reg cross-validate to 1e-9
xs = [1.5, 1.8, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0]
defs = []
for x in xs:
    ref, _, _ = _eval_impl(0.52, x, "direct", ev)
    val, err = _series_with_error(0.52, x, 4, ev)
    d = ref - val
    defs.append(d)
    stamp(f"t=0.52 x={x}: ref={ref:.10e} series={val:.10e} "
          f"deficit={d:+.3e} est={err:.1e}")
lx = np.log(np.array(xs))
ld = np.log(np.abs(np.array(defs)))
slope = np.polyfit(lx, ld, 1)[0]
stamp(f"x-slope of |deficit| at t=0.52: {slope:.3f}")

# t-dependence at x = 2 and x = 3
for x in (2.0, 3.0):
    rows = []
    for t in (0.15, 0.25, 0.35, 0.45, 0.52):
        regime = "direct" if t > 0.5 else "log_regularized"
        ref, _, _ = _eval_impl(t, x, regime, ev)
        val, err = _series_with_error(t, x, 4, ev)
        d = ref - val
        rows.append((t, d))
        stamp(f"x={x} t={t}: deficit={d:+.4e} (ref={ref:.6e}, est={err:.1e})")
    tt = np.log([r[0] for r in rows])
    dd = np.log([abs(r[1]) for r in rows])
    stamp(f"  t-slope of |deficit| at x={x}: {np.polyfit(tt, dd, 1)[0]:.3f}")
stamp("batch A2 done")
