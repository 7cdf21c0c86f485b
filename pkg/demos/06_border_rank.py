"""Border rank: approximate a rank-3 tensor with a rank-2 curve.

The three-party tensor a.a.b + a.b.a + b.a.a has rank 3, yet the rank-2
family ((a + eps b)^3 - a^3) / eps converges to it as eps -> 0.  The
output factor carries a 1/eps coefficient, so the approximation exists
only as a limit: that is the border-rank phenomenon.  The annealed
trainer searches for such curves by shrinking eps on a schedule while
training polynomial coefficient stacks.
"""

import numpy as np

from bmpnet.border import (
    EpsSchedule,
    evaluate,
    train_eps,
    wstate_embedded,
    wstate_eps_scheme,
)
from bmpnet.training import TrainConfig

w = wstate_embedded()
print("target tensor: order 3, %d nonzero entries, rank 3"
      % int((w != 0).sum()))

print("\ndistance of the rank-2 curve to the target as eps shrinks:")
errs = []
eps_values = (1e-1, 1e-2, 1e-3)
for eps in eps_values:
    s = evaluate(wstate_eps_scheme(eps))
    tensor = np.einsum("is,js,sk->ijk", np.asarray(s.H, float),
                       np.asarray(s.K, float), np.asarray(s.F, float))
    err = np.linalg.norm(tensor - w)
    errs.append(err)
    print("  eps = %7.0e   error = %.6e" % (eps, err))
slope = np.polyfit(np.log10(eps_values), np.log10(errs), 1)[0]
print("log-log slope %.4f: the error vanishes linearly in eps" % slope)

print("\nannealed training on the 2x2 product (eps decays each epoch):")
cfg = TrainConfig(n=2, r=7, epochs=12, batch_size=32, lr=1e-2,
                  train_size=1000, val_size=500, seed=0)
record = train_eps(cfg, schedule=EpsSchedule(eps0=1.0, decay=0.8),
                   d_max=1, f_min=-1,
                   progress=lambda e, tr, va, probe, eps:
                   e % 3 == 0 and print(
                       "  epoch %2d  val %.4e  probe@1e-3 %.4e  eps %.3f"
                       % (e, va, probe, eps)))
print("probe loss tracks the value of the limit object, not the "
      "current eps")
