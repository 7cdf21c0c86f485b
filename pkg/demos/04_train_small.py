"""Train a rank-7 parameterisation of the 2x2 product from data.

A short budget is enough to watch the loss fall by orders of magnitude;
reaching a numerically exact decomposition (validation loss near
machine precision) wants the full 10000-sample, 60-epoch budget and a
patient seed.
"""

from bmpnet.training import TrainConfig, train
from bmpnet.verify import normalize_slots, round_scheme, verify_scheme

cfg = TrainConfig(n=2, r=7, epochs=20, batch_size=32, lr=1e-3,
                  train_size=2000, val_size=2000, seed=4)
print("training n=%d, r=%d for %d epochs on %d samples (seed %d)"
      % (cfg.n, cfg.r, cfg.epochs, cfg.train_size, cfg.seed))

record = train(cfg, progress=lambda e, tr, va:
               e % 5 == 0 and print("  epoch %2d  train %.4e  val %.4e"
                                    % (e, tr, va)))
print("final val loss %.4e after %.1f s"
      % (record.final_val_loss, record.wall_seconds))

report = verify_scheme(record.scheme)
print("float residual of the trained scheme: %.4e" % report.residual)

snapped = round_scheme(normalize_slots(record.scheme))
print("after gauge fixing and snapping to the discrete grid, exact "
      "residual zero:", verify_scheme(snapped).exact_zero)
print("(at the full budget, train_size=10000 and epochs=60, the loss "
      "reaches ~1e-9 and the scheme is a numerically exact rank-7 "
      "decomposition; snapping to the grid additionally needs the run "
      "to land in an axis-aligned gauge, which per-slot rescaling "
      "cannot force)")
