"""Small rank sweep on the 3x3 problem with group statistics.

The rank of the parameterisation caps how well the data can be fit;
sweeping it and comparing the per-rank loss groups with a one-tailed
Welch test quantifies the separation.  Budgets here are cut far below
the full experiment so the demo finishes in seconds; the ordering of the
means is already visible, the sizes of the gaps are not.
"""

from bmpnet.experiment import (
    SweepConfig,
    adjacent_welch,
    per_rank_stats,
    sweep,
)

cfg = SweepConfig(n=3, ranks=(19, 21, 23), reps=3, epochs=60,
                  batch_size=32, lr=1e-3, train_size=2000, val_size=2000,
                  base_seed=0)
print("sweeping ranks %s, %d repetitions each, %d epochs"
      % (list(cfg.ranks), cfg.reps, cfg.epochs))

records = sweep(cfg, progress=lambda rec: print(
    "  rank %2d rep %d: final val loss %.4f"
    % (rec.extras["rank"], rec.extras["repetition"], rec.final_val_loss)))

print("\nper-rank summaries:")
for rank, st in per_rank_stats(records).items():
    print("  rank %2d: mean %.4f  std %.4f" % (rank, st.mean, st.std))

print("\nadjacent comparisons (is the higher rank's mean loss smaller?):")
for hi, lo, rep in adjacent_welch(records):
    print("  %d vs %d: t=%.3f  df=%.2f  one-tailed p=%.4f"
          % (hi, lo, rep.t, rep.df, rep.p_one_tailed))
