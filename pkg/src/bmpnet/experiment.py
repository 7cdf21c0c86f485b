"""Rank sweeps: train the same problem at several ranks with repeated
seeds, then compare adjacent ranks with Welch's test and export flat
files for plotting.

Run seeds derive from (base seed, rank, repetition) only, so any single
run can be reproduced without executing the rest of the sweep, and the
output files contain nothing time- or host-dependent.
"""

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

from .stats import summarize, welch_one_tailed
from .tensor import ShapeMismatch
from .training import TrainConfig, mix64, train


@dataclass
class SweepConfig:
    """A rank sweep: shared training hyperparameters, the rank list, and
    how many repetitions to run per rank."""

    n: int = 3
    ranks: tuple = (19, 20, 21, 22, 23)
    reps: int = 7
    epochs: int = 60
    batch_size: int = 32
    lr: float = 1e-3
    clip_threshold: float = 10.0
    train_size: int = 10000
    val_size: int = 10000
    alpha: float = 1.0
    base_seed: int = 0
    low: float = -1.0
    high: float = 1.0
    resample: bool = False

    def __post_init__(self):
        self.ranks = tuple(int(r) for r in self.ranks)
        if len(self.ranks) < 1:
            raise ShapeMismatch("need at least one rank")
        if len(set(self.ranks)) != len(self.ranks):
            raise ShapeMismatch("ranks must be distinct")
        if self.reps < 2:
            raise ShapeMismatch("need at least 2 repetitions per rank")

    def to_json(self):
        out = asdict(self)
        out["ranks"] = list(self.ranks)
        return out


def sweep_config_from_json(obj):
    return SweepConfig(**obj)


def run_seed(base_seed, rank, rep):
    """Seed of one run, independent of every other run in the sweep."""
    return mix64(base_seed, rank, rep)


def make_train_config(cfg, rank, rep):
    return TrainConfig(
        n=cfg.n,
        r=rank,
        epochs=cfg.epochs,
        batch_size=cfg.batch_size,
        lr=cfg.lr,
        clip_threshold=cfg.clip_threshold,
        train_size=cfg.train_size,
        val_size=cfg.val_size,
        alpha=cfg.alpha,
        seed=run_seed(cfg.base_seed, rank, rep),
        low=cfg.low,
        high=cfg.high,
        resample=cfg.resample,
    )


def _run_one(job):
    rank, rep, tc = job
    record = train(tc)
    record.extras["rank"] = rank
    record.extras["repetition"] = rep
    return record


def sweep(cfg, threads=1, progress=None):
    """Train every (rank, repetition) pair; returns records sorted by
    (rank, repetition).  ``threads`` > 1 distributes runs over worker
    processes; results do not depend on the schedule."""
    jobs = [(rank, rep, make_train_config(cfg, rank, rep))
            for rank in sorted(cfg.ranks) for rep in range(cfg.reps)]
    if threads <= 1:
        records = []
        for job in jobs:
            rec = _run_one(job)
            if progress is not None:
                progress(rec)
            records.append(rec)
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = []
            for rec in pool.map(_run_one, jobs):
                if progress is not None:
                    progress(rec)
                records.append(rec)
    records.sort(key=lambda rec: (rec.extras["rank"],
                                  rec.extras["repetition"]))
    return records


def rank_groups(records):
    """Records bucketed by rank, each bucket sorted by repetition."""
    groups = {}
    for rec in records:
        groups.setdefault(rec.extras["rank"], []).append(rec)
    for rank in groups:
        groups[rank].sort(key=lambda rec: rec.extras["repetition"])
    return dict(sorted(groups.items()))


def per_rank_stats(records):
    """Final validation loss summarised per rank."""
    return {rank: summarize([rec.final_val_loss for rec in bucket])
            for rank, bucket in rank_groups(records).items()}


def adjacent_welch(records):
    """One-tailed Welch comparisons of neighbouring ranks, higher rank
    as group 1 (tested for having the smaller mean loss).  Pairs run
    from the largest rank down."""
    stats = per_rank_stats(records)
    ranks = sorted(stats, reverse=True)
    out = []
    for hi, lo in zip(ranks, ranks[1:]):
        out.append((hi, lo, welch_one_tailed(stats[hi], stats[lo])))
    return out


def top_vs_rest_welch(records):
    """Non-default variant: the largest rank against every other rank."""
    stats = per_rank_stats(records)
    ranks = sorted(stats, reverse=True)
    top = ranks[0]
    return [(top, lo, welch_one_tailed(stats[top], stats[lo]))
            for lo in ranks[1:]]


def _mean_std(values):
    count = len(values)
    mean = sum(values) / count
    if count < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (count - 1)
    return mean, var ** 0.5


def export(records, outdir, top_vs_rest=False):
    """Write curves.csv, hist.csv and welch.json; returns the file names.

    curves.csv has per-epoch mean and std of each split across the
    repetitions of a rank, hist.csv the per-run final validation losses,
    welch.json the adjacent-rank comparisons plus per-rank summaries
    (and, when requested, the top rank against every other).
    """
    os.makedirs(outdir, exist_ok=True)
    groups = rank_groups(records)

    curves_path = os.path.join(outdir, "curves.csv")
    with open(curves_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "rank", "split", "mean", "std"])
        for rank, bucket in groups.items():
            epochs = len(bucket[0].val_losses)
            for epoch in range(epochs):
                for split, attr in (("train", "train_losses"),
                                    ("val", "val_losses")):
                    vals = [getattr(rec, attr)[epoch] for rec in bucket]
                    mean, std = _mean_std(vals)
                    writer.writerow([epoch, rank, split,
                                     repr(mean), repr(std)])

    hist_path = os.path.join(outdir, "hist.csv")
    with open(hist_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "repetition", "final_val_loss"])
        for rank, bucket in groups.items():
            for rec in bucket:
                writer.writerow([rank, rec.extras["repetition"],
                                 repr(rec.final_val_loss)])

    welch_path = os.path.join(outdir, "welch.json")
    payload = {
        "per_rank": {str(rank): stats.to_json()
                     for rank, stats in per_rank_stats(records).items()},
        "pairs": [
            {"rank1": hi, "rank2": lo, **report.to_json()}
            for hi, lo, report in adjacent_welch(records)
        ],
    }
    if top_vs_rest:
        payload["top_pairs"] = [
            {"rank1": hi, "rank2": lo, **report.to_json()}
            for hi, lo, report in top_vs_rest_welch(records)
        ]
    with open(welch_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return ["curves.csv", "hist.csv", "welch.json"]
