"""Command line front end.

Subcommands: demo, train, sweep, verify, welch, train-eps.  Options may
come from flags or from a JSON config file (--config); flags win, and
unknown config keys are rejected.  Exit codes: 0 on success, 1 when a
requested check fails, 2 for usage or config errors.  Commands that
write files place everything under --out next to a manifest.json listing
the resolved options and the produced files.
"""

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from .border import EpsSchedule, train_eps
from .experiment import SweepConfig, adjacent_welch, export, per_rank_stats, sweep
from .network import strassen_stages, total_bmp, total_direct, \
    build_matmul_chain, marginalize
from .scheme import scheme_from_json, scheme_to_json
from .stats import SampleStats, welch_one_tailed
from .tensor import exact_array
from .training import TrainConfig, train
from .verify import known_strassen, exponent, normalize_slots, \
    round_scheme, verify_scheme


def _err(msg):
    print("error: %s" % msg, file=sys.stderr)


TRAIN_KEYS = {
    "n": 2, "r": 7, "epochs": 60, "batch_size": 32, "lr": 1e-3,
    "clip": 10.0, "train_size": 10000, "val_size": 10000, "alpha": 1.0,
    "seed": 0, "low": -1.0, "high": 1.0, "resample": False, "out": None,
    "verbose": False,
}

SWEEP_KEYS = {
    "n": 3, "ranks": "19,20,21,22,23", "reps": 7, "epochs": 60,
    "batch_size": 32, "lr": 1e-3, "clip": 10.0, "train_size": 10000,
    "val_size": 10000, "alpha": 1.0, "seed": 0, "low": -1.0, "high": 1.0,
    "resample": False, "out": None, "threads": 1, "top_vs_rest": False,
    "verbose": False,
}

VERIFY_KEYS = {
    "scheme": None, "exact": False, "round": False, "tol": 1e-8,
    "grid": None, "out": None,
}

WELCH_KEYS = {"g1": None, "g2": None, "out": None}

TRAIN_EPS_KEYS = dict(TRAIN_KEYS, eps0=0.02, decay=0.95, floor=1e-8,
                      dmax=2, fmin=-2, probe_eps=1e-3)

DEMO_KEYS = {"which": None}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bmpnet",
        description="tensor-network calculus, scheme training and "
                    "verification for fast matrix multiplication")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, keys, **kwargs):
        sp = sub.add_parser(name, argument_default=argparse.SUPPRESS,
                            **kwargs)
        sp.add_argument("--config", help="JSON file with option defaults")
        return sp

    sp = add("demo", DEMO_KEYS, help="narrated walkthroughs")
    sp.add_argument("which", choices=("classical2x2", "strassen2x2"),
                    help="which walkthrough to run")

    sp = add("train", TRAIN_KEYS, help="train one scheme")
    _add_train_flags(sp)

    sp = add("sweep", SWEEP_KEYS, help="rank sweep with statistics")
    sp.add_argument("--n", type=int)
    sp.add_argument("--ranks", help="comma separated rank list")
    sp.add_argument("--reps", type=int)
    sp.add_argument("--threads", type=int)
    _add_common_train_flags(sp)
    sp.add_argument("--top-vs-rest", dest="top_vs_rest",
                    action="store_true",
                    help="also compare the top rank against every other")
    sp.add_argument("--out")
    sp.add_argument("--verbose", action="store_true")

    sp = add("verify", VERIFY_KEYS, help="check a scheme file")
    sp.add_argument("--scheme", help="path to a scheme JSON file, or "
                                     "'strassen' for the built-in one")
    sp.add_argument("--exact", action="store_true",
                    help="read entries as exact rationals")
    sp.add_argument("--round", action="store_true",
                    help="gauge-normalise and snap to the grid first")
    sp.add_argument("--tol", type=float,
                    help="float-mode residual tolerance")
    sp.add_argument("--grid", help="comma separated rational grid values")
    sp.add_argument("--out")

    sp = add("welch", WELCH_KEYS, help="compare two loss groups")
    sp.add_argument("--g1", help="mean,std,count of group 1")
    sp.add_argument("--g2", help="mean,std,count of group 2")
    sp.add_argument("--out")

    sp = add("train-eps", TRAIN_EPS_KEYS,
             help="train the vanishing-parameter extension")
    _add_train_flags(sp)
    sp.add_argument("--eps0", type=float)
    sp.add_argument("--decay", type=float)
    sp.add_argument("--floor", type=float)
    sp.add_argument("--dmax", type=int)
    sp.add_argument("--fmin", type=int)
    sp.add_argument("--probe-eps", dest="probe_eps", type=float)

    return parser


def _add_common_train_flags(sp):
    sp.add_argument("--epochs", type=int)
    sp.add_argument("--batch-size", dest="batch_size", type=int)
    sp.add_argument("--lr", type=float)
    sp.add_argument("--clip", type=float)
    sp.add_argument("--train-size", dest="train_size", type=int)
    sp.add_argument("--val-size", dest="val_size", type=int)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--low", type=float)
    sp.add_argument("--high", type=float)
    sp.add_argument("--resample", action="store_true",
                    help="draw a fresh training set each epoch")


def _add_train_flags(sp):
    sp.add_argument("--n", type=int)
    sp.add_argument("--r", type=int)
    _add_common_train_flags(sp)
    sp.add_argument("--out")
    sp.add_argument("--verbose", action="store_true")


class UsageError(Exception):
    pass


def _resolve(args, defaults):
    """Merge defaults, config file and flags (ascending precedence)."""
    given = {k: v for k, v in vars(args).items()
             if k not in ("command", "config")}
    merged = dict(defaults)
    config_path = getattr(args, "config", None)
    if config_path is not None:
        try:
            with open(config_path) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError("cannot read config %s: %s"
                             % (config_path, exc))
        if not isinstance(loaded, dict):
            raise UsageError("config must be a JSON object")
        unknown = sorted(set(loaded) - set(defaults))
        if unknown:
            raise UsageError("unknown config keys: %s"
                             % ", ".join(unknown))
        merged.update(loaded)
    merged.update(given)
    return merged


def _parse_ranks(value):
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value)
    return tuple(int(part) for part in str(value).split(",") if part != "")


def _parse_group(value, name):
    if isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        parts = str(value).split(",")
    if len(parts) != 3:
        raise UsageError("%s must be mean,std,count" % name)
    try:
        return SampleStats(mean=float(parts[0]), std=float(parts[1]),
                           count=int(parts[2]))
    except ValueError as exc:
        raise UsageError("bad %s: %s" % (name, exc))


def _write_json(outdir, name, payload):
    path = os.path.join(outdir, name)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(outdir, command, options, files):
    manifest = {
        "command": command,
        "options": {k: (list(v) if isinstance(v, tuple) else v)
                    for k, v in options.items()},
        "files": sorted(files),
    }
    _write_json(outdir, "manifest.json", manifest)


def _train_config(opts, n, r, seed):
    return TrainConfig(
        n=n, r=r, epochs=int(opts["epochs"]),
        batch_size=int(opts["batch_size"]), lr=float(opts["lr"]),
        clip_threshold=float(opts["clip"]),
        train_size=int(opts["train_size"]),
        val_size=int(opts["val_size"]), alpha=float(opts["alpha"]),
        seed=seed, low=float(opts["low"]), high=float(opts["high"]),
        resample=bool(opts["resample"]))


def _cmd_demo(opts):
    if opts["which"] == "classical2x2":
        return _demo_classical()
    return _demo_strassen()


def _demo_classical():
    a = exact_array([[1, 2], [3, 4]])
    b = exact_array([[5, 6], [7, 8]])
    net = build_matmul_chain(a, b)
    direct = total_direct(net)
    product = total_bmp(net)
    print("chain network: rows -> mid -> cols, activations 1, A, B")
    print("total tensor via direct evaluation, shape %s"
          % (direct.shape,))
    print("total tensor via lift + product, shape %s" % (product.shape,))
    agree = bool(np.all(direct == product))
    print("routes agree entrywise: %s" % agree)
    out = marginalize(product, {1})
    print("after summing out the middle slot:")
    print(np.array2string(out.astype(object)))
    expected = a.dot(b)
    ok = agree and bool(np.all(out == expected))
    print("equals A @ B: %s" % bool(np.all(out == expected)))
    return 0 if ok else 1


def _demo_strassen():
    s = known_strassen()
    report = verify_scheme(s)
    print("built-in 2x2 scheme: r=%d, exact residual zero: %s"
          % (s.r, report.exact_zero))
    a = exact_array([[1, 2], [3, 4]])
    b = exact_array([[5, 6], [7, 8]])
    stages = strassen_stages(a, b, s)
    print("the %d scalar multiplications:" % s.r)
    print(np.array2string(stages["products"].astype(object)))
    print("pipeline output (flattened product, zero-padded to r):")
    print(np.array2string(stages["output"].astype(object)))
    expected = a.dot(b).reshape(4)
    head = stages["output"][:4]
    tail = stages["output"][4:]
    match = bool(np.all(head == expected)) and bool(np.all(tail == 0))
    ok = bool(report.exact_zero) and match
    print("equals vec(A @ B) plus zero padding: %s" % match)
    print("implied exponent log_2(7) = %.6f" % exponent(2, s.r))
    return 0 if ok else 1


def _cmd_train(opts):
    cfg = _train_config(opts, int(opts["n"]), int(opts["r"]),
                        int(opts["seed"]))
    progress = None
    if opts["verbose"]:
        def progress(epoch, tr, va):
            print("epoch %3d  train %.6e  val %.6e" % (epoch, tr, va))
    record = train(cfg, progress=progress)
    print("final train loss %.6e  final val loss %.6e  (%.2f s)"
          % (record.train_losses[-1], record.final_val_loss,
             record.wall_seconds))
    if opts["out"]:
        outdir = opts["out"]
        _write_json(outdir, "run.json", record.to_json())
        _write_manifest(outdir, "train", opts, ["run.json"])
        print("wrote %s" % os.path.join(outdir, "run.json"))
    return 0


def _cmd_sweep(opts):
    ranks = _parse_ranks(opts["ranks"])
    cfg = SweepConfig(
        n=int(opts["n"]), ranks=ranks, reps=int(opts["reps"]),
        epochs=int(opts["epochs"]), batch_size=int(opts["batch_size"]),
        lr=float(opts["lr"]), clip_threshold=float(opts["clip"]),
        train_size=int(opts["train_size"]),
        val_size=int(opts["val_size"]), alpha=float(opts["alpha"]),
        base_seed=int(opts["seed"]), low=float(opts["low"]),
        high=float(opts["high"]), resample=bool(opts["resample"]))

    def progress(rec):
        print("rank %2d rep %d: final val loss %.6e"
              % (rec.extras["rank"], rec.extras["repetition"],
                 rec.final_val_loss))

    records = sweep(cfg, threads=int(opts["threads"]), progress=progress)
    for rank, st in per_rank_stats(records).items():
        print("rank %2d: mean %.6e  std %.6e  (n=%d)"
              % (rank, st.mean, st.std, st.count))
    for hi, lo, report in adjacent_welch(records):
        print("rank %d vs %d: t=%.3f df=%.1f p=%.4g"
              % (hi, lo, report.t, report.df, report.p_one_tailed))
    if opts["out"]:
        outdir = opts["out"]
        files = []
        for rec in records:
            name = os.path.join(
                "runs", "rank%02d_rep%d.json"
                % (rec.extras["rank"], rec.extras["repetition"]))
            _write_json(outdir, name, rec.to_json())
            files.append(name)
        files += export(records, outdir,
                        top_vs_rest=bool(opts["top_vs_rest"]))
        opts_out = dict(opts)
        opts_out["ranks"] = list(ranks)
        _write_manifest(outdir, "sweep", opts_out, files)
        print("wrote %d files under %s" % (len(files) + 1, outdir))
    return 0


def _load_scheme(opts):
    source = opts["scheme"]
    if source is None:
        raise UsageError("verify needs --scheme")
    if source == "strassen":
        return known_strassen()
    try:
        with open(source) as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError("cannot read scheme %s: %s" % (source, exc))
    return scheme_from_json(payload, exact=bool(opts["exact"]))


def _cmd_verify(opts):
    loaded = _load_scheme(opts)
    if opts["round"]:
        normalized = normalize_slots(loaded)
        if opts["grid"] is not None:
            parts = (opts["grid"].split(",")
                     if isinstance(opts["grid"], str) else opts["grid"])
            loaded = round_scheme(
                normalized, grid=tuple(Fraction(str(p)) for p in parts))
        else:
            loaded = round_scheme(normalized)
    report = verify_scheme(loaded)
    payload = report.to_json()
    print(json.dumps(payload, indent=2, sort_keys=True))
    if opts["out"]:
        files = ["report.json"]
        _write_json(opts["out"], "report.json", payload)
        if opts["round"]:
            _write_json(opts["out"], "rounded_scheme.json",
                        scheme_to_json(loaded))
            files.append("rounded_scheme.json")
        _write_manifest(opts["out"], "verify", opts, files)
    if report.exact_zero is not None:
        return 0 if report.exact_zero else 1
    return 0 if report.residual <= float(opts["tol"]) else 1


def _cmd_welch(opts):
    if opts["g1"] is None or opts["g2"] is None:
        raise UsageError("welch needs --g1 and --g2")
    g1 = _parse_group(opts["g1"], "--g1")
    g2 = _parse_group(opts["g2"], "--g2")
    report = welch_one_tailed(g1, g2)
    payload = report.to_json()
    print(json.dumps(payload, indent=2, sort_keys=True))
    if opts["out"]:
        _write_json(opts["out"], "welch.json", payload)
        _write_manifest(opts["out"], "welch", opts, ["welch.json"])
    return 0


def _cmd_train_eps(opts):
    cfg = _train_config(opts, int(opts["n"]), int(opts["r"]),
                        int(opts["seed"]))
    schedule = EpsSchedule(eps0=float(opts["eps0"]),
                           decay=float(opts["decay"]),
                           floor=float(opts["floor"]))
    progress = None
    if opts["verbose"]:
        def progress(epoch, tr, va, probe, eps):
            print("epoch %3d  train %.6e  val %.6e  probe %.6e  eps %.4e"
                  % (epoch, tr, va, probe, eps))
    record = train_eps(cfg, schedule, d_max=int(opts["dmax"]),
                       f_min=int(opts["fmin"]),
                       probe_eps=float(opts["probe_eps"]),
                       progress=progress)
    print("final val loss %.6e  probe loss %.6e  eps %.4e  (%.2f s)"
          % (record.final_val_loss, record.probe_losses[-1],
             record.epsilon_trajectory[-1], record.wall_seconds))
    if opts["out"]:
        _write_json(opts["out"], "run_eps.json", record.to_json())
        _write_manifest(opts["out"], "train-eps", opts, ["run_eps.json"])
        print("wrote %s" % os.path.join(opts["out"], "run_eps.json"))
    return 0


_HANDLERS = {
    "demo": (_cmd_demo, DEMO_KEYS),
    "train": (_cmd_train, TRAIN_KEYS),
    "sweep": (_cmd_sweep, SWEEP_KEYS),
    "verify": (_cmd_verify, VERIFY_KEYS),
    "welch": (_cmd_welch, WELCH_KEYS),
    "train-eps": (_cmd_train_eps, TRAIN_EPS_KEYS),
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handler, defaults = _HANDLERS[args.command]
    try:
        opts = _resolve(args, defaults)
        return handler(opts)
    except UsageError as exc:
        _err(str(exc))
        return 2
    except ValueError as exc:
        _err(str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
