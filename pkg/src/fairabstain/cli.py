"""Command-line driver: each stage reads upstream artifacts from the output
directory and writes its own versioned JSON/CSV artifacts there.

Exit codes: 0 success, 1 error, 2 infeasible constraint specification.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

import numpy as np

from fairabstain import __version__
from fairabstain.adjust import ABSTAIN_FIRST, PSEUDOCODE_ORDER, prediction_adjustment
from fairabstain.baseline import BaselineModel, MlpConfig, group_error_rates, predicted_labels, score, \
    train_baseline
from fairabstain.cells import DecisionVector, build_cells_for, decisions_from_counts
from fairabstain.data import Dataset, gen_synthetic, group_stats, load_csv, split, write_csv
from fairabstain.errors import FairAbstainError
from fairabstain.exact import as_fraction
from fairabstain.feasibility import FeasibilityInputs, agreement, dp_feasible, formula_verdict
from fairabstain.metrics import compare_to_baseline, evaluate_dataset
from fairabstain.solver import ConstraintSpec, IpSolution, solve
from fairabstain.surrogate import FanModel, fan_predict, train_ab, train_fb

ARTIFACT_VERSION = 1
EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2
OUT_ENV = "FAIRABSTAIN_OUT"


class MissingArtifact(FairAbstainError):
    def __init__(self, name, producer):
        super().__init__(f"missing artifact {name}; run `fairabstain {producer}` first")


class ConfigError(FairAbstainError):
    pass


class Infeasible(FairAbstainError):
    def __init__(self, diagnosis):
        super().__init__("constraint specification is infeasible")
        self.diagnosis = diagnosis


# -- configuration -------------------------------------------------------------------

SYNTH_KEYS = {"source", "seed", "n_groups", "sizes", "tau", "score_noise", "feature_dim", "group_shift"}
CSV_KEYS = {"source", "path", "feature_cols", "group_col", "label_col", "categorical_cols", "minmax"}
MLP_KEYS = set(MlpConfig.__dataclass_fields__)
SPEC_KEYS = set(ConstraintSpec.__dataclass_fields__)
TOP_KEYS = {"data", "split", "baseline", "surrogate", "t0", "constraints", "solver", "adjust",
            "surrogate_options"}


def _strict(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    return d


@dataclass
class RunConfig:
    data: dict = field(default_factory=lambda: {"source": "synthetic", "seed": 0, "n_groups": 2,
                                                "sizes": [1000, 1000], "tau": [0.7, 0.4],
                                                "score_noise": 0.5})
    split: Optional[dict] = None  # {"fractions": [...], "seed": int}; part 0 trains
    baseline: MlpConfig = field(default_factory=MlpConfig)
    surrogate: MlpConfig = field(default_factory=MlpConfig)
    t0: float = 0.5
    constraints: ConstraintSpec = field(default_factory=lambda: ConstraintSpec("EOd", 0.05, 0.2, 0))
    solver: dict = field(default_factory=lambda: {"node_limit": 20000, "fewest_changes": True,
                                                  "abstain_flips": False})
    adjust: dict = field(default_factory=lambda: {"order": "abstain-flip-keep"})
    surrogate_options: dict = field(default_factory=lambda: {"class_weighted": True,
                                                             "include_abstained": False})

    @classmethod
    def from_dict(cls, d) -> "RunConfig":
        _strict(d, TOP_KEYS, "config")
        cfg = cls()
        try:
            if "data" in d:
                src = d["data"].get("source")
                if src == "synthetic":
                    cfg.data = {**cfg.data, **_strict(d["data"], SYNTH_KEYS, "data")}
                elif src == "csv":
                    cfg.data = dict(_strict(d["data"], CSV_KEYS, "data"))
                    for key in ("path", "feature_cols", "group_col", "label_col"):
                        if key not in cfg.data:
                            raise ConfigError(f"data.{key} is required for csv input")
                else:
                    raise ConfigError("data.source must be 'synthetic' or 'csv'")
            if d.get("split") is not None:
                cfg.split = dict(_strict(d["split"], {"fractions", "seed"}, "split"))
            for key in ("baseline", "surrogate"):
                if key in d:
                    setattr(cfg, key, MlpConfig(**_strict(d[key], MLP_KEYS, key)))
            if "t0" in d:
                cfg.t0 = float(d["t0"])
                if not 0 < cfg.t0 < 1:
                    raise ConfigError("t0 must lie in (0, 1)")
            if "constraints" in d:
                cfg.constraints = ConstraintSpec.from_dict(_strict(d["constraints"], SPEC_KEYS, "constraints"))
            if "solver" in d:
                keys = {"node_limit", "fewest_changes", "abstain_flips"}
                cfg.solver = {**cfg.solver, **_strict(d["solver"], keys, "solver")}
            if "adjust" in d:
                cfg.adjust = dict(_strict(d["adjust"], {"order"}, "adjust"))
                if cfg.adjust["order"] not in ORDERS:
                    raise ConfigError(f"adjust.order must be one of {sorted(ORDERS)}")
            if "surrogate_options" in d:
                cfg.surrogate_options = {**cfg.surrogate_options,
                                         **_strict(d["surrogate_options"], {"class_weighted", "include_abstained"},
                                                   "surrogate_options")}
        except (TypeError, ValueError) as exc:
            if isinstance(exc, FairAbstainError):
                raise
            raise ConfigError(f"invalid config: {exc}") from exc
        return cfg

    def to_dict(self):
        return {
            "data": self.data,
            "split": self.split,
            "baseline": self.baseline.to_dict(),
            "surrogate": self.surrogate.to_dict(),
            "t0": self.t0,
            "constraints": self.constraints.to_dict(),
            "solver": self.solver,
            "adjust": self.adjust,
            "surrogate_options": self.surrogate_options,
        }


ORDERS = {"abstain-flip-keep": ABSTAIN_FIRST, "abstain-keep-flip": PSEUDOCODE_ORDER}


def load_config(path) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    return RunConfig.from_dict(raw)


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    changes = {}
    for name in ("fairness", "eps", "delta", "eta"):
        v = getattr(args, name, None)
        if v is not None:
            changes[name] = v
    if getattr(args, "sigma1", None) is not None:
        changes["equal_abstention"] = {1: args.sigma1}
    if changes:
        cfg.constraints = cfg.constraints.with_(**changes)
    if getattr(args, "seed", None) is not None and cfg.data.get("source") == "synthetic":
        cfg.data = {**cfg.data, "seed": args.seed}
    return cfg


# -- artifacts ----------------------------------------------------------------------------


class Workspace:
    def __init__(self, root):
        self.root = Path(root)

    def path(self, name) -> Path:
        return self.root / name

    def write_json(self, name, kind, payload):
        self.root.mkdir(parents=True, exist_ok=True)
        doc = {"artifact": kind, "version": ARTIFACT_VERSION, **payload}
        self.path(name).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        return self.path(name)

    def read_json(self, name, kind, producer):
        p = self.path(name)
        if not p.exists():
            raise MissingArtifact(name, producer)
        doc = json.loads(p.read_text())
        if doc.get("artifact") != kind or doc.get("version") != ARTIFACT_VERSION:
            raise FairAbstainError(f"{name} is not a version-{ARTIFACT_VERSION} {kind} artifact")
        return doc

    def manifest(self, command, cfg: RunConfig):
        self.write_json(f"manifest_{command}.json", "manifest",
                        {"command": command, "package_version": __version__,
                         "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"), "config": cfg.to_dict()})


def _read_dataset(path, producer) -> Dataset:
    if not Path(path).exists():
        raise MissingArtifact(Path(path).name, producer)
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh))
    return load_csv(path, header[:-2], "group", "label")


def datasets(cfg: RunConfig, ws: Workspace):
    """``(train, test_or_None)``. Synthetic data comes from ``gen-synth``
    output; CSV input is read and split on every call (deterministically)."""
    if cfg.data["source"] == "synthetic":
        train = _read_dataset(ws.path("train.csv"), "gen-synth")
        test = _read_dataset(ws.path("test.csv"), "gen-synth") if ws.path("test.csv").exists() else None
        return train, test
    d = cfg.data
    full = load_csv(d["path"], d["feature_cols"], d["group_col"], d["label_col"],
                    d.get("categorical_cols", ()), d.get("minmax", False))
    if not cfg.split:
        return full, None
    parts = split(full, cfg.split["fractions"], cfg.split.get("seed", 0))
    return parts[0], (parts[1] if len(parts) > 1 else None)


def load_baseline(ws) -> BaselineModel:
    doc = ws.read_json("baseline.json", "baseline", "train-baseline")
    return BaselineModel.from_dict(doc["model"])


def stage_one_inputs(model: BaselineModel, train: Dataset):
    s = score(model, train)
    pred = predicted_labels(s, model.t0)
    return s, pred, build_cells_for(train, pred, s), group_stats(train), group_error_rates(train, pred)


def diagnose(spec: ConstraintSpec, stats, errors, solution: Optional[IpSolution]) -> str:
    lines = []
    if spec.fairness == "DP":
        inputs = FeasibilityInputs.from_stats(stats, errors, list(spec.etas(stats.n_groups)),
                                              list(spec.deltas(stats.n_groups)), spec.eps_exact)
        lines.append(dp_feasible(inputs).describe())
    if solution is not None and solution.binding:
        lines.append("constraint families blocking the relaxation: " + ", ".join(solution.binding))
    return "\n".join(lines)


# -- commands -------------------------------------------------------------------------------


def cmd_gen_synth(cfg: RunConfig, ws: Workspace, args):
    d = cfg.data
    if d["source"] != "synthetic":
        raise ConfigError("gen-synth needs data.source = 'synthetic'")
    ds = gen_synthetic(d["seed"], d["n_groups"], d["sizes"], d["tau"], d.get("score_noise", 1.0),
                       d.get("feature_dim", 4), d.get("group_shift", 0.5))
    ws.root.mkdir(parents=True, exist_ok=True)
    if cfg.split:
        parts = split(ds, cfg.split["fractions"], cfg.split.get("seed", 0))
        write_csv(parts[0], ws.path("train.csv"))
        if len(parts) > 1:
            write_csv(parts[1], ws.path("test.csv"))
    else:
        write_csv(ds, ws.path("train.csv"))
        if ws.path("test.csv").exists():
            ws.path("test.csv").unlink()
    ws.manifest("gen-synth", cfg)
    print(f"wrote {ws.path('train.csv')}")
    return EXIT_OK


def cmd_train_baseline(cfg, ws, args):
    train, _ = datasets(cfg, ws)
    model = train_baseline(train, cfg.baseline, cfg.t0)
    ws.write_json("baseline.json", "baseline", {"model": model.to_dict()})
    ws.manifest("train-baseline", cfg)
    print(f"baseline train accuracy {model.train_accuracy:.4f}")
    return EXIT_OK


def cmd_solve(cfg, ws, args):
    train, _ = datasets(cfg, ws)
    model = load_baseline(ws)
    _, _, cells, stats, errors = stage_one_inputs(model, train)
    sol = solve(cells, stats, cfg.constraints, errors, node_limit=cfg.solver["node_limit"],
                fewest_changes=cfg.solver["fewest_changes"],
                abstain_flips=cfg.solver["abstain_flips"])
    ws.write_json("solution.json", "ip_solution",
                  {"spec": cfg.constraints.to_dict(), "baseline_errors": errors.to_dict(), **sol.to_dict()})
    ws.manifest("solve", cfg)
    if not sol.feasible:
        raise Infeasible(diagnose(cfg.constraints, stats, errors, sol))
    print(f"{sol.status}: objective {sol.objective} errors")
    return EXIT_OK


def cmd_adjust(cfg, ws, args):
    train, _ = datasets(cfg, ws)
    model = load_baseline(ws)
    _, _, cells, _, _ = stage_one_inputs(model, train)
    doc = ws.read_json("solution.json", "ip_solution", "solve")
    sol = IpSolution.from_dict(doc)
    if not sol.feasible:
        raise FairAbstainError("solution.json records an infeasible program; nothing to adjust")
    raw = decisions_from_counts(sol.counts, cells)
    canon = prediction_adjustment(raw, cells, ORDERS[cfg.adjust["order"]])
    ws.write_json("decisions.json", "decisions", {"order": cfg.adjust["order"], "decisions": canon.to_dict()})
    ws.manifest("adjust", cfg)
    print(f"abstain {int(np.sum(canon.omega == 0))}, flip {int(np.sum(canon.flip))}")
    return EXIT_OK


def cmd_train_surrogate(cfg, ws, args):
    train, _ = datasets(cfg, ws)
    model = load_baseline(ws)
    dv = DecisionVector.from_dict(ws.read_json("decisions.json", "decisions", "adjust")["decisions"])
    if len(dv) != len(train):
        raise FairAbstainError("decisions.json does not match the training data; rerun `fairabstain adjust`")
    s = score(model, train)
    opts = cfg.surrogate_options
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ab = train_ab(train.X, s, dv.omega, cfg.surrogate, opts["class_weighted"])
        fb = train_fb(train.X, s, dv.flip, dv.omega, cfg.surrogate, opts["class_weighted"],
                      opts["include_abstained"])
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    FanModel(model, ab, fb).save(ws.path("fan"))
    ws.manifest("train-surrogate", cfg)
    print(f"AB train accuracy {ab.train_accuracy:.4f}, FB train accuracy {fb.train_accuracy:.4f}")
    return EXIT_OK


def _eval_split(name, ds: Dataset, fan: FanModel, errors, spec):
    base = predicted_labels(score(fan.baseline, ds), fan.t0)
    eta = list(spec.etas(ds.n_groups))
    fan_report = evaluate_dataset(ds, fan_predict(fan, ds.X), errors, eta)
    base_report = evaluate_dataset(ds, list(base), errors, eta)
    return fan_report, base_report, compare_to_baseline(fan_report, base_report)


def cmd_eval(cfg, ws, args):
    train, test = datasets(cfg, ws)
    fan_dir = ws.path("fan")
    if not (fan_dir / "manifest.json").exists():
        raise MissingArtifact("fan/", "train-surrogate")
    fan = FanModel.load(fan_dir)
    errors = group_error_rates(train, predicted_labels(score(fan.baseline, train), fan.t0))
    payload, rows = {}, []
    for name, ds in (("train", train), ("test", test)):
        if ds is None:
            continue
        fan_r, base_r, cmp = _eval_split(name, ds, fan, errors, cfg.constraints)
        payload[name] = {"fan": fan_r.to_dict(), "baseline": base_r.to_dict(), "comparison": cmp.to_dict()}
        rows.append({"split": name, **fan_r.csv_row(), **cmp.csv_row()})
    ws.write_json("report.json", "eval_report", payload)
    _write_rows(ws.path("report.csv"), rows)
    if args.plot:
        from fairabstain.plots import loss_curves
        loss_curves(ws.path("loss_curves.png"),
                    {"AB": [fan.ab.loss_history], "FB": [fan.fb.loss_history]})
    ws.manifest("eval", cfg)
    for r in rows:
        print(", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in r.items()))
    return EXIT_OK


def cmd_pipeline(cfg, ws, args):
    if cfg.data["source"] == "synthetic":
        cmd_gen_synth(cfg, ws, args)
    for step in (cmd_train_baseline, cmd_solve, cmd_adjust, cmd_train_surrogate, cmd_eval):
        step(cfg, ws, args)
    ws.manifest("pipeline", cfg)
    return EXIT_OK


# -- sweep ----------------------------------------------------------------------------------

SWEEP_METRICS = ("disparity_reduction_DP", "disparity_reduction_TPR", "disparity_reduction_TNR",
                 "disparity_reduction_EOd", "min_accuracy_increase")


def _sweep_point(task):
    cfg, train, model, eps, delta, eta, sigma, full = task
    spec = cfg.constraints.with_(eps=eps, delta=delta, eta=eta,
                                 equal_abstention=None if sigma is None else {1: sigma})
    row = {"eps": _dec(eps), "delta": _dec(delta), "eta": _dec(eta), "sigma": "" if sigma is None else _dec(sigma)}
    try:
        s, pred, cells, stats, errors = stage_one_inputs(model, train)
        inputs = FeasibilityInputs.from_stats(stats, errors, eta, delta, eps,
                                              sigma if spec.fairness == "DP" else None)
        formula = formula_verdict(spec.fairness, inputs)
        sol = solve(cells, stats, spec, errors, node_limit=cfg.solver["node_limit"],
                    fewest_changes=cfg.solver["fewest_changes"],
                    abstain_flips=cfg.solver["abstain_flips"])
        row.update({"formula_feasible": "" if formula is None else str(formula).lower(),
                    "solver_status": sol.status, "objective": "" if sol.objective is None else sol.objective,
                    "agreement": agreement(spec.fairness, inputs, formula, sol.feasible, stats)})
        if sol.feasible:
            dv = prediction_adjustment(decisions_from_counts(sol.counts, cells), cells,
                                       ORDERS[cfg.adjust["order"]])
            outputs = dv
            if full:
                opts = cfg.surrogate_options
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    ab = train_ab(train.X, s, dv.omega, cfg.surrogate, opts["class_weighted"])
                    fb = train_fb(train.X, s, dv.flip, dv.omega, cfg.surrogate, opts["class_weighted"],
                                  opts["include_abstained"])
                outputs = fan_predict(FanModel(model, ab, fb), train.X)
            etas = list(spec.etas(train.n_groups))
            rep = evaluate_dataset(train, outputs, errors, etas)
            cmp = compare_to_baseline(rep, evaluate_dataset(train, list(pred), errors, etas))
            row.update({k: v for k, v in cmp.csv_row().items()})
        row["error"] = ""
    except Exception as exc:  # one bad grid point must not stop the sweep
        row.setdefault("solver_status", "Error")
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _dec(x) -> str:
    return repr(float(x))


def _write_rows(path, rows, columns=None):
    cols = list(columns or [])
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, restval="", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def _grid(text) -> List[Fraction]:
    if text is None or text.strip() == "":
        return []
    return [as_fraction(v.strip()) for v in text.split(",") if v.strip()]


def cmd_sweep(cfg, ws, args):
    train, _ = datasets(cfg, ws)
    model = load_baseline(ws)
    eps = _grid(args.eps_grid)
    delta = _grid(args.delta_grid)
    eta = _grid(args.eta_grid) or [as_fraction(0)]
    sigma = _grid(args.sigma_grid) or [None]
    full = args.stage == "full"
    tasks = [(cfg, train, model, e, d, h, s, full) for e in eps for d in delta for h in eta for s in sigma]
    if args.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    columns = ["eps", "delta", "eta", "sigma", "formula_feasible", "solver_status", "objective", "agreement",
               *SWEEP_METRICS, "error"]
    ws.root.mkdir(parents=True, exist_ok=True)
    out = ws.path(args.output)
    _write_rows(out, rows, columns)
    if args.plot and rows:
        from fairabstain.plots import heatmap
        for metric in ("disparity_reduction_" + ("EOd" if cfg.constraints.fairness == "EOd" else
                                                 {"DP": "DP", "EOp": "TPR"}[cfg.constraints.fairness]),
                       "min_accuracy_increase"):
            heatmap(out.with_name(f"{out.stem}_{metric}.png"), rows, "delta", "eps", metric)
    ws.manifest("sweep", cfg)
    bad = sum(1 for r in rows if r.get("solver_status") == "Infeasible")
    print(f"wrote {out}: {len(rows)} rows, {bad} infeasible")
    return EXIT_OK


# -- entry point -------------------------------------------------------------------------------

COMMANDS = {
    "gen-synth": cmd_gen_synth,
    "train-baseline": cmd_train_baseline,
    "solve": cmd_solve,
    "adjust": cmd_adjust,
    "train-surrogate": cmd_train_surrogate,
    "eval": cmd_eval,
    "pipeline": cmd_pipeline,
    "sweep": cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="fairabstain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (unknown keys are rejected)")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./fairabstain_out)")
    spec_flags = argparse.ArgumentParser(add_help=False)
    spec_flags.add_argument("--fairness", choices=("DP", "EOp", "EOd"))
    spec_flags.add_argument("--eps", type=as_fraction)
    spec_flags.add_argument("--delta", type=as_fraction)
    spec_flags.add_argument("--eta", type=as_fraction)
    spec_flags.add_argument("--sigma1", type=as_fraction, help="bound on positive-label abstention gaps")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen-synth", parents=[common], help="write synthetic train/test CSV").add_argument(
        "--seed", type=int)
    sub.add_parser("train-baseline", parents=[common], help="fit the baseline scorer")
    sub.add_parser("solve", parents=[common, spec_flags], help="solve the Stage I program")
    sub.add_parser("adjust", parents=[common], help="canonicalise decisions by confidence")
    sub.add_parser("train-surrogate", parents=[common], help="fit abstention and flip blocks")
    sub.add_parser("eval", parents=[common, spec_flags], help="evaluate FAN against the baseline").add_argument(
        "--plot", action="store_true", help="also write loss_curves.png")
    p = sub.add_parser("pipeline", parents=[common, spec_flags], help="run every stage in order")
    p.add_argument("--seed", type=int)
    p.add_argument("--plot", action="store_true")
    p = sub.add_parser("sweep", parents=[common, spec_flags], help="grid over eps/delta (and eta, sigma)")
    p.add_argument("--eps-grid", required=True, help="comma-separated values")
    p.add_argument("--delta-grid", required=True, help="comma-separated values")
    p.add_argument("--eta-grid")
    p.add_argument("--sigma-grid")
    p.add_argument("--stage", choices=("1", "full"), default="1")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", default="sweep.csv")
    p.add_argument("--plot", action="store_true", help="also write heatmaps next to the CSV")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out or os.environ.get(OUT_ENV) or "fairabstain_out"
    ws = Workspace(out)
    try:
        cfg = apply_overrides(load_config(args.config), args)
        return COMMANDS[args.command](cfg, ws, args)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        if exc.diagnosis:
            print(exc.diagnosis, file=sys.stderr)
        return EXIT_INFEASIBLE
    except (FairAbstainError, OSError) as exc:
        print(f"error ({args.command}): {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:
        print(f"error ({args.command}): {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
