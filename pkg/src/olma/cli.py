"""Command-line entry point: ``olma <command> [flags]``.

Every command writes JSON (and CSV for ``bands``) into ``--out`` and embeds the
resolved configuration. Failures exit with status 1, name the failing stage,
and remove any files the command had already written.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from pathlib import Path

import numpy as np

from . import config as config_mod
from .analysis import band_errors, causal_matrix
from .data import TimeSeriesFrame, load_csv, split_windows
from .entropy import segment_entropy_scan
from .forecaster import (TrainConfig, evaluate, forward, init_model, load_checkpoint, save_checkpoint,
                         train)
from .loss import LossSpec
from .synthetic import sub_seed, synthetic_frame
from .theorem import theorem_ensemble


class StageError(RuntimeError):
    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"stage '{stage}' failed: {exc}")
        self.stage = stage


class Run:
    """Tracks written artifacts so a failed command can remove them."""

    def __init__(self, cfg: dict, command: str):
        self.cfg = cfg
        self.command = command
        self.out = Path(cfg["out"])
        self.written: list[Path] = []

    @contextlib.contextmanager
    def stage(self, name: str):
        try:
            yield
        except StageError:
            raise
        except Exception as exc:
            raise StageError(name, exc) from exc

    def header(self) -> dict:
        return {"command": self.command, "seed": self.cfg["seed"], "config": config_mod.provenance(self.cfg)}

    def _path(self, name: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        self.written.append(path)
        return path

    def write_json(self, name: str, payload: dict) -> Path:
        path = self._path(name)
        path.write_text(json.dumps({**self.header(), **payload}, indent=1, sort_keys=False) + "\n")
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = self._path(name)
        path.write_text(text)
        return path

    def cleanup(self):
        for p in self.written:
            with contextlib.suppress(FileNotFoundError):
                p.unlink()


# -- shared pipeline pieces -------------------------------------------------

def load_frame(cfg: dict) -> TimeSeriesFrame:
    if cfg["data"]:
        date_col = cfg["date_column"]
        if date_col == "auto":
            date_col = None
            if cfg["has_header"]:
                with open(cfg["data"], encoding="utf-8") as fh:
                    first = fh.readline().split(",")[0].strip().lower()
                if first in ("date", "time", "timestamp", "datetime"):
                    date_col = 0
        return load_csv(cfg["data"], has_header=cfg["has_header"], date_column=date_col)
    return synthetic_frame(cfg["synthetic"], seed=sub_seed(cfg["seed"], "synthetic"),
                           T=cfg["synthetic.length"], c=cfg["synthetic.channels"])


def loss_from(cfg: dict):
    if cfg["loss"] in ("mse", "mae"):
        return cfg["loss"]
    if cfg["loss"] != "olma":
        raise ValueError(f"unknown loss {cfg['loss']!r}")
    return LossSpec.from_config(cfg)


def train_config(cfg: dict) -> TrainConfig:
    return TrainConfig(learning_rate=cfg["lr"], epochs=cfg["epochs"], batch_size=cfg["batch_size"],
                       patience=cfg["patience"], seed=sub_seed(cfg["seed"], "shuffle"),
                       optimizer=cfg["optimizer"], lr_decay=cfg["lr_decay"])


def windows_for(cfg: dict, frame: TimeSeriesFrame, horizon: int):
    _, ws = split_windows(frame, cfg["split"], cfg["lookback"], horizon, cfg["stride"])
    return ws


def fit_and_score(cfg: dict, frame: TimeSeriesFrame, horizon: int, loss):
    train_ws, val_ws, test_ws = windows_for(cfg, frame, horizon)
    model = init_model(cfg["kind"], cfg["lookback"], horizon, frame.c, cfg["ma_kernel"])
    model, history = train(model, train_ws, val_ws, loss, train_config(cfg))
    mse, mae = evaluate(model, test_ws)
    return model, history, {"mse": mse, "mae": mae}


def _average(per_h: dict) -> dict:
    return {k: float(np.mean([m[k] for m in per_h.values()])) for k in ("mse", "mae")}


# -- commands ---------------------------------------------------------------

def cmd_entropy_scan(run: Run):
    cfg = run.cfg
    with run.stage("load"):
        frame = load_frame(cfg)
    with run.stage("entropy"):
        report = segment_entropy_scan(frame, cfg["seg_len"], cfg["bins"], cfg["spectrum"])
        if cfg["log_base"] == "2":
            report = report.in_base2()
        elif cfg["log_base"] != "e":
            raise ValueError(f"log_base must be 'e' or '2', got {cfg['log_base']!r}")
    with run.stage("write"):
        run.write_json("entropy.json", {**report.to_dict(), "fraction_reduced": report.fraction_reduced()})


def cmd_theorem_check(run: Run):
    cfg = run.cfg
    with run.stage("theorem"):
        rows = theorem_ensemble(cfg["trials"], (cfg["channels.min"], cfg["channels.max"]), cfg["grid"],
                                sub_seed(cfg["seed"], "gaussian"))
    with run.stage("write"):
        run.write_json("theorem.json", {
            "all_hadamard": all(r["hadamard_holds"] for r in rows),
            "all_witness": all(r["witness_lambda"] is not None for r in rows),
            "trials": rows,
        })


def cmd_train(run: Run):
    cfg = run.cfg
    with run.stage("load"):
        frame = load_frame(cfg)
        loss = loss_from(cfg)
    per_h, histories = {}, {}
    for h in cfg["horizon"]:
        with run.stage(f"train h={h}"):
            model, history, metrics = fit_and_score(cfg, frame, h, loss)
        with run.stage("write"):
            path = run._path(f"checkpoint_h{h}.json")
            save_checkpoint(model, path, run.header())
        per_h[str(h)] = metrics
        histories[str(h)] = history.to_dict()
    with run.stage("write"):
        run.write_json("metrics.json", {"loss": cfg["loss"], "horizons": per_h, "average": _average(per_h),
                                        "history": histories})


def _checkpoint_model(cfg: dict):
    if not cfg["checkpoint"]:
        raise ValueError("--checkpoint is required")
    return load_checkpoint(cfg["checkpoint"])


def cmd_eval(run: Run):
    cfg = run.cfg
    with run.stage("load"):
        model = _checkpoint_model(cfg)
        frame = load_frame(cfg)
        cfg["lookback"] = model.l_in
    with run.stage("evaluate"):
        _, _, test_ws = windows_for(cfg, frame, model.l_out)
        mse, mae = evaluate(model, test_ws)
    with run.stage("write"):
        run.write_json("metrics.json", {"horizons": {str(model.l_out): {"mse": mse, "mae": mae}},
                                        "average": {"mse": mse, "mae": mae}})


def cmd_bands(run: Run):
    cfg = run.cfg
    with run.stage("load"):
        model = _checkpoint_model(cfg)
        frame = load_frame(cfg)
        cfg["lookback"] = model.l_in
    with run.stage("bands"):
        _, _, test_ws = windows_for(cfg, frame, model.l_out)
        report = band_errors(forward(model, test_ws.inputs), test_ws.labels, cfg["bands"])
    with run.stage("write"):
        run.write_json("bands.json", report.to_dict())
        run.write_text("bands.csv", report.to_csv(json.dumps(run.header(), sort_keys=True)))


def cmd_causal(run: Run):
    cfg = run.cfg
    with run.stage("load"):
        frame = load_frame(cfg)
        if not 0 <= cfg["column"] < frame.c:
            raise ValueError(f"column {cfg['column']} out of range for {frame.c} channels")
        series = frame.values[:, cfg["column"]]
    with run.stage("causal"):
        mat = causal_matrix(series, cfg["w"], cfg["max_offset"], cfg["t_vis"], cfg["domain"])
    with run.stage("write"):
        run.write_json("causal.json", {**mat.to_dict(), "mean_effect": mat.mean_effect()})


ABLATIONS = [(False, False), (True, False), (False, True), (True, True)]


def cmd_ablate(run: Run):
    cfg = run.cfg
    with run.stage("load"):
        frame = load_frame(cfg)
        base = LossSpec.from_config(cfg)
    rows = []
    for channel, temporal in ABLATIONS:
        name = f"channel={'on' if channel else 'off'},temporal={'on' if temporal else 'off'}"
        with run.stage(f"train {name}"):
            loss = "mse" if not (channel or temporal) else LossSpec(
                base.alpha, base.beta, base.gamma, channel, temporal, base.smoothing_eps)
            per_h = {str(h): fit_and_score(cfg, frame, h, loss)[2] for h in cfg["horizon"]}
        rows.append({"channel": channel, "temporal": temporal, "horizons": per_h, "average": _average(per_h)})
    with run.stage("write"):
        run.write_json("ablation.json", {"runs": rows})


def cmd_sweep(run: Run):
    cfg = run.cfg
    with run.stage("load"):
        frame = load_frame(cfg)
        eps = cfg["loss.eps"]
    rows = []
    for share in cfg["sweep.shares"]:
        with run.stage(f"train alpha={share}"):
            spec = LossSpec.from_channel_share(share, smoothing_eps=eps)
            per_h = {str(h): fit_and_score(cfg, frame, h, spec)[2] for h in cfg["horizon"]}
        rows.append({"alpha": spec.alpha, "beta": spec.beta, "gamma": spec.gamma,
                     "horizons": per_h, "average": _average(per_h)})
    mses = [r["average"]["mse"] for r in rows]
    with run.stage("write"):
        run.write_json("sweep.json", {"runs": rows, "mse_max_over_min": max(mses) / min(mses)})


COMMANDS = {
    "entropy-scan": cmd_entropy_scan,
    "theorem-check": cmd_theorem_check,
    "train": cmd_train,
    "eval": cmd_eval,
    "bands": cmd_bands,
    "causal": cmd_causal,
    "ablate": cmd_ablate,
    "sweep": cmd_sweep,
}

# flag -> config key
FLAGS = {
    "--data": "data", "--synthetic": "synthetic", "--horizon": "horizon", "--lookback": "lookback",
    "--loss": "loss", "--alpha": "loss.alpha", "--beta": "loss.beta", "--gamma": "loss.gamma",
    "--eps": "loss.eps", "--bins": "bins", "--bands": "bands", "--seed": "seed", "--out": "out",
    "--seg-len": "seg_len", "--spectrum": "spectrum", "--trials": "trials", "--grid": "grid",
    "--w": "w", "--t-vis": "t_vis", "--max-offset": "max_offset", "--domain": "domain",
    "--column": "column", "--checkpoint": "checkpoint", "--kind": "kind", "--epochs": "epochs",
    "--lr": "lr", "--lr-decay": "lr_decay", "--batch-size": "batch_size", "--patience": "patience",
    "--split": "split", "--length": "synthetic.length", "--channels": "synthetic.channels",
    "--shares": "sweep.shares", "--log-base": "log_base", "--date-column": "date_column",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="olma", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="flat key = value config file")
        for flag, key in FLAGS.items():
            p.add_argument(flag, dest=key, default=None, metavar=key.split(".")[-1].upper())
        p.add_argument("--no-header", dest="has_header", action="store_const", const="false", default=None)
        p.add_argument("--no-channel", dest="loss.include_channel", action="store_const", const="false",
                       default=None)
        p.add_argument("--no-temporal", dest="loss.include_temporal", action="store_const", const="false",
                       default=None)
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    cfg_path = args.pop("config")
    try:
        cfg = config_mod.resolve(cfg_path, args)
    except (config_mod.ConfigError, OSError) as exc:
        print(f"olma {command}: stage 'config' failed: {exc}", file=sys.stderr)
        return 1
    run = Run(cfg, command)
    try:
        COMMANDS[command](run)
    except StageError as exc:
        run.cleanup()
        print(f"olma {command}: {exc}", file=sys.stderr)
        return 1
    for p in run.written:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
