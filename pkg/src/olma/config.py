"""Flat ``key = value`` run configuration with typed defaults.

Resolution order: built-in defaults, then the config file, then command-line
flags. Unknown keys are rejected.
"""

from __future__ import annotations

from pathlib import Path


def _floats(v) -> tuple[float, ...]:
    if isinstance(v, (list, tuple)):
        return tuple(float(x) for x in v)
    return tuple(float(x) for x in str(v).replace(" ", "").split(",") if x)


def _ints(v) -> tuple[int, ...]:
    if isinstance(v, (list, tuple)):
        return tuple(int(x) for x in v)
    return tuple(int(x) for x in str(v).replace(" ", "").split(",") if x)


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _date_column(v):
    """Column index, ``"auto"`` (first column if its header is ``date``) or None."""
    s = "" if v is None else str(v).strip().lower()
    if s in ("", "none"):
        return None
    if s == "auto":
        return "auto"
    return int(v)


def _opt_str(v):
    return None if v is None or str(v).strip().lower() in ("", "none") else str(v)


# key -> (parser, default)
SCHEMA: dict[str, tuple] = {
    # data
    "data": (_opt_str, None),
    "synthetic": (str, "trend"),
    "synthetic.length": (int, 2000),
    "synthetic.channels": (int, 1),
    "has_header": (_bool, True),
    "date_column": (_date_column, "auto"),
    "split": (_floats, (0.6, 0.2, 0.2)),
    "lookback": (int, 96),
    "horizon": (_ints, (96,)),
    "stride": (int, 1),
    # model + training
    "kind": (str, "decomposed"),
    "ma_kernel": (int, 25),
    "loss": (str, "olma"),
    "loss.alpha": (float, 0.34),
    "loss.beta": (float, 0.33),
    "loss.gamma": (float, 0.33),
    "loss.include_channel": (_bool, True),
    "loss.include_temporal": (_bool, True),
    "loss.eps": (float, 1e-12),
    "optimizer": (str, "adaptive_moments"),
    "lr": (float, 0.01),
    "lr_decay": (float, 0.5),
    "epochs": (int, 20),
    "batch_size": (int, 32),
    "patience": (int, 3),
    "checkpoint": (_opt_str, None),
    # entropy
    "bins": (int, 16),
    "seg_len": (int, 96),
    "spectrum": (str, "onesided"),
    "log_base": (str, "e"),
    # theorem
    "trials": (int, 200),
    "grid": (int, 101),
    "channels.min": (int, 2),
    "channels.max": (int, 8),
    # analysis
    "bands": (int, 4),
    "w": (int, 2),
    "t_vis": (int, 96),
    "max_offset": (int, 95),
    "domain": (str, "time"),
    "column": (int, 0),
    "sweep.shares": (_floats, (0.1, 0.3, 0.5, 0.7, 0.9)),
    # run
    "seed": (int, 0),
    "out": (str, "out"),
}


class ConfigError(ValueError):
    pass


def parse_value(key: str, raw):
    if key not in SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    parser, _ = SCHEMA[key]
    try:
        return parser(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from None


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        out[key] = parse_value(key, raw)
    return out


def resolve(file_path=None, overrides: dict | None = None) -> dict:
    cfg = {k: default for k, (_, default) in SCHEMA.items()}
    if file_path is not None:
        cfg.update(read_config_file(file_path))
    for k, v in (overrides or {}).items():
        if v is not None:
            cfg[k] = parse_value(k, v)
    return cfg


def provenance(cfg: dict) -> dict:
    """JSON-safe copy of the resolved config; the output directory is omitted so reruns compare equal."""
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(cfg.items()) if k != "out"}
