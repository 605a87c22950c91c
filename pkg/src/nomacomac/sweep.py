"""Experiment configuration, parameter sweeps and CSV persistence."""

from __future__ import annotations

import configparser
import csv
import itertools
import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .channel import ChannelConfig
from .filters import METHODS
from .scheduling import make_plan
from .sim import simulate

__all__ = [
    "CSV_HEADER",
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "parse_int_list",
    "parse_grid",
    "parse_methods",
    "load_config_file",
    "build_config",
    "run_sweep",
    "emit_csv",
    "read_csv",
]

log = logging.getLogger(__name__)

CSV_HEADER = ["method", "K", "N", "ebno_db", "mse_mean", "mse_stderr", "analytic_mean", "trials", "redraws"]


class ConfigError(ValueError):
    def __init__(self, key: str, msg: str):
        self.key = key
        super().__init__(f"{key}: {msg}")


@dataclass(frozen=True)
class ExperimentConfig:
    nodes: tuple[int, ...]
    subcarriers: tuple[int, ...]
    ebno_db: tuple[float, ...]
    methods: tuple[str, ...] = METHODS
    trials: int = 10_000
    p0: float = 1.0
    plan_m: int | None = None  # None: M = K for every K
    plan_d: int = 1
    seed: int = 42
    out: Path = Path("results")
    normalize_by_n: bool = False
    ofdm_symbols: int = 1
    workers: int = 1

    def __post_init__(self):
        for key in ("nodes", "subcarriers", "ebno_db", "methods"):
            if not getattr(self, key):
                raise ConfigError(key, "must not be empty")
        for key in ("nodes", "subcarriers"):
            if any(v < 1 for v in getattr(self, key)):
                raise ConfigError(key, "values must be positive")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError("methods", f"unknown method(s) {bad}; choose from {list(METHODS)}")
        if self.trials < 1:
            raise ConfigError("trials", f"must be >= 1, got {self.trials}")
        if not self.p0 > 0:
            raise ConfigError("p0", f"must be positive, got {self.p0}")
        if self.ofdm_symbols < 1:
            raise ConfigError("ofdm_symbols", "must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        for K in self.nodes:
            try:
                make_plan(K, self.plan_m, self.plan_d)
            except ValueError as exc:
                raise ConfigError("plan", f"K={K}: {exc}") from None


@dataclass(frozen=True)
class ResultRow:
    method: str
    K: int
    N: int
    ebno_db: float
    mse_mean: float
    mse_stderr: float
    analytic_mean: float
    trials: int
    redraws: int

    def as_csv(self) -> list[str]:
        return [self.method, str(self.K), str(self.N), repr(self.ebno_db), repr(self.mse_mean),
                repr(self.mse_stderr), repr(self.analytic_mean), str(self.trials), str(self.redraws)]

    @classmethod
    def from_csv(cls, rec: Mapping[str, str]) -> "ResultRow":
        return cls(
            method=rec["method"], K=int(rec["K"]), N=int(rec["N"]),
            ebno_db=float(rec["ebno_db"]), mse_mean=float(rec["mse_mean"]),
            mse_stderr=float(rec["mse_stderr"]), analytic_mean=float(rec["analytic_mean"]),
            trials=int(rec["trials"]), redraws=int(rec["redraws"]),
        )


# xxxxxxxxxx parsing xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
def parse_int_list(text: str, key: str = "value") -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in str(text).replace(" ", "").split(",") if tok)
    except ValueError:
        raise ConfigError(key, f"expected comma-separated integers, got {text!r}") from None


def parse_grid(text: str, key: str = "ebno") -> tuple[float, ...]:
    """Parse ``start:step:stop`` ranges (inclusive) and comma lists.

    >>> parse_grid("0:2.5:5,8")
    (0.0, 2.5, 5.0, 8.0)
    """
    out: list[float] = []
    try:
        for tok in str(text).replace(" ", "").split(","):
            if not tok:
                continue
            parts = [float(p) for p in tok.split(":")]
            if len(parts) == 1:
                out.append(parts[0])
            elif len(parts) == 3:
                start, step, stop = parts
                if step <= 0 or stop < start:
                    raise ValueError
                count = int(np.floor((stop - start) / step + 1e-9)) + 1
                out.extend(round(start + i * step, 12) for i in range(count))
            else:
                raise ValueError
    except ValueError:
        raise ConfigError(key, f"expected 'start:step:stop' or comma list, got {text!r}") from None
    return tuple(out)


def parse_methods(text: str) -> tuple[str, ...]:
    return tuple(tok for tok in str(text).replace(" ", "").split(",") if tok)


def _parse_bool(text: str, key: str) -> bool:
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(key, f"expected a boolean, got {text!r}")


_PARSERS = {
    "nodes": parse_int_list,
    "subcarriers": parse_int_list,
    "ebno_db": parse_grid,
    "methods": lambda t, k: parse_methods(t),
    "trials": lambda t, k: _scalar(int, t, k),
    "p0": lambda t, k: _scalar(float, t, k),
    "plan_m": lambda t, k: None if str(t).strip().lower() in ("", "none", "k") else _scalar(int, t, k),
    "plan_d": lambda t, k: _scalar(int, t, k),
    "seed": lambda t, k: _scalar(int, t, k),
    "out": lambda t, k: Path(t),
    "normalize_by_n": _parse_bool,
    "ofdm_symbols": lambda t, k: _scalar(int, t, k),
    "workers": lambda t, k: _scalar(int, t, k),
}
_ALIASES = {"ebno": "ebno_db", "plan-m": "plan_m", "plan-d": "plan_d",
            "normalize-by-n": "normalize_by_n", "ofdm-symbols": "ofdm_symbols"}


def _scalar(kind, text, key):
    if isinstance(text, kind) and not isinstance(text, bool):
        return text
    try:
        return kind(str(text).strip())
    except ValueError:
        raise ConfigError(key, f"expected {kind.__name__}, got {text!r}") from None


def load_config_file(path) -> dict[str, str]:
    """Read a flat ``key = value`` file (an optional ``[sweep]`` header is allowed)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    parser = configparser.ConfigParser(interpolation=None)
    if not text.lstrip().startswith("["):
        text = "[sweep]\n" + text
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError("config", f"{path}: {exc}") from None
    section = parser["sweep"] if parser.has_section("sweep") else parser[parser.sections()[0]]
    return dict(section)


def build_config(values: Mapping[str, object]) -> ExperimentConfig:
    """Validated :class:`ExperimentConfig` from raw string or typed values.

    Later keys override earlier ones only through the mapping the caller
    builds; unknown keys are rejected.
    """
    known = {f.name for f in fields(ExperimentConfig)}
    kwargs = {}
    for raw_key, raw in values.items():
        key = _ALIASES.get(raw_key, raw_key).replace("-", "_")
        if key not in known:
            raise ConfigError(raw_key, "unknown configuration key")
        if raw is None:
            continue
        kwargs[key] = _PARSERS[key](raw, key) if isinstance(raw, (str, Path)) else raw
    for key in ("nodes", "subcarriers", "ebno_db"):
        if key not in kwargs:
            raise ConfigError(key, "is required")
    for key in ("nodes", "subcarriers", "ebno_db", "methods"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    return ExperimentConfig(**kwargs)


# xxxxxxxxxx sweep xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
def _sweep_points(cfg: ExperimentConfig):
    for K, N in itertools.product(cfg.nodes, cfg.subcarriers):
        ccfg = ChannelConfig(nodes=K, subcarriers=N, ofdm_symbols=cfg.ofdm_symbols, seed=cfg.seed)
        plan = make_plan(K, cfg.plan_m, cfg.plan_d)
        est = simulate(ccfg, cfg.methods, cfg.ebno_db, cfg.trials, cfg.p0, plan=plan,
                       normalize_by_n=cfg.normalize_by_n, workers=cfg.workers)
        for method in cfg.methods:
            for e in est[method]:
                yield ResultRow(method, K, N, e.ebno_db, e.mean, e.std_error, e.analytic,
                                e.trials, e.redraws)


def run_sweep(cfg: ExperimentConfig, csv_path=None) -> list[ResultRow]:
    """Full (K, N, method, Eb/N0) sweep; rows are appended to ``csv_path`` as produced."""
    rows: list[ResultRow] = []
    handle = None
    try:
        if csv_path is not None:
            csv_path = Path(csv_path)
            csv_path.parent.mkdir(parents=True, exist_ok=True)
            handle = open(csv_path, "w", newline="")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_HEADER)
        for row in _sweep_points(cfg):
            rows.append(row)
            if handle is not None:
                writer.writerow(row.as_csv())
                handle.flush()
            log.debug("%s K=%d N=%d %.2f dB: %.6g", row.method, row.K, row.N, row.ebno_db, row.mse_mean)
    except OSError as exc:
        raise OSError(f"cannot write {csv_path}: {exc.strerror}") from exc
    finally:
        if handle is not None:
            handle.close()
    return rows


def emit_csv(rows: Iterable[ResultRow], path) -> Path:
    rows = list(rows)
    if not rows:
        raise ValueError("no result rows to write")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.as_csv())
    return path


def read_csv(path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [ResultRow.from_csv(rec) for rec in reader]

