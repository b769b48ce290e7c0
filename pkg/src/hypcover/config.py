"""Flat key=value experiment configuration and seeded random streams."""
from __future__ import annotations

import csv
import io
import json
import platform
from dataclasses import asdict, dataclass, field, fields

import numpy as np


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    model: str = "f2"
    delta: float = 1.0
    lam: float = 1.0
    depth: int = 80
    table_depth: int = 80
    radius: int = 5
    samples: int = 200
    seed: int | None = None
    out: str = "out"
    # escape experiments
    horizon: int = 200
    threshold: float = 10.0
    escape_fraction: float = 0.95
    co_escape_fraction: float = 0.90
    contrast_model: str = "z2"
    # Green machinery
    pairs: int = 6
    lam2: float = 1.5
    lam_sub: float = 0.9
    iter_radius: int = 7
    trend_slack: float = 1e-3
    drift_tol: float = 0.20
    slope_tol: float = 0.02
    # Martin rays
    rays_radius: int = 10
    rays_horizon: int = 7
    band_c: float = 0.5
    decrease_k: int = 6
    # comparability and pressure
    levels: int = 6
    band_factor: float = 10.0
    max_n: int = 16

    def validate(self) -> "ExperimentConfig":
        if not self.delta > 0:
            raise ConfigError("delta must be positive")
        if not self.lam > 0:
            raise ConfigError("lambda must be positive")
        if self.depth < 1 or self.radius < 0 or self.samples < 1:
            raise ConfigError("depth, radius and samples must be positive")
        from .shift import octagon_model
        for m in (self.model, self.contrast_model):
            try:
                octagon_model(m)
            except Exception as exc:
                raise ConfigError(f"bad model {m!r}: {exc}") from None
        return self

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("a seed is required for randomized runs")
        return int(self.seed)

    def echo(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


# file and flag names that differ from the field names
ALIASES = {"lambda": "lam"}
COMMAND_DEFAULTS = {
    "green": {"depth": 160},
}


def _coerce(name: str, raw: str):
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    t = types[name]
    try:
        if "int" in t:
            return None if raw.lower() == "none" else int(raw)
        if "float" in t:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value {raw!r} for {name}") from None


def parse_config_text(text: str) -> dict:
    """key = value lines; '#' starts a comment; unknown keys are errors."""
    known = {f.name for f in fields(ExperimentConfig)}
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (x.strip() for x in line.split("=", 1))
        key = ALIASES.get(key, key)
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, val)
    return out


def load_config(path: str | None = None, overrides: dict | None = None, command: str | None = None) -> ExperimentConfig:
    values = dict(COMMAND_DEFAULTS.get(command, {}))
    if path:
        with open(path, encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read()))
    for k, v in (overrides or {}).items():
        if v is not None:
            values[ALIASES.get(k, k)] = v
    return ExperimentConfig(**values).validate()


# ---------------------------------------------------------------- random streams

STREAMS = {"coding": 0, "green": 1, "boundary": 2, "pairs": 3, "rays": 4, "harnack": 5}


def stream(seed: int, name: str) -> np.random.Generator:
    """Counter-based generator for (seed, stream); streams never overlap."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(STREAMS[name],))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------- reports

def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".10g")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


@dataclass
class ExperimentReport:
    name: str
    header: list
    rows: list
    summary: dict
    passed: bool
    config: dict
    extra: dict = field(default_factory=dict)   # name -> (header, rows)

    def csv_text(self, header=None, rows=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.header if header is None else header)
        for r in (self.rows if rows is None else rows):
            w.writerow([fmt(x) for x in r])
        return buf.getvalue()

    def json_text(self) -> str:
        from . import __version__
        doc = {
            "experiment": self.name,
            "passed": bool(self.passed),
            "summary": _jsonable(self.summary),
            "config": self.config,
            "provenance": {
                "package": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def write(self, out_dir: str) -> tuple:
        import os
        os.makedirs(out_dir, exist_ok=True)
        base = os.path.join(out_dir, self.name)
        with open(base + ".csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(self.csv_text())
        with open(base + ".json", "w", encoding="utf-8") as fh:
            fh.write(self.json_text())
        paths = [base + ".csv", base + ".json"]
        for name, (header, rows) in sorted(self.extra.items()):
            p = os.path.join(out_dir, name + ".csv")
            with open(p, "w", encoding="utf-8", newline="") as fh:
                fh.write(self.csv_text(header, rows))
            paths.append(p)
        return tuple(paths)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else str(v)
    return x
