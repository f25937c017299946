"""
Monte Carlo runner: generate -> estimate spectrum -> apply criteria, R times.

Replication r always draws from seed stream r, and results are merged in
replication order, so a report depends only on the configuration, never on
the number of worker threads.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import os
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from importlib import resources
from typing import Any, Union

import numpy as np

from . import __version__
from .criteria import METHODS, OVERRIDE_TYPES, select
from .errors import InputError, TdrrError
from .factors import factor_spectrum
from .generators import FactorModelSpec, SdrModelSpec, Seed, gen_factor, gen_sdr
from .sdr import DEE_WEIGHTINGS, dee_sir_matrix, sir_matrix
from .spectra import EigenSpectrum

__all__ = [
    "ExperimentConfig",
    "FrequencyReport",
    "run_experiment",
    "parse_config",
    "load_config",
    "bundled_configs",
    "report_to_csv",
    "report_to_json",
    "report_from_json",
]

SCHEMA_VERSION = 1
ERROR_BUCKET = "error"
ESTIMATORS = ("sir", "dee", "factor")

ModelSpec = Union[SdrModelSpec, FactorModelSpec]
Bucket = Union[int, str]


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    estimator: str = "dee"
    methods: tuple[str, ...] = ("TDRR", "RRE", "RE", "BIC")
    replications: int = 500
    seed: int = 20240101
    H: int = 10
    weighting: str = "none"
    overrides: dict[str, dict[str, Any]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise InputError(f"replications must be at least 1, got {self.replications}")
        if not self.methods:
            raise InputError("at least one method is required")
        methods = tuple(m.upper() for m in self.methods)
        unknown = [m for m in methods if m not in METHODS]
        if unknown:
            raise InputError(f"unknown methods: {', '.join(unknown)}")
        object.__setattr__(self, "methods", methods)
        if self.estimator not in ESTIMATORS:
            raise InputError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")
        is_factor = isinstance(self.model, FactorModelSpec)
        if is_factor != (self.estimator == "factor"):
            raise InputError("factor designs go with estimator=factor and SDR designs with sir/dee")
        if self.weighting not in DEE_WEIGHTINGS:
            raise InputError(f"weighting must be one of {DEE_WEIGHTINGS}")
        Seed(self.seed)

    @property
    def setting(self) -> str:
        return "factor" if self.estimator == "factor" else "sdr"

    def to_dict(self) -> dict[str, Any]:
        model = self.model.to_dict()
        model["kind"] = self.setting
        return {
            "model": model,
            "estimator": self.estimator,
            "methods": list(self.methods),
            "replications": self.replications,
            "seed": self.seed,
            "H": self.H,
            "weighting": self.weighting,
            "overrides": {k: dict(v) for k, v in sorted(self.overrides.items())},
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        model = dict(data["model"])
        kind = model.pop("kind")
        spec: ModelSpec = FactorModelSpec(**model) if kind == "factor" else SdrModelSpec(**model)
        return cls(
            model=spec,
            estimator=data["estimator"],
            methods=tuple(data["methods"]),
            replications=int(data["replications"]),
            seed=int(data["seed"]),
            H=int(data["H"]),
            weighting=data.get("weighting", "none"),
            overrides={k: dict(v) for k, v in data.get("overrides", {}).items()},
        )


@dataclass
class FrequencyReport:
    """Per-method counts of the selected dimension over R replications.

    ``wall_time`` is kept in memory only; it is left out of the serialized
    forms so that identical runs produce identical files.
    """

    config: ExperimentConfig
    counts: dict[str, dict[Bucket, int]]
    version: str = __version__
    wall_time: float | None = field(default=None, compare=False)

    @property
    def replications(self) -> int:
        return self.config.replications

    def proportions(self, method: str) -> dict[Bucket, float]:
        R = self.replications
        return {k: v / R for k, v in self.counts[method].items()}

    def proportion(self, method: str, bucket: Bucket) -> float:
        return self.counts[method].get(bucket, 0) / self.replications


def _bucket_key(b: Bucket) -> tuple[int, int | str]:
    return (1, b) if isinstance(b, str) else (0, b)


def _estimate_spectrum(cfg: ExperimentConfig, seed: Seed) -> tuple[EigenSpectrum, int, int]:
    if isinstance(cfg.model, FactorModelSpec):
        Y = gen_factor(cfg.model, seed)
        return factor_spectrum(Y), cfg.model.n, cfg.model.p
    sample = gen_sdr(cfg.model, seed)
    if cfg.estimator == "sir":
        target = sir_matrix(sample.X, sample.y, cfg.H)
    else:
        target = dee_sir_matrix(sample.X, sample.y, cfg.weighting)
    return target.spectrum, cfg.model.n, cfg.model.p


def run_replication(cfg: ExperimentConfig, r: int) -> dict[str, Bucket]:
    """Selected dimension per method for replication r; failures map to 'error'."""
    try:
        spec, n, p = _estimate_spectrum(cfg, Seed(cfg.seed, r))
    except (TdrrError, np.linalg.LinAlgError):
        return {m: ERROR_BUCKET for m in cfg.methods}
    out: dict[str, Bucket] = {}
    for method in cfg.methods:
        try:
            est = select(
                spec, method, setting=cfg.setting, n=n, p=p, H=cfg.H,
                overrides=cfg.overrides.get(method),
            )
            out[method] = est.q_hat
        except TdrrError:
            out[method] = ERROR_BUCKET
    return out


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> FrequencyReport:
    start = time.perf_counter()
    reps = range(cfg.replications)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            # map() yields in submission order regardless of completion order
            results = list(pool.map(lambda r: run_replication(cfg, r), reps))
    else:
        results = [run_replication(cfg, r) for r in reps]
    counts: dict[str, dict[Bucket, int]] = {}
    for method in cfg.methods:
        tally = Counter(res[method] for res in results)
        counts[method] = {k: tally[k] for k in sorted(tally, key=_bucket_key)}
    return FrequencyReport(cfg, counts, wall_time=time.perf_counter() - start)


def report_to_csv(rep: FrequencyReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "q_hat", "proportion", "count"])
    for method in rep.config.methods:
        for bucket, count in rep.counts[method].items():
            writer.writerow([method, bucket, repr(count / rep.replications), count])
    return buf.getvalue()


def report_to_json(rep: FrequencyReport) -> str:
    payload = {
        "schema": SCHEMA_VERSION,
        "version": rep.version,
        "config": rep.config.to_dict(),
        "results": {
            method: [
                {"q_hat": b, "count": c, "proportion": c / rep.replications}
                for b, c in rep.counts[method].items()
            ]
            for method in rep.config.methods
        },
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> FrequencyReport:
    data = json.loads(text)
    if data.get("schema") != SCHEMA_VERSION:
        raise InputError(f"unsupported report schema {data.get('schema')!r}")
    cfg = ExperimentConfig.from_dict(data["config"])
    counts = {
        method: {row["q_hat"]: int(row["count"]) for row in rows}
        for method, rows in data["results"].items()
    }
    return FrequencyReport(cfg, counts, version=data["version"])


# -- flat key = value config files ------------------------------------------

_SDR_KEYS = {f.name for f in fields(SdrModelSpec)} - {"example"}
_FACTOR_KEYS = {f.name for f in fields(FactorModelSpec)}
_TOP_KEYS = {"example", "estimator", "methods", "replications", "seed", "H", "weighting"}


def _coerce(value: str) -> Any:
    for kind in (int, float):
        try:
            return kind(value)
        except ValueError:
            pass
    return value


def _override_value(key: str, value: str) -> Any:
    try:
        return OVERRIDE_TYPES[key](value)
    except ValueError:
        raise InputError(f"config key {key!r} has invalid value {value!r}") from None


def _int_value(raw: dict[str, Any], key: str, default: int | None = None) -> int:
    if key not in raw:
        if default is None:
            raise InputError(f"config is missing required key {key!r}")
        return default
    try:
        return int(raw[key])
    except (TypeError, ValueError):
        raise InputError(f"config key {key!r} must be an integer, got {raw[key]!r}") from None


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat ``key = value`` experiment format.

    Required: example (ex1..ex4 or factor), n, p, estimator, methods,
    replications, seed. Tuning overrides are ``c1``, ``c2``, ``tau``,
    ``alpha_n`` ... applied to every method, or ``TDRR.c1`` style to one.
    Lines starting with ``#`` are comments.
    """
    parser = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str  # keep key case (H, TDRR.c1)
    try:
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise InputError(f"config syntax error: {exc}") from exc
    raw = dict(parser["experiment"])

    missing = [k for k in ("example", "n", "p", "estimator", "methods", "replications", "seed") if k not in raw]
    if missing:
        raise InputError(f"config is missing required keys: {', '.join(missing)}")

    example = raw.pop("example")
    is_factor = example == "factor"
    model_keys = _FACTOR_KEYS if is_factor else _SDR_KEYS
    model_args: dict[str, Any] = {}
    overrides: dict[str, dict[str, Any]] = {}
    top: dict[str, Any] = {}
    methods = tuple(m.strip().upper() for m in raw.pop("methods").split(",") if m.strip())
    for key, value in raw.items():
        if key in _TOP_KEYS:
            top[key] = value
        elif key in model_keys:
            model_args[key] = _coerce(value)
        elif key in OVERRIDE_TYPES:
            for m in methods:
                overrides.setdefault(m, {})[key] = _override_value(key, value)
        elif "." in key and key.split(".", 1)[1] in OVERRIDE_TYPES:
            method, opt = key.split(".", 1)
            overrides.setdefault(method.upper(), {})[opt] = _override_value(opt, value)
        else:
            raise InputError(f"unknown config key {key!r}")
    for key in ("n", "p", "d"):
        if key in model_args:
            model_args[key] = _int_value(model_args, key)
    try:
        model: ModelSpec = (
            FactorModelSpec(**model_args) if is_factor else SdrModelSpec(example=example, **model_args)
        )
    except TypeError as exc:
        raise InputError(f"invalid model keys: {exc}") from exc
    return ExperimentConfig(
        model=model,
        estimator=top["estimator"],
        methods=methods,
        replications=_int_value(top, "replications"),
        seed=_int_value(top, "seed"),
        H=_int_value(top, "H", 10),
        weighting=top.get("weighting", "none"),
        overrides=overrides,
    )


def bundled_configs() -> dict[str, str]:
    """Shipped example configs keyed by file stem (e.g. ``ex1_n800_p10``)."""
    root = resources.files("tdrr") / "data"
    return {
        entry.name[: -len(".cfg")]: str(entry)
        for entry in sorted(root.iterdir(), key=lambda e: e.name)
        if entry.name.endswith(".cfg")
    }


def load_config(path: str) -> ExperimentConfig:
    """Read a config file; a bare bundled name such as ``ex1_n800_p10`` also works."""
    if not os.path.exists(path):
        bundled = bundled_configs()
        name = path[: -len(".cfg")] if path.endswith(".cfg") else path
        if name in bundled:
            path = bundled[name]
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
