"""Experiment configuration files.

An INI file with one ``[experiment]`` section and one ``[alg.<label>]``
section per optimizer::

    [experiment]
    benchmark = lo
    n_start = 100
    n_end = 3000
    repetitions = 50
    master_seed = 1
    normalization = n^2
    regression_skip = 4

    [alg.dega-opt]
    id = dega-a
    lambda = (n ln n)^2/3

Parameter values are kept as written, so ``parse -> serialize -> parse``
is lossless.
"""

from __future__ import annotations

import configparser
import io
from pathlib import Path

from .algorithms import ALGORITHMS, PARAMETERS, OptimizerConfig, UnknownAlgorithm
from .experiments import (
    DEFAULT_CAP_RULE,
    DEFAULT_PILOT_RULE,
    DEFAULT_TARGET_RUNS,
    AlgorithmSpec,
    ExperimentConfig,
)

N_END_DEFAULTS = {"lo": 3000, "om": 30000, "lfhw": 30000, "mivs": 1000}

EXPERIMENT_KEYS = {
    "benchmark": None,
    "n_start": "100",
    "n_end": None,
    "size_count": "10",
    "repetitions": "50",
    "master_seed": "0",
    "budget_rule": "500*n^2",
    "protocol": "time-to-optimum",
    "normalization": "none",
    "regression_skip": "",
    "cap_rule": DEFAULT_CAP_RULE,
    "pilot_rule": DEFAULT_PILOT_RULE,
    "target_runs": str(DEFAULT_TARGET_RUNS),
}
_INT_KEYS = ("n_start", "n_end", "size_count", "repetitions", "master_seed", "target_runs")


class ConfigError(ValueError):
    pass


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(
        interpolation=None, delimiters=("=",), inline_comment_prefixes=(";",)
    )
    cp.optionxform = str
    return cp


def apply_overrides(cp: configparser.ConfigParser, overrides: list[str]) -> None:
    """Apply ``key=value`` pairs; ``key`` is an experiment key or ``alg.<label>.<param>``."""
    for item in overrides:
        key, sep, value = item.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"override {item!r} is not key=value")
        if key.startswith("alg."):
            section, _, param = key.rpartition(".")
            if not cp.has_section(section):
                cp.add_section(section)
            cp[section][param] = value
        else:
            if key not in EXPERIMENT_KEYS:
                raise ConfigError(f"unknown experiment key {key!r}")
            if not cp.has_section("experiment"):
                cp.add_section("experiment")
            cp["experiment"][key] = value


def _int(section: str, key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"[{section}] {key} must be an integer, got {value!r}") from None


def _algorithm(label: str, section: configparser.SectionProxy) -> AlgorithmSpec:
    if "id" not in section:
        raise ConfigError(f"[alg.{label}] is missing id")
    alg = section["id"]
    if alg not in ALGORITHMS:
        raise ConfigError(str(UnknownAlgorithm(alg)))
    params: dict = {}
    for key, value in section.items():
        if key == "id":
            continue
        if key not in PARAMETERS[alg]:
            raise ConfigError(f"[alg.{label}] unknown key {key!r} for {alg}")
        if key == "p_c":
            try:
                params[key] = float(value)
            except ValueError:
                raise ConfigError(f"[alg.{label}] p_c must be a number") from None
        else:
            params[key] = value
    try:
        return AlgorithmSpec(label, OptimizerConfig.from_parameters(alg, params))
    except ValueError as exc:
        raise ConfigError(f"[alg.{label}] {exc}") from None


def from_parser(cp: configparser.ConfigParser) -> ExperimentConfig:
    for name in cp.sections():
        if name != "experiment" and not name.startswith("alg."):
            raise ConfigError(f"unknown section [{name}]")
    if not cp.has_section("experiment"):
        raise ConfigError("missing [experiment] section")
    exp = cp["experiment"]
    for key in exp:
        if key not in EXPERIMENT_KEYS:
            raise ConfigError(f"unknown experiment key {key!r}")
    if "benchmark" not in exp:
        raise ConfigError("[experiment] benchmark is required")
    bench = exp["benchmark"]
    values = {k: exp.get(k, d) for k, d in EXPERIMENT_KEYS.items()}
    if values["n_end"] is None:
        values["n_end"] = str(N_END_DEFAULTS.get(bench, 1000))
    kw = {k: _int("experiment", k, values[k]) for k in _INT_KEYS}
    skip = values["regression_skip"]
    algs = [_algorithm(s[4:], cp[s]) for s in cp.sections() if s.startswith("alg.")]
    if not algs:
        raise ConfigError("no [alg.<label>] sections")
    try:
        return ExperimentConfig(
            benchmark=bench,
            algorithms=algs,
            budget_rule=values["budget_rule"],
            protocol=values["protocol"],
            normalization=values["normalization"],
            regression_skip=_int("experiment", "regression_skip", skip) if skip else None,
            cap_rule=values["cap_rule"],
            pilot_rule=values["pilot_rule"],
            **kw,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse(text: str, overrides: list[str] | None = None) -> ExperimentConfig:
    cp = _parser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    apply_overrides(cp, overrides or [])
    return from_parser(cp)


def load(path: str | Path, overrides: list[str] | None = None) -> ExperimentConfig:
    return parse(Path(path).read_text(), overrides)


def serialize(cfg: ExperimentConfig) -> str:
    cp = _parser()
    cp["experiment"] = {
        "benchmark": cfg.benchmark,
        "n_start": str(cfg.n_start),
        "n_end": str(cfg.n_end),
        "size_count": str(cfg.size_count),
        "repetitions": str(cfg.repetitions),
        "master_seed": str(cfg.master_seed),
        "budget_rule": str(cfg.budget_rule),
        "protocol": cfg.protocol,
        "normalization": cfg.normalization,
        "regression_skip": "" if cfg.regression_skip is None else str(cfg.regression_skip),
        "cap_rule": str(cfg.cap_rule),
        "pilot_rule": str(cfg.pilot_rule),
        "target_runs": str(cfg.target_runs),
    }
    for spec in cfg.algorithms:
        section = {"id": spec.config.algorithm}
        section.update({k: repr(v) if isinstance(v, float) else str(v)
                        for k, v in spec.config.parameters().items()})
        cp[f"alg.{spec.label}"] = section
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
