"""The (2+1)-DEGA variants and the baseline optimizers.

Every optimizer takes a :class:`FitnessFunction`, an :class:`OptimizerConfig`
and a :class:`RandomSource`, runs until the target fitness is evaluated or the
budget is spent, and returns a :class:`RunResult`.  The fitness function's
evaluation counter is advanced by the number of evaluations used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels as K
from . import rules
from .benchmarks import FitnessFunction
from .bitcore import BitString, RandomSource, hamming
from .trace import PhaseTrace

ALGORITHMS = ("dega-a", "dega-a-prime", "dega-a-bb", "opo-ea", "tpo-ga", "ollga", "umda")
DEGA_VARIANTS = ("dega-a", "dega-a-prime", "dega-a-bb")

# parameters each algorithm accepts besides budget and target
PARAMETERS = {
    "dega-a": ("lambda", "exploitation_cap"),
    "dega-a-prime": (),
    "dega-a-bb": (),
    "opo-ea": (),
    "tpo-ga": ("p_c",),
    "ollga": ("lambda", "k"),
    "umda": ("lambda", "mu"),
}
DEFAULTS = {
    "tpo-ga": {"p_c": 0.5},
    "ollga": {"lambda": "sqrt-ln", "k": "sqrt-ln"},
    "umda": {"lambda": "sqrt(n) ln", "mu": "ln"},
}
DEFAULT_BUDGET = "500*n^2"
TRACE_STRIDE_ABOVE = 2000


class UnknownAlgorithm(ValueError):
    def __init__(self, name: str) -> None:
        super().__init__(f"unknown algorithm {name!r}; valid identifiers: {', '.join(ALGORITHMS)}")
        self.name = name


@dataclass
class OptimizerConfig:
    """Algorithm identifier plus its parameters.

    ``lam``, ``k``, ``mu`` and ``exploitation_cap`` may be numbers or size
    rules (see :mod:`dega.rules`); they are resolved against ``n`` at run time.
    """

    algorithm: str
    lam: object = None
    p_c: float | None = None
    k: object = None
    mu: object = None
    exploitation_cap: object = None
    budget: object = DEFAULT_BUDGET
    target: float | None = None

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise UnknownAlgorithm(self.algorithm)
        allowed = PARAMETERS[self.algorithm]
        for name, value in self.parameters().items():
            if name not in allowed:
                raise ValueError(f"{self.algorithm} does not take parameter {name!r}")
            if name == "exploitation_cap":
                rules.validate(value, ("lam",))
            elif name != "p_c":
                rules.validate(value)
        if self.algorithm == "dega-a" and self.lam is None:
            raise ValueError("dega-a requires lambda")
        if self.p_c is not None and not 0.0 <= self.p_c <= 1.0:
            raise ValueError("p_c must lie in [0, 1]")
        rules.validate(self.budget)

    def parameters(self) -> dict:
        """The algorithm parameters that are set, keyed by their public names."""
        out = {
            "lambda": self.lam,
            "p_c": self.p_c,
            "k": self.k,
            "mu": self.mu,
            "exploitation_cap": self.exploitation_cap,
        }
        return {k: v for k, v in out.items() if v is not None}

    @classmethod
    def from_parameters(cls, algorithm: str, params: dict, **kw) -> OptimizerConfig:
        params = dict(params)
        if "lambda" in params:
            params["lam"] = params.pop("lambda")
        return cls(algorithm, **params, **kw)

    def resolved(self, n: int) -> dict:
        """Concrete integer parameters for dimension ``n``."""
        p = {**DEFAULTS.get(self.algorithm, {}), **self.parameters()}
        out: dict = {"budget": rules.resolve_ceil(self.budget, n, minimum=1)}
        if self.algorithm == "dega-a":
            out["lambda"] = rules.resolve(p["lambda"], n, minimum=2)
            cap = p.get("exploitation_cap")
            out["exploitation_cap"] = (
                0 if cap is None else rules.resolve_ceil(cap, n, minimum=1, lam=out["lambda"])
            )
        elif self.algorithm == "tpo-ga":
            out["p_c"] = float(p["p_c"])
        elif self.algorithm == "ollga":
            out["lambda"] = rules.resolve(p["lambda"], n, minimum=1)
            out["k"] = rules.resolve(p["k"], n, minimum=1)
        elif self.algorithm == "umda":
            out["lambda"] = rules.resolve(p["lambda"], n, minimum=1)
            out["mu"] = rules.resolve(p["mu"], n, minimum=1)
            if out["mu"] > out["lambda"]:
                raise ValueError(f"mu={out['mu']} exceeds lambda={out['lambda']}")
        return out


@dataclass
class RunResult:
    evaluations_used: int
    success: bool
    best_fitness: float
    trajectory: np.ndarray = field(repr=False, default_factory=lambda: np.zeros((0, 2)))
    phase_trace: PhaseTrace | None = field(repr=False, default=None)
    initial_distance: int | None = None


@dataclass(frozen=True)
class Population2:
    """The (2+1) population with cached fitness values."""

    x1: BitString
    x2: BitString
    f1: float
    f2: float

    @classmethod
    def evaluate(cls, f: FitnessFunction, x1: BitString, x2: BitString) -> Population2:
        return cls(x1, x2, f(x1), f(x2))

    def relabeled(self) -> Population2:
        """Same pair with ``f1 <= f2``."""
        if self.f1 <= self.f2:
            return self
        return Population2(self.x2, self.x1, self.f2, self.f1)


def select_population(
    x1: BitString, x2: BitString, y: BitString, f1: float, f2: float, fy: float, rng: RandomSource
) -> Population2:
    """Survivor selection of a diversity phase.

    Fitness first, Hamming distance second, remaining ties uniformly.
    """
    if f1 != f2:
        raise ValueError("select_population requires equally fit parents")
    drop = K.choose_drop(
        rng.generator, float(f1), float(f2), float(fy), hamming(x1, x2), hamming(x1, y), hamming(x2, y)
    )
    if drop == 0:
        return Population2(x2, y, f2, fy)
    if drop == 1:
        return Population2(x1, y, f1, fy)
    return Population2(x1, x2, f1, f2)


def _target(f: FitnessFunction, cfg: OptimizerConfig) -> float:
    if cfg.target is not None:
        return float(cfg.target)
    if f.known_optimum is not None:
        return float(f.known_optimum)
    return math.inf


def _finish(f: FitnessFunction, st: np.ndarray, traj: np.ndarray, trace=None) -> RunResult:
    used = int(st[K.EVALS])
    f.evaluation_count += used
    return RunResult(
        evaluations_used=used,
        success=bool(st[K.SUCCESS]),
        best_fitness=float(st[K.BEST]),
        trajectory=np.array(traj),
        phase_trace=trace,
        initial_distance=None if st[K.INIT_H] < 0 else int(st[K.INIT_H]),
    )


def _check_algorithm(cfg: OptimizerConfig, expected: str) -> None:
    if cfg.algorithm != expected:
        raise ValueError(f"config is for {cfg.algorithm}, not {expected}")


def _trace_mode(f: FitnessFunction, trace: bool) -> tuple[int, int]:
    if not trace:
        return 0, 1
    if f.name != "lo":
        raise ValueError("phase traces are defined for LeadingOnes only")
    return K.MODE_TRACE, 1 if f.dimension <= TRACE_STRIDE_ABOVE else 16


def _dega_a_raw(f: FitnessFunction, cfg: OptimizerConfig, rng: RandomSource, mode: int, every: int):
    p = cfg.resolved(f.dimension)
    st = K.new_state(p["budget"], _target(f, cfg))
    indptr, indices = f.csr
    out = K.run_dega_a(
        rng.generator, f.kind, f.dimension, indptr, indices, p["lambda"], p["exploitation_cap"],
        st, mode, every,
    )
    return st, out


def dega_a(f: FitnessFunction, cfg: OptimizerConfig, rng: RandomSource, *, trace: bool = False) -> RunResult:
    """(2+1)-DEGA: mutation while both points tie, biased crossover otherwise."""
    _check_algorithm(cfg, "dega-a")
    mode, every = _trace_mode(f, trace)
    st, (traj, rows, _, _) = _dega_a_raw(f, cfg, rng, mode, every)
    return _finish(f, st, traj, PhaseTrace(rows, f.dimension) if trace else None)


def _dega_prime(f, cfg, rng, trace, bb):
    mode, every = _trace_mode(f, trace)
    p = cfg.resolved(f.dimension)
    st = K.new_state(p["budget"], _target(f, cfg))
    indptr, indices = f.csr
    traj, rows = K.run_dega_prime(
        rng.generator, f.kind, f.dimension, indptr, indices, bb, st, mode, every
    )
    return _finish(f, st, traj, PhaseTrace(rows, f.dimension) if trace else None)


def dega_a_prime(
    f: FitnessFunction, cfg: OptimizerConfig, rng: RandomSource, *, trace: bool = False
) -> RunResult:
    """Variant A': mutation or uniform crossover with probability 1/2 each.

    An improving crossover ``y`` over the weaker point ``x'`` triggers up to
    ``ceil(h ln n)`` biased crossovers of bias ``1/h``, ``h = H(x', y)``.
    """
    _check_algorithm(cfg, "dega-a-prime")
    return _dega_prime(f, cfg, rng, trace, False)


def dega_a_bb(
    f: FitnessFunction, cfg: OptimizerConfig, rng: RandomSource, *, trace: bool = False
) -> RunResult:
    """Variant A_BB: A' with ``ceil(10 ln n)`` uniform crossovers shrinking ``y`` toward ``x'``."""
    _check_algorithm(cfg, "dega-a-bb")
    return _dega_prime(f, cfg, rng, trace, True)


def one_plus_one_ea(f: FitnessFunction, cfg: OptimizerConfig, rng: RandomSource) -> RunResult:
    _check_algorithm(cfg, "opo-ea")
    p = cfg.resolved(f.dimension)
    st = K.new_state(p["budget"], _target(f, cfg))
    indptr, indices = f.csr
    traj = K.run_one_plus_one(rng.generator, f.kind, f.dimension, indptr, indices, st)
    return _finish(f, st, traj)


def two_plus_one_ga(f: FitnessFunction, cfg: OptimizerConfig, rng: RandomSource) -> RunResult:
    """(2+1)-GA: crossover with probability p_c, then standard bit mutation."""
    _check_algorithm(cfg, "tpo-ga")
    p = cfg.resolved(f.dimension)
    st = K.new_state(p["budget"], _target(f, cfg))
    indptr, indices = f.csr
    traj = K.run_two_plus_one(rng.generator, f.kind, f.dimension, indptr, indices, p["p_c"], st)
    return _finish(f, st, traj)


def one_plus_lambda_lambda_ga(f: FitnessFunction, cfg: OptimizerConfig, rng: RandomSource) -> RunResult:
    _check_algorithm(cfg, "ollga")
    p = cfg.resolved(f.dimension)
    st = K.new_state(p["budget"], _target(f, cfg))
    indptr, indices = f.csr
    traj = K.run_ollga(
        rng.generator, f.kind, f.dimension, indptr, indices, p["lambda"], float(p["k"]), st
    )
    return _finish(f, st, traj)


def umda(
    f: FitnessFunction, cfg: OptimizerConfig, rng: RandomSource, *, frequencies: np.ndarray | None = None
) -> RunResult:
    """UMDA; pass ``frequencies`` (length n) to receive the final frequency vector."""
    _check_algorithm(cfg, "umda")
    p = cfg.resolved(f.dimension)
    st = K.new_state(p["budget"], _target(f, cfg))
    indptr, indices = f.csr
    freq = np.empty(f.dimension) if frequencies is None else frequencies
    traj = K.run_umda(
        rng.generator, f.kind, f.dimension, indptr, indices, p["lambda"], p["mu"], st, freq
    )
    return _finish(f, st, traj)


RUNNERS: dict[str, Callable[..., RunResult]] = {
    "dega-a": dega_a,
    "dega-a-prime": dega_a_prime,
    "dega-a-bb": dega_a_bb,
    "opo-ea": one_plus_one_ea,
    "tpo-ga": two_plus_one_ga,
    "ollga": one_plus_lambda_lambda_ga,
    "umda": umda,
}


def run(f: FitnessFunction, cfg: OptimizerConfig, rng: RandomSource, *, trace: bool = False) -> RunResult:
    """Dispatch on ``cfg.algorithm``."""
    runner = RUNNERS[cfg.algorithm]
    if trace:
        if cfg.algorithm not in DEGA_VARIANTS:
            raise ValueError("phase traces are available for the DEGA variants only")
        return runner(f, cfg, rng, trace=True)
    return runner(f, cfg, rng)
