"""Experiment driver: train/test splits, method registry and repetition loops."""
import logging
import math
from abc import ABC, abstractmethod
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Type, Union

import numpy as np

from core.config import load_mapping
from core.errors import InvalidInput
from core.fusion.hybrid import HybridModel, fit_hybrid, predict
from core.fusion.sections import (
    SectionedModel,
    SectioningMode,
    SectionPartition,
    fit_sectioned,
    predict_sectioned,
    rfid_midpoint,
)
from core.model.dataset import AXES, FingerprintDataset, FingerprintRecord, Position, read_fingerprint_csv
from core.penalty.base import PenaltyFunction
from core.penalty.loader import parse_penalty
from core.report.writer import EvalReport, RepetitionValue, aggregate
from core.simplex.projection import CoefficientVector
from core.solver.gpm import SolverConfig
from engines.rfsim.corridor import CorridorConfig, generate_corridor_dataset, observe_rfid_section

logger = logging.getLogger(__name__)

METRICS = ("mse", "mae")


@dataclass(frozen=True)
class MidpointModel:
    """Locates an object at the midpoint of the section its RFID tags report."""

    partition: SectionPartition


ModelLike = Union[HybridModel, SectionedModel, MidpointModel, Callable[[FingerprintRecord], Position]]


def record_predictor(model: ModelLike) -> Callable[[FingerprintRecord], Position]:
    """Turn a fitted model into a function of one fingerprint record.

    Models that need the RFID section observe it from the record's true position.
    """
    if isinstance(model, HybridModel):
        return lambda r: predict(model, r.estimates)
    if isinstance(model, SectionedModel):
        if model.sectioning_mode is SectioningMode.RFID_ORACLE:
            return lambda r: predict_sectioned(
                model, r.estimates, observe_rfid_section(model.partition, r.true_position)
            )
        return lambda r: predict_sectioned(model, r.estimates)
    if isinstance(model, MidpointModel):
        return lambda r: rfid_midpoint(model.partition, observe_rfid_section(model.partition, r.true_position))
    if callable(model):
        return model
    raise InvalidInput(f"Cannot predict with {type(model).__name__}")


def axis_errors(model: ModelLike, test: FingerprintDataset, axis: str = "x") -> np.ndarray:
    """Signed localization errors on one axis."""
    locate = record_predictor(model)
    return np.array([locate(r).coordinate(axis) - r.true_position.coordinate(axis) for r in test.records])


def evaluate(model: ModelLike, test: FingerprintDataset, metric: str = "mse", axis: str = "x") -> float:
    """Mean squared or mean absolute error of a model on ``test``.

    MAE uses the true absolute value even for models fitted with the
    |t|^(1+ε) penalty.

    Raises:
        InvalidInput: On an unknown metric
    """
    e = axis_errors(model, test, axis)
    if metric == "mse":
        return float(np.mean(e * e))
    if metric == "mae":
        return float(np.mean(np.abs(e)))
    raise InvalidInput(f"Unknown metric {metric!r}; use one of {METRICS}")


def split_train_test(
    dataset: FingerprintDataset, fraction: float, rng: np.random.Generator
) -> Tuple[FingerprintDataset, Optional[FingerprintDataset]]:
    """Random partition into ⌈fraction·M⌉ training and the remaining test records.

    The test part is None when every record goes to training (fraction 1).

    Raises:
        InvalidInput: If fraction is outside (0, 1] or the training part would be empty
    """
    if not 0.0 < fraction <= 1.0:
        raise InvalidInput(f"Split fraction must lie in (0, 1], got {fraction}")
    m = len(dataset)
    n_train = min(m, math.ceil(fraction * m - 1e-9))
    if n_train == 0:
        raise InvalidInput(f"Split fraction {fraction} leaves no training records out of {m}")

    order = rng.permutation(m)
    train = dataset.subset(sorted(int(i) for i in order[:n_train]))
    if n_train == m:
        return train, None
    return train, dataset.subset(sorted(int(i) for i in order[n_train:]))


@dataclass(frozen=True)
class MethodContext:
    penalty: PenaltyFunction
    solver: SolverConfig
    partition: SectionPartition


class Method(ABC):
    """A localization method evaluated by the experiment runner."""

    # Methods whose result depends on the number of sections are run once per S
    sectioned: bool = False

    @abstractmethod
    def fit(self, train: FingerprintDataset, ctx: MethodContext) -> ModelLike:
        """Fit on the training records and return something :func:`evaluate` accepts."""


class GlobalMethod(Method):
    def fit(self, train: FingerprintDataset, ctx: MethodContext) -> ModelLike:
        return fit_hybrid(train, ctx.penalty, ctx.solver)


class TwoLevelMethod(Method):
    sectioned = True

    def fit(self, train: FingerprintDataset, ctx: MethodContext) -> ModelLike:
        return fit_sectioned(train, ctx.partition, ctx.penalty, ctx.solver, SectioningMode.TWO_LEVEL)


class RfidOracleMethod(Method):
    sectioned = True

    def fit(self, train: FingerprintDataset, ctx: MethodContext) -> ModelLike:
        return fit_sectioned(train, ctx.partition, ctx.penalty, ctx.solver, SectioningMode.RFID_ORACLE)


class RfidMidpointMethod(Method):
    sectioned = True

    def fit(self, train: FingerprintDataset, ctx: MethodContext) -> ModelLike:
        return MidpointModel(ctx.partition)


class IndividualMethod(Method):
    """A single technology's own estimate (unit weight vector)."""

    def __init__(self, technology: str):
        self.technology = technology

    def fit(self, train: FingerprintDataset, ctx: MethodContext) -> ModelLike:
        index = train.technology_index(self.technology)
        unit = CoefficientVector.unit(train.n_technologies, index)
        return HybridModel(train.technologies, ctx.penalty, {axis: unit for axis in AXES})


# Registry of methods by name; "individual:<tech>" is resolved separately
_METHOD_REGISTRY: Dict[str, Type[Method]] = {
    "global": GlobalMethod,
    "two_level": TwoLevelMethod,
    "rfid_oracle": RfidOracleMethod,
    "rfid_midpoint": RfidMidpointMethod,
}


def register_method(name: str, method_class: Type[Method]) -> None:
    """Register a method under ``name``.

    Registrations happen per process; with ``workers > 1`` register at import
    time of a module the workers also import.

    Args:
        name: Method name used in experiment configs
        method_class: Method subclass with a no-argument constructor
    """
    if name == "individual" or name.startswith("individual:"):
        raise InvalidInput(f"Method name {name!r} is reserved")
    _METHOD_REGISTRY[name] = method_class
    logger.debug(f"Registered method {method_class.__name__} as {name}")


def available_methods() -> List[str]:
    return sorted(_METHOD_REGISTRY) + ["individual", "individual:<tech>"]


def resolve_methods(names: Sequence[str], technologies: Sequence[str]) -> List[Tuple[str, Method]]:
    """Instantiate methods by name; ``individual`` expands to every technology.

    Raises:
        InvalidInput: On an unknown method or technology
    """
    resolved: List[Tuple[str, Method]] = []
    for name in names:
        if name == "individual":
            resolved.extend((f"individual:{t}", IndividualMethod(t)) for t in technologies)
        elif name.startswith("individual:"):
            tech = name.split(":", 1)[1]
            if tech not in technologies:
                raise InvalidInput(f"Unknown technology {tech!r} in method {name!r}; have {list(technologies)}")
            resolved.append((name, IndividualMethod(tech)))
        elif name in _METHOD_REGISTRY:
            resolved.append((name, _METHOD_REGISTRY[name]()))
        else:
            raise InvalidInput(f"Unknown method {name!r}; known: {available_methods()}")
    return resolved


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: data source, methods, protocol and seed.

    Exactly one of ``dataset_path`` and ``corridor`` is set; with neither the
    default simulated corridor is used.

    Attributes:
        sections: Numbers of sections S to run sectioned methods with
        split_fraction: Training share; 1.0 evaluates on the training data
        distance_ranges: Extra rows restricted to test points with true x ≤ R
        resimulate: Simulate a fresh corridor each repetition (seed corridor.rng_seed + r)
        corridor_length: Partition length; defaults to the corridor length or the largest true x
        workers: Processes running repetitions; results do not depend on it
    """

    dataset_path: Optional[str] = None
    corridor: Optional[CorridorConfig] = None
    penalty: str = "p2"
    sections: Tuple[int, ...] = (1,)
    methods: Tuple[str, ...] = ("global",)
    split_fraction: float = 0.7
    repetitions: int = 1000
    metric: str = "mse"
    seed: int = 7
    distance_ranges: Tuple[float, ...] = ()
    resimulate: bool = False
    corridor_length: Optional[float] = None
    workers: int = 1
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(record_trace=False))

    def __post_init__(self) -> None:
        object.__setattr__(self, "sections", tuple(int(s) for s in self.sections))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "distance_ranges", tuple(float(r) for r in self.distance_ranges))
        if self.dataset_path and self.corridor:
            raise InvalidInput("Give either a dataset file or a corridor simulation, not both")
        if self.corridor is None and not self.dataset_path:
            object.__setattr__(self, "corridor", CorridorConfig())
        if self.resimulate and self.corridor is None:
            raise InvalidInput("resimulate needs a corridor simulation as data source")
        if not 0.0 < self.split_fraction <= 1.0:
            raise InvalidInput(f"split_fraction must lie in (0, 1], got {self.split_fraction}")
        if self.repetitions < 1:
            raise InvalidInput(f"repetitions must be at least 1, got {self.repetitions}")
        if not self.sections or min(self.sections) < 1:
            raise InvalidInput(f"Section counts must be at least 1, got {self.sections}")
        if not self.methods:
            raise InvalidInput("No methods configured")
        if self.metric not in METRICS:
            raise InvalidInput(f"Unknown metric {self.metric!r}; use one of {METRICS}")
        if self.seed < 0:
            raise InvalidInput(f"seed must be non-negative, got {self.seed}")
        if self.workers < 1:
            raise InvalidInput(f"workers must be at least 1, got {self.workers}")
        if self.corridor_length is not None and not self.corridor_length > 0:
            raise InvalidInput(f"corridor_length must be positive, got {self.corridor_length}")
        parse_penalty(self.penalty)

    @classmethod
    def from_mapping(cls, values: Dict[str, Any], **overrides: Any) -> "ExperimentConfig":
        """Build from an experiment file mapping.

        ``mode`` is accepted as a single-method alias of ``methods`` and
        ``sections`` may be a number or a list.
        """
        merged = {**values, **{k: v for k, v in overrides.items() if v is not None}}
        methods = merged.get("methods", merged.get("mode", ["global"]))
        sections = merged.get("sections", [1])
        corridor = merged.get("corridor")
        return cls(
            dataset_path=merged.get("dataset_path"),
            corridor=CorridorConfig.from_mapping(corridor) if isinstance(corridor, dict) else None,
            penalty=str(merged.get("penalty", "p2")),
            sections=tuple(sections) if isinstance(sections, (list, tuple)) else (int(sections),),
            methods=tuple(methods) if isinstance(methods, (list, tuple)) else (str(methods),),
            split_fraction=float(merged.get("split_fraction", 0.7)),
            repetitions=int(merged.get("repetitions", 1000)),
            metric=str(merged.get("metric", "mse")),
            seed=int(merged.get("seed", 7)),
            distance_ranges=tuple(merged.get("distance_ranges", ())),
            resimulate=bool(merged.get("resimulate", False)),
            corridor_length=merged.get("corridor_length"),
            workers=int(merged.get("workers", 1)),
            solver=SolverConfig.from_mapping(merged.get("solver", {}), record_trace=False),
        )

    @classmethod
    def from_file(cls, path: str, **overrides: Any) -> "ExperimentConfig":
        return cls.from_mapping(load_mapping(path), **overrides)


def load_dataset(cfg: ExperimentConfig, repetition: int = 0) -> FingerprintDataset:
    """Dataset of one repetition: the file, the corridor, or a reseeded corridor."""
    if cfg.dataset_path:
        return read_fingerprint_csv(cfg.dataset_path)
    corridor = cfg.corridor
    if cfg.resimulate:
        corridor = replace(corridor, rng_seed=corridor.rng_seed + repetition)
    return generate_corridor_dataset(corridor)


def _partition_length(cfg: ExperimentConfig, dataset: FingerprintDataset) -> float:
    if cfg.corridor_length is not None:
        return cfg.corridor_length
    if cfg.corridor is not None:
        return cfg.corridor.length
    return max(r.true_position.x for r in dataset.records)


def repetition_rng(seed: int, repetition: int) -> np.random.Generator:
    """Split stream of one repetition."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(repetition,)))


def _x_alpha(model: ModelLike) -> Tuple[Tuple[float, ...], ...]:
    if isinstance(model, HybridModel):
        return (tuple(model.alpha("x").as_list()),)
    if isinstance(model, SectionedModel):
        return tuple(tuple(m.alpha("x").as_list()) for m in model.per_section_models)
    return ()


def _flags(model: ModelLike) -> Tuple[str, ...]:
    if isinstance(model, SectionedModel):
        return model.flags + tuple(f for f in model.global_model.flags if f not in model.flags)
    if isinstance(model, HybridModel):
        return model.flags
    return ()


def _run_repetition(
    args: Tuple[ExperimentConfig, int, Optional[FingerprintDataset]],
) -> Tuple[List[RepetitionValue], Dict[Tuple[str, int], dict]]:
    cfg, rep, shared = args
    dataset = shared if shared is not None else load_dataset(cfg, rep)
    train, test = split_train_test(dataset, cfg.split_fraction, repetition_rng(cfg.seed, rep))
    test = test if test is not None else train
    penalty = parse_penalty(cfg.penalty)
    length = _partition_length(cfg, dataset)

    values: List[RepetitionValue] = []
    details: Dict[Tuple[str, int], dict] = {}
    for name, method in resolve_methods(cfg.methods, dataset.technologies):
        for s in cfg.sections if method.sectioned else (1,):
            ctx = MethodContext(penalty, cfg.solver, SectionPartition.uniform(length, s))
            model = method.fit(train, ctx)
            values.append(RepetitionValue(rep, name, s, evaluate(model, test, cfg.metric)))
            details[(name, s)] = {"flags": _flags(model), "alpha": _x_alpha(model)}
            for limit in cfg.distance_ranges:
                subset = test.filter(lambda r: r.true_position.x <= limit)
                value = math.nan if subset is None else evaluate(model, subset, cfg.metric)
                label = f"{name}@x<={limit:g}"
                values.append(RepetitionValue(rep, label, s, value))
                details[(label, s)] = details[(name, s)]
    logger.debug(f"Repetition {rep}: {len(train)} train / {len(test)} test records")
    return values, details


def run_experiment(cfg: ExperimentConfig) -> EvalReport:
    """Run every repetition and average the metric per method and section count.

    Repetition r draws its split from ``SeedSequence(seed, spawn_key=(r,))`` so
    the report is identical for any number of workers. Flags and weights in
    the report come from the final repetition.

    Raises:
        InvalidInput: On an invalid dataset or method configuration
        NumericalFailure: Propagated from the solver
    """
    shared = None if cfg.resimulate else load_dataset(cfg)
    if shared is not None:
        resolve_methods(cfg.methods, shared.technologies)

    logger.info(
        f"Running {cfg.repetitions} repetition(s) of {', '.join(cfg.methods)} "
        f"(sections {list(cfg.sections)}, split {cfg.split_fraction}, metric {cfg.metric}, seed {cfg.seed})"
    )
    jobs = [(cfg, rep, shared) for rep in range(cfg.repetitions)]
    if cfg.workers > 1 and cfg.repetitions > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
            results = list(executor.map(_run_repetition, jobs, chunksize=max(1, cfg.repetitions // (4 * cfg.workers))))
    else:
        results = [_run_repetition(job) for job in jobs]

    values: List[RepetitionValue] = []
    for rep_values, _ in results:
        values.extend(rep_values)
    report = aggregate(cfg.metric, values, results[-1][1])
    logger.info(f"Experiment finished: {len(report.rows)} report row(s)")
    return report
