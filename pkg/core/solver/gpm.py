"""Gradient projection method with a certified constant step.

Iterates α^{k+1} = P[α^k - β ∇f(α^k)] from the uniform vector, where P is the
Euclidean projection onto the simplex and β lies in (0, 2/(N L_max)). In that
window f(α^k) is non-increasing and the displacement contracts by
q = max{|1 - βN l_min|, |1 - βN L_max|} per step under the curvature bounds.
"""
import csv
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from core.errors import InvalidInput, NumericalFailure
from core.penalty.curvature import CurvatureBounds, curvature_bounds
from core.simplex.projection import CoefficientVector, project_array
from core.solver.objective import AxisObjective

logger = logging.getLogger(__name__)

MIN_ITERATIONS_CAP = 100_000
DESCENT_SLACK = 1e-12


class StopReason(str, Enum):
    TOLERANCE = "tolerance"
    ITERATE_FIXED = "iterate_fixed"
    MAX_ITER = "max_iter"


@dataclass(frozen=True)
class SolverConfig:
    """Settings of :func:`solve_gpm`.

    Attributes:
        beta: Step size in (0, 2/(N L_max)), or "auto" for half the window
        eps_opt: Stop once ||α^{k+1} - α^k||₂ drops below this
        max_iter: Iteration cap; None means max(10·k_bound, 10⁵)
        record_trace: Keep every iterate in the trace (otherwise only the last)
        iteration_ceiling: Hard cap on the computed max_iter
    """

    beta: Union[float, str, None] = "auto"
    eps_opt: float = 1e-10
    max_iter: Optional[int] = None
    record_trace: bool = True
    iteration_ceiling: int = 10_000_000

    def __post_init__(self) -> None:
        if not self.eps_opt > 0:
            raise InvalidInput(f"eps_opt must be positive, got {self.eps_opt}")
        if self.max_iter is not None and self.max_iter < 0:
            raise InvalidInput(f"max_iter must be non-negative, got {self.max_iter}")
        if self.iteration_ceiling < 1:
            raise InvalidInput(f"iteration_ceiling must be positive, got {self.iteration_ceiling}")

    @classmethod
    def from_mapping(cls, values: Dict[str, Any], **overrides: Any) -> "SolverConfig":
        """Build from the ``solver`` config section; unknown keys are ignored."""
        merged = {**values, **{k: v for k, v in overrides.items() if v is not None}}
        kwargs = {k: merged[k] for k in ("beta", "eps_opt", "max_iter", "record_trace", "iteration_ceiling") if k in merged}
        if "eps_opt" in kwargs:
            kwargs["eps_opt"] = float(kwargs["eps_opt"])
        if kwargs.get("max_iter") is not None:
            kwargs["max_iter"] = int(kwargs["max_iter"])
        if "iteration_ceiling" in kwargs:
            kwargs["iteration_ceiling"] = int(kwargs["iteration_ceiling"])
        return cls(**kwargs)


@dataclass(frozen=True)
class TraceEntry:
    k: int
    alpha: np.ndarray
    f: float


@dataclass
class SolverTrace:
    """Record of one solve.

    ``step_ratios`` holds the empirical ||α^{k+1} - α^k|| / ||α^k - α^{k-1}||
    for comparison with ``q``.
    """

    iterates: List[TraceEntry]
    beta: float
    q: float
    k_bound: Optional[int]
    stop_reason: StopReason
    iterations: int
    step_ratios: List[float] = field(default_factory=list)
    curvature: Optional[CurvatureBounds] = None
    flags: Tuple[str, ...] = ()

    @property
    def final(self) -> TraceEntry:
        return self.iterates[-1]

    def objective_values(self) -> np.ndarray:
        return np.array([entry.f for entry in self.iterates])

    def is_monotone(self, slack: float = DESCENT_SLACK) -> bool:
        f = self.objective_values()
        return bool(np.all(f[1:] <= f[:-1] + slack * np.maximum(1.0, np.abs(f[:-1]))))


def iteration_bound(q: float, n: int, eps: float) -> int:
    """Iterations after which q^k √(1 - 1/N) falls below ``eps``.

    Raises:
        InvalidInput: If q is not in (0, 1), eps is not positive or n < 1
    """
    if not 0.0 < q < 1.0:
        raise InvalidInput(f"Contraction constant must lie in (0, 1), got {q}")
    if not eps > 0:
        raise InvalidInput(f"Tolerance must be positive, got {eps}")
    if n < 1:
        raise InvalidInput(f"Need at least one technology, got {n}")

    ratio = math.sqrt(1.0 - 1.0 / n) / eps
    if ratio <= 1.0:
        return 0
    # The small offset keeps exact powers (ratio = q^-k) from rounding up
    return max(0, math.ceil(math.log(ratio) / math.log(1.0 / q) - 1e-9))


def _k_bound(q: float, n: int, eps: float) -> Optional[int]:
    if q <= 0.0:
        return 1
    if q >= 1.0:
        return None
    return iteration_bound(q, n, eps)


def _max_iterations(cfg: SolverConfig, k_bound: Optional[int]) -> int:
    if cfg.max_iter is not None:
        return cfg.max_iter
    if k_bound is None:
        return cfg.iteration_ceiling
    return min(max(10 * k_bound, MIN_ITERATIONS_CAP), cfg.iteration_ceiling)


def solve_gpm(obj: AxisObjective, cfg: Optional[SolverConfig] = None) -> Tuple[CoefficientVector, SolverTrace]:
    """Minimize one axis objective over the simplex.

    Args:
        obj: Axis objective with a full-column-rank matrix
        cfg: Solver settings; defaults to :class:`SolverConfig`

    Returns:
        Final iterate and the solve trace

    Raises:
        InvalidInput: If an explicit step is outside the certified window
        DegenerateInput: If a technology column is identically zero
        NumericalFailure: If the objective becomes non-finite
    """
    cfg = cfg or SolverConfig()
    n = obj.n_technologies
    m = obj.matrix.n_fingerprints

    if n == 1 or m == 0:
        alpha = CoefficientVector.uniform(n)
        f = obj.value(alpha) if m else 0.0
        flags = () if m else ("empty_axis",)
        trace = SolverTrace([TraceEntry(0, alpha.weights, f)], 0.0, 0.0, 0, StopReason.ITERATE_FIXED, 0, flags=flags)
        return alpha, trace

    bounds = curvature_bounds(obj.penalty, obj.matrix, cfg.beta)
    beta = bounds.beta
    k_bound = _k_bound(bounds.q, n, cfg.eps_opt)
    max_iter = _max_iterations(cfg, k_bound)

    u = obj.matrix.entries
    ut = u.T
    truth = obj.matrix.truth
    penalty = obj.penalty

    alpha = np.full(n, 1.0 / n)
    residual = u @ alpha - truth
    f = float(np.sum(penalty.value(residual)))
    if not math.isfinite(f):
        raise NumericalFailure(f"Axis {obj.matrix.axis}: objective is not finite at the uniform start")

    iterates = [TraceEntry(0, alpha, f)]
    ratios: List[float] = []
    previous_step = 0.0
    violations = 0
    stop = StopReason.MAX_ITER
    k = 0

    while k < max_iter:
        grad = ut @ penalty.first_derivative(residual)
        candidate = project_array(alpha - beta * grad)
        residual = u @ candidate - truth
        f_next = float(np.sum(penalty.value(residual)))
        if not math.isfinite(f_next):
            raise NumericalFailure(f"Axis {obj.matrix.axis}: objective became non-finite at iteration {k + 1}")

        k += 1
        step = float(np.linalg.norm(candidate - alpha))
        if previous_step > 0.0:
            ratios.append(step / previous_step)
        previous_step = step
        if f_next > f + DESCENT_SLACK * max(1.0, abs(f)):
            violations += 1
        fixed = np.array_equal(candidate, alpha)

        alpha, f = candidate, f_next
        if cfg.record_trace:
            iterates.append(TraceEntry(k, alpha, f))
        if fixed:
            stop = StopReason.ITERATE_FIXED
            break
        if step < cfg.eps_opt:
            stop = StopReason.TOLERANCE
            break

    if not cfg.record_trace and k > 0:
        iterates.append(TraceEntry(k, alpha, f))

    flags: List[str] = []
    if bounds.clamp_applied:
        flags.append("clamp_applied")
    if violations:
        flags.append(f"descent_violations={violations}")
        logger.warning(
            f"Axis {obj.matrix.axis}: objective rose on {violations} step(s); "
            f"curvature bounds do not hold for {penalty.spec} on this data"
        )
    if stop is StopReason.MAX_ITER:
        logger.warning(f"Axis {obj.matrix.axis}: stopped at max_iter={max_iter} before reaching eps_opt={cfg.eps_opt}")

    logger.debug(
        f"Axis {obj.matrix.axis}: {k} iteration(s), stop={stop.value}, f={f:.10g}, "
        f"k_bound={k_bound}, q={bounds.q:.6g}"
    )
    trace = SolverTrace(iterates, beta, bounds.q, k_bound, stop, k, ratios, bounds, tuple(flags))
    return CoefficientVector(alpha), trace


def write_trace_csv(trace: SolverTrace, path: str) -> None:
    """Export a trace as ``k,f,alpha_1..alpha_N`` rows.

    Raises:
        IOError: If the file cannot be written
    """
    out = Path(path)
    n = trace.final.alpha.size
    try:
        with open(out, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["k", "f"] + [f"alpha_{i + 1}" for i in range(n)])
            for entry in trace.iterates:
                writer.writerow([entry.k, repr(entry.f)] + [repr(float(a)) for a in entry.alpha])
        logger.info(f"Trace with {len(trace.iterates)} iterate(s) written to {out}")
    except IOError as e:
        logger.error(f"Failed to write trace {out}: {e}")
        raise
