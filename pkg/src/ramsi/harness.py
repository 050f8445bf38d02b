"""Monte Carlo sweeps, scenario files and result serialization.

A sweep draws, per trial, a fresh source, side information ensemble and
sensing matrix from seeds derived from ``(base_seed, trial)``. Every policy
and every ``m`` in a trial shares that instance; the sensing matrix for a
smaller ``m`` is a row prefix of the one for a larger ``m``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .bounds import bound_l1, bound_l1l1, bound_nl1
from .core import SolverConfig, generate_sensing_matrix
from .errors import ArgumentError, ParseError, RamsiError
from .solver import WeightPolicy, ramsi
from .synth import ScenarioSpec, generate_scenario

TIMESTAMP_FIELD = "generated_at"


@dataclass(frozen=True)
class PolicyChoice:
    """A weight policy together with how many side information signals it sees."""

    policy: WeightPolicy
    J: int

    def __post_init__(self):
        if self.J < 0:
            raise ArgumentError(f"J must be >= 0, got {self.J}")
        if self.policy is WeightPolicy.FIXED_L1L1 and self.J < 1:
            raise ArgumentError("the l1-l1 policy needs J >= 1")

    @property
    def label(self) -> str:
        if self.policy is WeightPolicy.FIXED_L1:
            return "l1"
        return f"{self.policy.value}-J{self.J}"

    @classmethod
    def parse(cls, text: str, default_J: int = 1) -> "PolicyChoice":
        """``adaptive:3``, ``l1`` or ``l1l1`` (J defaults per policy)."""
        name, _, j = text.partition(":")
        try:
            policy = WeightPolicy(name.strip().lower())
        except ValueError:
            raise ArgumentError(f"unknown policy {name!r}; use adaptive, l1 or l1l1") from None
        if policy is WeightPolicy.FIXED_L1:
            return cls(policy, 0)
        if not j:
            return cls(policy, 1 if policy is WeightPolicy.FIXED_L1L1 else default_J)
        try:
            return cls(policy, int(j))
        except ValueError:
            raise ArgumentError(f"bad J in policy {text!r}") from None


@dataclass(frozen=True)
class SweepSpec:
    scenario: ScenarioSpec
    m_values: Tuple[int, ...]
    trials: int = 20
    policies: Tuple[PolicyChoice, ...] = (PolicyChoice(WeightPolicy.ADAPTIVE, 1),)
    success_threshold: float = 1e-2
    base_seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        object.__setattr__(self, "policies", tuple(self.policies))
        if self.trials < 1:
            raise ArgumentError(f"trials must be >= 1, got {self.trials}")
        if not self.m_values:
            raise ArgumentError("m_values is empty")
        if list(self.m_values) != sorted(self.m_values):
            raise ArgumentError("m_values must be sorted ascending")
        if not all(0 < m <= self.scenario.n for m in self.m_values):
            raise ArgumentError(f"every m must lie in 1..{self.scenario.n}")
        if not self.policies:
            raise ArgumentError("no policies given")
        for pc in self.policies:
            if pc.J > self.scenario.J:
                raise ArgumentError(f"policy {pc.label} needs {pc.J} signals, scenario has {self.scenario.J}")
        if not self.success_threshold > 0:
            raise ArgumentError("success_threshold must be positive")

    def echo(self) -> dict:
        sc = self.scenario
        return {
            "scenario": {"n": sc.n, "s0": sc.s0, "sj": list(sc.sj), "rj": list(sc.rj),
                         "diff_scale": sc.diff_scale},
            "m_values": list(self.m_values),
            "trials": self.trials,
            "policies": [pc.label for pc in self.policies],
            "success_threshold": self.success_threshold,
            "base_seed": self.base_seed,
            "solver": asdict(self.solver),
        }


@dataclass
class PointResult:
    policy: str
    J: int
    m: int
    trials: int
    successes: int
    success_rate: float
    mean_rel_error: float
    mean_iters: float


@dataclass
class SweepResult:
    spec: SweepSpec
    points: List[PointResult]
    bound_values: Dict[str, float]

    def point(self, label: str, m: int) -> PointResult:
        for p in self.points:
            if p.policy == label and p.m == m:
                return p
        raise KeyError((label, m))

    def rates(self, label: str) -> List[float]:
        return [p.success_rate for p in self.points if p.policy == label]

    def to_json(self, timestamp: bool = True) -> str:
        doc = {"config": self.spec.echo(),
               "results": [asdict(p) for p in self.points],
               "bounds": {k: _finite_or_none(v) for k, v in self.bound_values.items()}}
        if timestamp:
            doc[TIMESTAMP_FIELD] = datetime.now(timezone.utc).isoformat()
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["policy", "J", "m", "trials", "successes", "success_rate",
                    "mean_rel_error", "mean_iters", "bound"])
        for p in self.points:
            w.writerow([p.policy, p.J, p.m, p.trials, p.successes, repr(p.success_rate),
                        repr(p.mean_rel_error), repr(p.mean_iters),
                        repr(self.bound_values.get(p.policy, math.nan))])
        return buf.getvalue()


def _finite_or_none(v):
    return v if math.isfinite(v) else None


def trial_seeds(base_seed: int, trial: int) -> Tuple[int, int]:
    """(scenario seed, sensing matrix seed) for one trial."""
    state = np.random.SeedSequence([int(base_seed), int(trial)]).generate_state(2, np.uint64)
    return int(state[0]), int(state[1])


def instance_bounds(x, ens, pc: PolicyChoice, epsilon: float) -> float:
    n = x.size
    s0 = int(np.count_nonzero(x))
    if pc.policy is WeightPolicy.FIXED_L1:
        return bound_l1(n, s0) if 0 < s0 < n else math.nan
    if pc.policy is WeightPolicy.FIXED_L1L1:
        return bound_l1l1(x, ens[0])
    return bound_nl1(x, ens[:pc.J], epsilon).m_bound


def _run_trial(spec: SweepSpec, trial: int):
    sc_seed, phi_seed = trial_seeds(spec.base_seed, trial)
    x, ens = generate_scenario(replace(spec.scenario, seed=sc_seed))
    n = x.size
    norm_x = float(np.linalg.norm(x))
    records = []
    for m in spec.m_values:
        A = generate_sensing_matrix(phi_seed, m, n)
        y = A.entries @ x
        for pc in spec.policies:
            where = f"trial {trial}, policy {pc.label}, m={m}"
            try:
                xh, trace = ramsi(y, A, ens[:pc.J], spec.solver, pc.policy)
            except RamsiError as exc:
                exc.args = (f"{where}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
                raise
            err = float(np.linalg.norm(xh - x)) / norm_x
            records.append((pc.label, m, err, trace.iterations))
    bounds = {pc.label: instance_bounds(x, ens, pc, spec.solver.epsilon) for pc in spec.policies}
    return trial, records, bounds


def _run_trial_star(args):
    return _run_trial(*args)


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Success rates per (policy, m) and per-policy bounds averaged over trials."""
    jobs = [(spec, t) for t in range(spec.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_run_trial_star, jobs))
    else:
        outputs = [_run_trial(*job) for job in jobs]
    outputs.sort(key=lambda o: o[0])

    errs: Dict[Tuple[str, int], List[float]] = {}
    iters: Dict[Tuple[str, int], List[int]] = {}
    bound_sums: Dict[str, List[float]] = {pc.label: [] for pc in spec.policies}
    for _, records, bounds in outputs:
        for label, m, err, k in records:
            errs.setdefault((label, m), []).append(err)
            iters.setdefault((label, m), []).append(k)
        for label, b in bounds.items():
            bound_sums[label].append(b)

    points = []
    for pc in spec.policies:
        for m in spec.m_values:
            e = errs[(pc.label, m)]
            wins = sum(1 for v in e if v <= spec.success_threshold)
            points.append(PointResult(
                policy=pc.label, J=pc.J, m=m, trials=spec.trials, successes=wins,
                success_rate=wins / spec.trials, mean_rel_error=float(np.mean(e)),
                mean_iters=float(np.mean(iters[(pc.label, m)])),
            ))
    bounds = {label: float(np.mean(v)) for label, v in bound_sums.items()}
    return SweepResult(spec=spec, points=points, bound_values=bounds)


@dataclass
class QualityRow:
    policy: str
    sj: int
    rj: int
    m_required: int


def default_rj(s0: int, sj: int, n: int) -> int:
    """On-support share of the difference support used by quality sweeps.

    Matches the 51/64 ratio of the good side information scenario, clipped to
    what the counts allow.
    """
    r = min(s0, sj, int(round(0.8 * sj)))
    return max(r, sj - (n - s0))


def run_quality_sweep(
    n: int,
    s0: int,
    J: int,
    sj_values: Sequence[int],
    m_grid: Sequence[int],
    policies: Sequence[PolicyChoice],
    trials: int = 20,
    target: float = 0.98,
    base_seed: int = 0,
    solver: Optional[SolverConfig] = None,
    success_threshold: float = 1e-2,
    workers: int = 1,
) -> List[QualityRow]:
    """Smallest grid ``m`` whose success rate reaches ``target``, per (policy, s_j).

    Binary search over the sorted grid, assuming success grows with ``m``.
    ``n + 1`` marks a target that no grid value reaches.
    """
    grid = sorted(int(m) for m in m_grid)
    if not grid:
        raise ArgumentError("m grid is empty")
    if not 0 < target <= 1:
        raise ArgumentError(f"target must be in (0, 1], got {target}")
    solver = solver or SolverConfig()
    rows = []
    for sj in sj_values:
        rj = default_rj(s0, sj, n)
        scenario = ScenarioSpec.uniform(n, s0, sj, rj, J)
        for pc in policies:
            cache: Dict[int, float] = {}

            def rate(m):
                if m not in cache:
                    spec = SweepSpec(scenario=scenario, m_values=(m,), trials=trials, policies=(pc,),
                                     success_threshold=success_threshold, base_seed=base_seed,
                                     solver=solver)
                    cache[m] = run_sweep(spec, workers).points[0].success_rate
                return cache[m]

            lo, hi = 0, len(grid)
            while lo < hi:
                mid = (lo + hi) // 2
                if rate(grid[mid]) >= target:
                    hi = mid
                else:
                    lo = mid + 1
            rows.append(QualityRow(policy=pc.label, sj=int(sj), rj=rj,
                                   m_required=grid[lo] if lo < len(grid) else n + 1))
    return rows


def quality_rows_csv(rows: Iterable[QualityRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["policy", "sj", "rj", "m_required"])
    for r in rows:
        w.writerow([r.policy, r.sj, r.rj, r.m_required])
    return buf.getvalue()


def scenario_csv(x, ensemble) -> str:
    """One row per index: x then z_1..z_J, with a header; floats round-trip exactly."""
    x = np.asarray(x, dtype=np.float64)
    ens = np.asarray(ensemble, dtype=np.float64).reshape(-1, x.size)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x"] + [f"z{j}" for j in range(1, ens.shape[0] + 1)])
    for i in range(x.size):
        w.writerow([repr(float(x[i]))] + [repr(float(v)) for v in ens[:, i]])
    return buf.getvalue()


def write_scenario_csv(path, x, ensemble) -> None:
    Path(path).write_text(scenario_csv(x, ensemble), encoding="utf-8")


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def ingest_vectors(path) -> Tuple[np.ndarray, np.ndarray]:
    """Read ``x`` and the side information from a scenario CSV.

    Column 0 is x, columns 1..J are z_1..z_J. A header row ``x,z1,...`` is
    optional. Rows and columns in error messages are 1-based file positions.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    rows = [(k, row) for k, row in enumerate(csv.reader(io.StringIO(text)), start=1) if row]
    if not rows:
        raise ParseError(f"{path} is empty")

    first_no, first = rows[0]
    if not _is_number(first[0].strip()):
        expected = ["x"] + [f"z{j}" for j in range(1, len(first))]
        names = [c.strip().lower() for c in first]
        if names != expected:
            raise ParseError(f"header must read {','.join(expected)}, got {','.join(first)}", row=first_no)
        rows = rows[1:]
        if not rows:
            raise ParseError(f"{path} has a header but no data")

    width = len(rows[0][1])
    values = np.empty((len(rows), width))
    for r, (row_no, row) in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"expected {width} columns, found {len(row)}", row=row_no)
        for c, cell in enumerate(row):
            try:
                v = float(cell.strip())
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", row=row_no, column=c + 1) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite value {cell!r}", row=row_no, column=c + 1)
            values[r, c] = v
    return values[:, 0].copy(), values[:, 1:].T.copy()


def strip_timestamp(doc: str) -> str:
    """JSON text with the timestamp field removed, for reproducibility checks."""
    data = json.loads(doc)
    data.pop(TIMESTAMP_FIELD, None)
    return json.dumps(data, indent=2, sort_keys=True)
