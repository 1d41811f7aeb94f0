"""Shot-distribution defenses against result tampering.

Equal split spreads a fixed shot budget evenly over all backends and
stitches the histograms. Adaptive split first fingerprints every backend
with short probe runs (repeatability, inter-run TVD, PM against a voted
answer, confidence), then spends the remaining budget on the winner.
The user never needs ground truth: the probe's reference answer comes
from majority voting over per-cell top outcomes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

from .backend import BackendModel
from .circuit import Circuit
from .metrics import pm, stitch, top_outcome, tvd
from .qaoa import Graph, QaoaConfig, QaoaRunRecord, optimize
from .rng import derive_seed
from .simulator import Counts, execute, resolve_tamper


class DefenseError(ValueError):
    pass


class InsufficientShots(DefenseError):
    pass


@dataclass(frozen=True)
class SplitPlan:
    allocations: tuple[tuple[str, int], ...]
    probe_shots: int = 0
    probe_runs: int = 0

    @property
    def total(self) -> int:
        return sum(s for _, s in self.allocations)


@dataclass(frozen=True)
class ProbeRun:
    counts: Counts
    top: str
    confidence: float
    pm: float


@dataclass(frozen=True)
class BackendProbe:
    name: str
    runs: tuple[ProbeRun, ...]
    repeatable: bool  # same top outcome in every run
    mean_inter_run_tvd: float
    mean_pm: float
    mean_confidence: float


@dataclass(frozen=True)
class ProbeReport:
    backends: tuple[BackendProbe, ...]
    voted_answer: str
    probe_shots: int
    probe_runs: int

    def for_backend(self, name: str) -> BackendProbe:
        for bp in self.backends:
            if bp.name == name:
                return bp
        raise KeyError(name)


def _check_backends(backends: list[BackendModel]) -> None:
    names = [b.name for b in backends]
    if len(set(names)) != len(names):
        raise DefenseError(f"backend names must be unique: {names}")


def equal_split(
    backends: list[BackendModel], circuit: Circuit, shots: int, seed: int
) -> tuple[Counts, SplitPlan]:
    """Divide the budget evenly; remainder goes to the first backends."""
    _check_backends(backends)
    m = len(backends)
    if m < 2:
        raise DefenseError("equal split needs at least two backends")
    if shots < m:
        raise InsufficientShots(f"{shots} shots across {m} backends")
    base, extra = divmod(shots, m)
    allocations = []
    parts = []
    for i, backend in enumerate(backends):
        share = base + (1 if i < extra else 0)
        resolved = resolve_tamper(backend, circuit, seed)
        parts.append(execute(resolved, circuit, share, derive_seed(seed, "equal")))
        allocations.append((backend.name, share))
    return stitch(parts), SplitPlan(tuple(allocations))


def probe(
    backends: list[BackendModel],
    circuit: Circuit,
    k: int = 50,
    r: int = 2,
    seed: int = 0,
) -> ProbeReport:
    """Fingerprint every backend with r runs of k shots each."""
    _check_backends(backends)
    if k < 10:
        raise DefenseError("probe shots k must be >= 10")
    if r < 2:
        raise DefenseError("probe runs r must be >= 2")
    raw: dict[str, list[Counts]] = {}
    for backend in backends:
        resolved = resolve_tamper(backend, circuit, seed)
        raw[backend.name] = [
            execute(resolved, circuit, k, derive_seed(seed, "probe", j))
            for j in range(r)
        ]

    # majority vote over per-cell top outcomes; ties toward the outcome
    # with the largest summed count, then lexicographic
    tops = [top_outcome(c)[0] for runs in raw.values() for c in runs]
    summed = stitch([c for runs in raw.values() for c in runs])
    votes: dict[str, int] = {}
    for t in tops:
        votes[t] = votes.get(t, 0) + 1
    voted = min(votes, key=lambda s: (-votes[s], -summed.get(s, 0), s))

    probes = []
    for backend in backends:
        runs = []
        for counts in raw[backend.name]:
            top, conf = top_outcome(counts)
            runs.append(ProbeRun(counts, top, conf, pm(counts, voted)))
        pair_tvds = [
            tvd(a.counts, b.counts) for a, b in combinations(runs, 2)
        ]
        probes.append(
            BackendProbe(
                name=backend.name,
                runs=tuple(runs),
                repeatable=len({run.top for run in runs}) == 1,
                mean_inter_run_tvd=sum(pair_tvds) / len(pair_tvds),
                mean_pm=sum(run.pm for run in runs) / r,
                mean_confidence=sum(run.confidence for run in runs) / r,
            )
        )
    return ProbeReport(tuple(probes), voted, k, r)


#: default ranking criteria, most significant first
SELECTION_ORDER = ("repeatability", "tvd", "pm", "confidence")


def select_backend(report: ProbeReport, order: tuple[str, ...] | None = None) -> str:
    """Lexicographic ranking: repeatable-and-voted top, then lower TVD,
    higher PM, higher confidence, name.

    ``order`` reorders the first four criteria (harness-configurable);
    the backend name always breaks remaining ties.
    """
    if not report.backends:
        raise DefenseError("empty probe report")
    order = SELECTION_ORDER if order is None else tuple(order)
    if sorted(order) != sorted(SELECTION_ORDER):
        raise DefenseError(
            f"selection order must be a permutation of {SELECTION_ORDER}"
        )

    def key(bp: BackendProbe):
        converged = bp.repeatable and bp.runs[0].top == report.voted_answer
        parts = {
            "repeatability": 0 if converged else 1,
            "tvd": bp.mean_inter_run_tvd,
            "pm": -bp.mean_pm,
            "confidence": -bp.mean_confidence,
        }
        return tuple(parts[c] for c in order) + (bp.name,)

    return min(report.backends, key=key).name


def adaptive_split(
    backends: list[BackendModel],
    circuit: Circuit,
    shots: int,
    k: int = 50,
    r: int = 2,
    seed: int = 0,
    order: tuple[str, ...] | None = None,
) -> tuple[Counts, SplitPlan, ProbeReport]:
    """Probe, select, then spend the remaining budget on the winner.

    Probe counts from unselected backends are excluded from the final
    answer (they may be tampered) but stay in the report.
    """
    _check_backends(backends)
    m = len(backends)
    probe_cost = m * r * k
    if shots < probe_cost:
        raise InsufficientShots(
            f"budget {shots} cannot cover {probe_cost} probe shots"
        )
    report = probe(backends, circuit, k=k, r=r, seed=seed)
    winner = select_backend(report, order)
    remainder = shots - probe_cost
    selected = next(b for b in backends if b.name == winner)
    parts = [run.counts for run in report.for_backend(winner).runs]
    if remainder > 0:
        resolved = resolve_tamper(selected, circuit, seed)
        parts.append(
            execute(resolved, circuit, remainder, derive_seed(seed, "main"))
        )
    allocations = tuple(
        (b.name, r * k + (remainder if b.name == winner else 0)) for b in backends
    )
    return stitch(parts), SplitPlan(allocations, k, r), report


# --- hybrid (QAOA) variants -------------------------------------------------


@dataclass
class QaoaSplitRecord:
    phase_a: QaoaRunRecord
    phase_b: QaoaRunRecord
    ar: float
    cmax: int


@dataclass
class QaoaAdaptiveRecord:
    probe_ars: dict[str, tuple[float, ...]]
    selected: str
    final: QaoaRunRecord
    ar: float


def qaoa_iteration_split(
    backend_a: BackendModel,
    backend_b: BackendModel,
    graph: Graph,
    config: QaoaConfig,
    seed: int,
) -> QaoaSplitRecord:
    """Optimize half the iterations on A, hand the incumbent parameters to
    B for the other half. AR is the best expectation seen in either phase."""
    if config.iterations % 2 != 0:
        raise DefenseError("iteration split needs an even iteration budget")
    half = config.iterations // 2
    rec_a = optimize(
        backend_a, graph, config.p, half, config.shots_per_iter, seed
    )
    rec_b = optimize(
        backend_b,
        graph,
        config.p,
        half,
        config.shots_per_iter,
        derive_seed(seed, "phase-b"),
        init_params=rec_a.best_params,
    )
    best = max(rec_a.best_expectation, rec_b.best_expectation)
    return QaoaSplitRecord(rec_a, rec_b, best / rec_a.cmax, rec_a.cmax)


def qaoa_adaptive(
    backends: list[BackendModel],
    graph: Graph,
    config: QaoaConfig,
    probe_iterations: int = 5,
    probe_runs: int = 2,
    seed: int = 0,
) -> QaoaAdaptiveRecord:
    """Short probe optimizations on every backend; the one with the higher
    mean probe AR gets the remaining iteration budget."""
    _check_backends(backends)
    m = len(backends)
    probe_cost = m * probe_runs * probe_iterations
    if config.iterations <= probe_cost:
        raise InsufficientShots(
            f"iteration budget {config.iterations} cannot cover "
            f"{probe_cost} probe iterations"
        )
    probe_ars: dict[str, tuple[float, ...]] = {}
    best_probe: dict[str, QaoaRunRecord] = {}
    for backend in backends:
        records = [
            optimize(
                backend,
                graph,
                config.p,
                probe_iterations,
                config.shots_per_iter,
                derive_seed(seed, "qaoa-probe", j),
            )
            for j in range(probe_runs)
        ]
        probe_ars[backend.name] = tuple(rec.ar for rec in records)
        best_probe[backend.name] = max(records, key=lambda rec: rec.ar)
    selected = min(
        backends,
        key=lambda b: (-sum(probe_ars[b.name]) / probe_runs, b.name),
    )
    remaining = config.iterations - probe_cost
    final = optimize(
        selected,
        graph,
        config.p,
        remaining,
        config.shots_per_iter,
        derive_seed(seed, "qaoa-main"),
        init_params=best_probe[selected.name].best_params,
    )
    ar = max(final.ar, max(probe_ars[selected.name]))
    return QaoaAdaptiveRecord(probe_ars, selected.name, final, ar)
