"""Dense statevector execution, readout-noise channels and seeded shot
sampling.

A Distribution is a plain dict mapping bitstring keys to probabilities;
Counts is a dict subclass mapping bitstring keys to shot counts. Keys
follow the q_{n-1}...q_0 convention; channel line indices count from the
right (line 0 = rightmost character).
"""
from __future__ import annotations

import numpy as np

from .adversary import tamper_channel, plan_targeted, TamperMode
from .backend import BackendModel, ReadoutPair
from .circuit import Circuit, CircuitError, GateKind, MAX_QUBITS, CapacityExceeded
from .gates import matrix
from .rng import derive_rng, derive_seed

Distribution = dict[str, float]

PLAN_SHOTS = 10_000  # private clean run the adversary uses to pick targets


class DimensionMismatch(ValueError):
    pass


class Counts(dict):
    """Histogram from bitstring outcomes to non-negative shot counts."""

    @property
    def total_shots(self) -> int:
        return sum(self.values())


def _apply_gate(psi: np.ndarray, gate: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    tensor = gate.reshape((2,) * (2 * k))
    psi = np.tensordot(tensor, psi, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(psi, range(k), axes)


def _evolve(circuit: Circuit, rng=None, depolarizing: float = 0.0) -> np.ndarray:
    """Run all gates, optionally injecting Pauli errors per gate (one
    stochastic trajectory). Returns the final statevector tensor."""
    n = circuit.num_qubits
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    measured: set[int] = set()
    paulis = [GateKind.X, GateKind.Y, GateKind.Z]
    for instr in circuit.instructions:
        if instr.kind is GateKind.BARRIER:
            continue
        if instr.kind is GateKind.MEASURE:
            measured.add(instr.qubits[0])
            continue
        if measured.intersection(instr.qubits):
            raise CircuitError("gate after measurement is unsupported")
        axes = [n - 1 - q for q in instr.qubits]
        psi = _apply_gate(psi, matrix(instr.kind, instr.params), axes)
        if depolarizing > 0.0 and rng is not None:
            for q in instr.qubits:
                if rng.random() < depolarizing:
                    kind = paulis[rng.integers(3)]
                    psi = _apply_gate(psi, matrix(kind), [n - 1 - q])
        if __debug__:
            norm = float(np.sum(np.abs(psi) ** 2))
            assert abs(norm - 1.0) < 1e-10, f"norm drifted to {norm}"
    return psi


def _measured_distribution(circuit: Circuit, psi: np.ndarray) -> Distribution:
    pairs = circuit.measured_pairs
    if not pairs:
        raise CircuitError("circuit has no measurements")
    n = circuit.num_qubits
    probs = np.abs(psi) ** 2
    front = [n - 1 - q for q, _ in pairs]  # output order, clbit descending
    rest = [a for a in range(n) if a not in front]
    probs = np.transpose(probs, front + rest).reshape(2 ** len(front), -1).sum(axis=1)
    width = len(front)
    return {
        format(i, f"0{width}b"): float(p) for i, p in enumerate(probs) if p > 0.0
    }


def run_statevector(circuit: Circuit) -> Distribution:
    """Exact outcome distribution over the measured classical bits."""
    if circuit.num_qubits > MAX_QUBITS:
        raise CapacityExceeded(f"{circuit.num_qubits} qubits exceeds capacity")
    return _measured_distribution(circuit, _evolve(circuit))


def _trajectory_distribution(
    circuit: Circuit, depolarizing: float, trajectories: int, rng
) -> Distribution:
    acc: dict[str, float] = {}
    w = 1.0 / trajectories
    for _ in range(trajectories):
        psi = _evolve(circuit, rng=rng, depolarizing=depolarizing)
        for key, p in _measured_distribution(circuit, psi).items():
            acc[key] = acc.get(key, 0.0) + w * p
    return acc


def apply_readout_channel(
    dist: Distribution, pairs: list[ReadoutPair]
) -> Distribution:
    """Per-line 2x2 stochastic matrix [[1-p01, p10], [p01, 1-p10]].

    ``pairs`` is indexed by line (pairs[0] acts on the rightmost bit).
    """
    if not dist:
        return {}
    width = len(next(iter(dist)))
    if len(pairs) != width:
        raise DimensionMismatch(
            f"{len(pairs)} readout channels supplied for {width}-bit keys"
        )
    out = dict(dist)
    for line, (p01, p10) in enumerate(pairs):
        if p01 == 0.0 and p10 == 0.0:
            continue
        pos = width - 1 - line
        mixed: dict[str, float] = {}
        for key, p in out.items():
            bit = key[pos]
            other = key[:pos] + ("1" if bit == "0" else "0") + key[pos + 1 :]
            stay = 1.0 - p01 if bit == "0" else 1.0 - p10
            flip = p01 if bit == "0" else p10
            mixed[key] = mixed.get(key, 0.0) + p * stay
            mixed[other] = mixed.get(other, 0.0) + p * flip
        out = mixed
    return out


def _sample(dist: Distribution, shots: int, rng) -> Counts:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    keys = sorted(dist)
    probs = np.clip(np.array([dist[k] for k in keys], dtype=float), 0.0, None)
    probs /= probs.sum()
    draws = rng.multinomial(shots, probs)
    return Counts({k: int(c) for k, c in zip(keys, draws) if c})


def sample_counts(dist: Distribution, shots: int, seed: int) -> Counts:
    """Seeded multinomial draw; identical inputs give identical Counts."""
    return _sample(dist, shots, derive_rng(seed))


def _line_pairs(backend: BackendModel, circuit: Circuit) -> list[ReadoutPair]:
    ordered = circuit.measured_pairs  # clbit descending = left to right
    return [backend.noise.pair_for(q) for q, _ in reversed(ordered)]


def clean_distribution(backend: BackendModel, circuit: Circuit) -> Distribution:
    """Analytic post-readout distribution without drift or tampering."""
    return apply_readout_channel(run_statevector(circuit), _line_pairs(backend, circuit))


def resolve_tamper(backend: BackendModel, circuit: Circuit, seed: int) -> BackendModel:
    """Fill in the tamper target lines once per backend instance.

    Targeted mode plans against a privately sampled clean execution;
    random-subset mode draws its lines from a seeded stream.
    """
    spec = backend.tamper
    if spec is None or not spec.needs_resolution:
        return backend
    width = circuit.num_measured
    if spec.mode is TamperMode.TARGETED:
        private = sample_counts(
            clean_distribution(backend, circuit),
            PLAN_SHOTS,
            derive_seed(seed, backend.name, "tamper-plan"),
        )
        lines = plan_targeted(private)
    else:  # RANDOM_SUBSET
        rng = derive_rng(seed, backend.name, "tamper-lines")
        k = min(spec.k, width)
        lines = tuple(sorted(rng.choice(width, size=k, replace=False).tolist()))
    return backend.with_tamper(spec.with_lines(lines))


def execute(backend: BackendModel, circuit: Circuit, shots: int, seed: int) -> Counts:
    """Full pipeline: statevector -> drift jitter -> readout channel ->
    tamper channel -> multinomial sampling."""
    if backend.noise.gate_depolarizing > 0.0:
        rng = derive_rng(seed, backend.name, "trajectories")
        dist = _trajectory_distribution(
            circuit, backend.noise.gate_depolarizing, shots, rng
        )
    else:
        dist = run_statevector(circuit)
    pairs = _line_pairs(backend, circuit)
    if backend.drift > 0.0:
        rng = derive_rng(seed, backend.name, "drift")
        jitter = rng.uniform(-backend.drift, backend.drift, size=(len(pairs), 2))
        pairs = [
            (
                float(np.clip(p01 + j0, 0.0, 0.5)),
                float(np.clip(p10 + j1, 0.0, 0.5)),
            )
            for (p01, p10), (j0, j1) in zip(pairs, jitter)
        ]
    dist = apply_readout_channel(dist, pairs)
    if backend.tamper is not None:
        resolved = resolve_tamper(backend, circuit, seed)
        dist = tamper_channel(dist, resolved.tamper)
    return sample_counts(dist, shots, derive_seed(seed, backend.name, "sample"))
