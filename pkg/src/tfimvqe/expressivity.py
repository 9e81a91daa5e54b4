"""Expressivity diagnostics: pairwise state fidelities, frame potentials, and
fidelity histograms for comparing ansatz families against the Haar baseline
F_t = prod_{j<t} (j+1)/(2^N + j)  (t=1: 1/2^N, t=2: 2/(d(d+1))).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzSpec, Circuit, build_ansatz, prepare_state
from .statevector import inner_product

TWO_PI = 2.0 * np.pi


@dataclass
class FidelitySamples:
    values: np.ndarray
    ansatz: AnsatzSpec | None
    n_samples: int
    seed: int


@dataclass(frozen=True)
class FidelityHistogram:
    bin_edges: tuple[float, ...]  # n_bins + 1 edges spanning [0, 1]
    counts: tuple[int, ...]


def sample_fidelities(spec: AnsatzSpec, n_samples: int, seed: int) -> FidelitySamples:
    """|<psi(a)|psi(b)>|^2 for n_samples independent parameter pairs.

    Sample i draws both parameter vectors uniformly from [0, 2*pi) using the
    dedicated substream (seed, i), so subsets are reproducible and mergeable.
    """
    circuit = build_ansatz(spec)
    values = _sample_circuit_fidelities(circuit, n_samples, seed)
    return FidelitySamples(values, spec, int(n_samples), int(seed))


def _sample_circuit_fidelities(circuit: Circuit, n_samples: int, seed: int) -> np.ndarray:
    if n_samples < 1:
        raise ValueError(f"n_samples must be positive, got {n_samples}")
    values = np.empty(int(n_samples))
    for i in range(int(n_samples)):
        rng = np.random.default_rng([int(seed), i])
        a = prepare_state(circuit, rng.uniform(0.0, TWO_PI, circuit.n_params))
        b = prepare_state(circuit, rng.uniform(0.0, TWO_PI, circuit.n_params))
        f = abs(inner_product(a, b)) ** 2
        if f > 1.0 + 1e-12:
            raise RuntimeError(f"fidelity {f} above 1 beyond rounding")
        values[i] = f
    return values


def frame_potential(samples: FidelitySamples, t: int) -> float:
    """Monte-Carlo frame potential F_t = mean(fidelity^t) for integer t >= 1."""
    t = int(t)
    if t < 1:
        raise ValueError(f"t must be a positive integer, got {t}")
    if samples.values.size == 0:
        raise ValueError("no fidelity samples")
    return float(np.mean(samples.values ** t))


def haar_frame_potential(n_qubits: int, t: int) -> float:
    """Exact Haar value of F_t for an n-qubit system."""
    d = 1 << n_qubits
    out = 1.0
    for j in range(int(t)):
        out *= (j + 1) / (d + j)
    return out


def fidelity_histogram(samples: FidelitySamples, n_bins: int) -> FidelityHistogram:
    """Uniform histogram over [0, 1]; the last bin is right-inclusive."""
    n_bins = int(n_bins)
    if n_bins < 1:
        raise ValueError(f"n_bins must be positive, got {n_bins}")
    counts, edges = np.histogram(
        np.clip(samples.values, 0.0, 1.0), bins=n_bins, range=(0.0, 1.0)
    )
    return FidelityHistogram(tuple(float(e) for e in edges), tuple(int(c) for c in counts))
