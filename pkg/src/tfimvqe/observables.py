"""State diagnostics: magnetization, long-range correlation, reduced density
matrices, and von Neumann entropies via two independent routes (partial trace
eigenvalues vs Schmidt/SVD of the bipartition matrix).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import PauliSum, energy, energy_variance
from .lattice import LatticeSpec, antipodal_pairs
from .statevector import StateVector, _view1, parity_signs

LN2 = math.log(2.0)
EIG_CLAMP = 1e-15  # spectrum entries below this are treated as exact zeros
RDM_MAX_SITES = 12


def z_expectations(state: StateVector) -> np.ndarray:
    """<Z_q> for every qubit."""
    probs = state.amps.real ** 2 + state.amps.imag ** 2
    out = np.empty(state.n_qubits)
    for q in range(state.n_qubits):
        p1 = float(probs.reshape(-1, 2, 1 << q)[:, 1, :].sum())
        out[q] = 1.0 - 2.0 * p1
    return out


def magnetization(state: StateVector) -> float:
    """Mean single-site Z expectation, (1/N) sum_i <Z_i>."""
    return float(np.mean(z_expectations(state)))


def long_range_correlation(state: StateVector, lat: LatticeSpec) -> float:
    """Mean <Z_a Z_b> over antipodal site pairs (every dimension must be even)."""
    pairs = antipodal_pairs(lat)
    if lat.n_sites != state.n_qubits:
        raise ValueError(f"lattice has {lat.n_sites} sites, state {state.n_qubits} qubits")
    probs = state.amps.real ** 2 + state.amps.imag ** 2
    total = 0.0
    for a, b in pairs:
        total += float(np.dot(parity_signs(state.n_qubits, (1 << a) | (1 << b)), probs))
    return total / len(pairs)


@dataclass
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite (within 1e-10) matrix."""

    mat: np.ndarray

    def __post_init__(self):
        self.mat = np.ascontiguousarray(self.mat, dtype=np.complex128)
        if self.mat.ndim != 2 or self.mat.shape[0] != self.mat.shape[1]:
            raise ValueError(f"density matrix must be square, got {self.mat.shape}")
        if not np.allclose(self.mat, self.mat.conj().T, atol=1e-10, rtol=0.0):
            raise ValueError("density matrix must be Hermitian within 1e-10")
        tr = float(np.trace(self.mat).real)
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"density matrix trace {tr} is not 1 within 1e-10")
        self._eigs = None

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def eigenvalues(self) -> np.ndarray:
        if self._eigs is None:
            w = np.linalg.eigvalsh(self.mat)
            if float(w.min()) < -1e-10:
                raise ValueError(f"density matrix has eigenvalue {w.min():.3e} < -1e-10")
            self._eigs = w
        return self._eigs


def _bipartition_matrix(state: StateVector, keep: list[int]) -> np.ndarray:
    """Reshape |state> into a 2^|keep| x 2^|rest| matrix; row bits are the kept
    qubits in little-endian order (keep[0] least significant)."""
    n = state.n_qubits
    keep_set = set(keep)
    rest = [q for q in range(n) if q not in keep_set]
    tensor = state.amps.reshape([2] * n)  # C order: axis k indexes qubit n-1-k
    axes = [n - 1 - q for q in reversed(keep)] + [n - 1 - q for q in reversed(rest)]
    return tensor.transpose(axes).reshape(1 << len(keep), 1 << len(rest))


def _check_subset(state: StateVector, sites) -> list[int]:
    subset = sorted({int(s) for s in sites})
    if not subset:
        raise ValueError("site subset must be nonempty")
    if subset[0] < 0 or subset[-1] >= state.n_qubits:
        raise ValueError(f"subset {subset} out of range for {state.n_qubits} qubits")
    if len(subset) >= state.n_qubits:
        raise ValueError("subset must be a proper subset of the register")
    return subset


def reduced_density_matrix(state: StateVector, sites) -> DensityMatrix:
    """Partial trace of |state><state| down to the given sites (at most 12)."""
    subset = _check_subset(state, sites)
    if len(subset) > RDM_MAX_SITES:
        raise ValueError(f"subset of {len(subset)} sites exceeds the {RDM_MAX_SITES}-site cap")
    m = _bipartition_matrix(state, subset)
    return DensityMatrix(m @ m.conj().T)


def von_neumann_entropy(dm: DensityMatrix | np.ndarray) -> float:
    """-sum(lam * ln(lam)) over the spectrum, in nats."""
    if not isinstance(dm, DensityMatrix):
        dm = DensityMatrix(dm)
    w = np.clip(dm.eigenvalues(), 0.0, 1.0)
    w = w[w > EIG_CLAMP]
    return float(-np.sum(w * np.log(w)))


def bipartite_entropy_svd(state: StateVector, sites) -> float:
    """Entanglement entropy of the subset via Schmidt (singular) values, in nats."""
    subset = _check_subset(state, sites)
    svals = np.linalg.svd(_bipartition_matrix(state, subset), compute_uv=False)
    p = np.clip(svals * svals, 0.0, 1.0)
    p = p[p > EIG_CLAMP]
    return float(-np.sum(p * np.log(p)))


def _site_bloch(state: StateVector, q: int) -> tuple[float, float, float]:
    v = _view1(state.amps, q)
    a0 = v[:, 0, :].ravel()
    a1 = v[:, 1, :].ravel()
    cross = complex(np.vdot(a0, a1))
    ez = float(np.vdot(a0, a0).real - np.vdot(a1, a1).real)
    return 2.0 * cross.real, 2.0 * cross.imag, ez


def single_site_rdm(state: StateVector, q: int) -> DensityMatrix:
    """One-site reduced density matrix in Bloch form, (I + <X>X + <Y>Y + <Z>Z)/2."""
    if not 0 <= q < state.n_qubits:
        raise ValueError(f"qubit {q} out of range")
    ex, ey, ez = _site_bloch(state, q)
    mat = 0.5 * np.array(
        [[1.0 + ez, ex - 1j * ey], [ex + 1j * ey, 1.0 - ez]], dtype=np.complex128
    )
    return DensityMatrix(mat)


def single_site_entropy_avg(state: StateVector) -> float:
    """Mean over sites of the one-site von Neumann entropy, in nats.

    Uses Bloch expectations directly: eigenvalues are (1 +- r)/2 with r the
    Bloch vector length.
    """
    total = 0.0
    for q in range(state.n_qubits):
        ex, ey, ez = _site_bloch(state, q)
        r = min(math.sqrt(ex * ex + ey * ey + ez * ez), 1.0)
        for lam in ((1.0 + r) / 2.0, (1.0 - r) / 2.0):
            if lam > EIG_CLAMP:
                total -= lam * math.log(lam)
    return total / state.n_qubits


@dataclass(frozen=True)
class ObservableReport:
    energy: float
    variance: float
    magnetization: float
    long_range_corr: float | None
    single_site_entropy: float  # nats
    single_site_entropy_ln2: float  # same, in units of ln 2
    half_cut_entropy: float  # nats, sites [0, N/2)
    degenerate: bool = False

    def __post_init__(self):
        if not -1e-9 <= self.single_site_entropy <= LN2 + 1e-9:
            raise ValueError(f"single-site entropy {self.single_site_entropy} out of [0, ln2]")
        if self.half_cut_entropy < -1e-9:
            raise ValueError(f"negative half-cut entropy {self.half_cut_entropy}")


def build_report(state: StateVector, lat: LatticeSpec, h: PauliSum,
                 degenerate: bool = False) -> ObservableReport:
    """All scalar diagnostics of one state; long_range_corr is None when the
    lattice has an odd dimension (antipodal pairing undefined)."""
    corr = None
    if lat.periodic and all(d % 2 == 0 for d in lat.dims):
        corr = long_range_correlation(state, lat)
    s1 = single_site_entropy_avg(state)
    half = bipartite_entropy_svd(state, range(lat.n_sites // 2))
    return ObservableReport(
        energy=energy(h, state),
        variance=energy_variance(h, state),
        magnetization=magnetization(state),
        long_range_corr=corr,
        single_site_entropy=s1,
        single_site_entropy_ln2=s1 / LN2,
        half_cut_entropy=half,
        degenerate=degenerate,
    )
