"""Dense 2^N state-vector kernel: gates, inner products, Pauli-string expectations.

Amplitudes are little-endian: qubit q is bit q of the basis index, so for n=2
the basis state |01> (qubit 1 clear, qubit 0 set) sits at index 1.  Rotation
gates follow the convention RA(theta) = exp(-i*theta/2 * A).  Gate application
updates the amplitude buffer in place (callers that need the pre-state must
copy first) and relies on bit-stride reshapes, never on materialized matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

MAX_QUBITS = 20  # 2^20 complex amplitudes = 16 MB; anything above is out of scope

_SQRT1_2 = 1.0 / math.sqrt(2.0)


class GateKind(Enum):
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    RZZ = "rzz"
    CX = "cx"
    H = "h"
    X = "x"


ROTATION_GATES = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.RZZ})
_TWO_QUBIT = frozenset({GateKind.RZZ, GateKind.CX})


@dataclass(frozen=True)
class Gate:
    """One circuit gate; rotations carry either a fixed angle or a parameter slot."""

    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None
    param: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        want = 2 if self.kind in _TWO_QUBIT else 1
        if len(self.qubits) != want:
            raise ValueError(f"{self.kind.name} acts on {want} qubit(s), got {self.qubits}")
        if want == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{self.kind.name} qubits must be distinct, got {self.qubits}")
        if min(self.qubits) < 0:
            raise ValueError(f"negative qubit index in {self.qubits}")
        if self.kind in ROTATION_GATES:
            if (self.angle is None) == (self.param is None):
                raise ValueError(f"{self.kind.name} needs exactly one of angle/param")
            if self.angle is not None and not math.isfinite(self.angle):
                raise ValueError(f"gate angle must be finite, got {self.angle}")
            if self.param is not None and self.param < 0:
                raise ValueError(f"negative parameter slot {self.param}")
        elif self.angle is not None or self.param is not None:
            raise ValueError(f"{self.kind.name} takes no angle or parameter")


_AXES = ("X", "Y", "Z")


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-site X/Y/Z factors, identity on unnamed sites.

    Stored as (site, axis) pairs sorted by site; sites must be distinct.
    """

    factors: tuple[tuple[int, str], ...]

    def __post_init__(self):
        factors = tuple(sorted((int(s), str(a).upper()) for s, a in self.factors))
        if not factors:
            raise ValueError("PauliString needs at least one factor")
        sites = [s for s, _ in factors]
        if sites[0] < 0:
            raise ValueError(f"negative site index in {factors}")
        if len(set(sites)) != len(sites):
            raise ValueError(f"duplicate sites in {factors}")
        bad = [a for _, a in factors if a not in _AXES]
        if bad:
            raise ValueError(f"axes must be X/Y/Z, got {bad}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def from_map(cls, factors: dict) -> "PauliString":
        return cls(tuple(factors.items()))

    @property
    def max_site(self) -> int:
        return self.factors[-1][0]

    def masks(self) -> tuple[int, int, int]:
        """Bit masks (xmask, ymask, zmask) over site indices."""
        mx = my = mz = 0
        for site, axis in self.factors:
            bit = 1 << site
            if axis == "X":
                mx |= bit
            elif axis == "Y":
                my |= bit
            else:
                mz |= bit
        return mx, my, mz


@dataclass
class StateVector:
    """Normalized-by-convention amplitude buffer; norm is preserved by gates,
    but unnormalized vectors (e.g. H|psi>) are representable too."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        self.amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        if self.amps.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"amplitude buffer has shape {self.amps.shape}, "
                f"expected ({1 << self.n_qubits},)"
            )

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def zero_state(n_qubits: int) -> StateVector:
    """|00...0>."""
    return basis_state(n_qubits, 0)


def basis_state(n_qubits: int, bits: int) -> StateVector:
    """Computational basis state; bit q of `bits` is the value of qubit q."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    dim = 1 << n_qubits
    if not 0 <= bits < dim:
        raise ValueError(f"bits {bits} out of range for {n_qubits} qubits")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[bits] = 1.0
    return StateVector(n_qubits, amps)


def _view1(amps: np.ndarray, q: int) -> np.ndarray:
    # axis 1 of the returned view indexes bit q of the basis index
    return amps.reshape(-1, 2, 1 << q)


def _view2(amps: np.ndarray, qa: int, qb: int):
    # axes 1 and 3 index bits hi = max(qa, qb) and lo = min(qa, qb)
    hi, lo = (qa, qb) if qa > qb else (qb, qa)
    return amps.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo), hi, lo


def _apply_matrix1(amps: np.ndarray, q: int, m00, m01, m10, m11) -> None:
    v = _view1(amps, q)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = m00 * a0 + m01 * a1
    v[:, 1, :] = m10 * a0 + m11 * a1


def _swap_bit(amps: np.ndarray, q: int) -> None:
    v = _view1(amps, q)
    a0 = v[:, 0, :].copy()
    v[:, 0, :] = v[:, 1, :]
    v[:, 1, :] = a0


def apply_gate(state: StateVector, gate: Gate, angle: float | None = None) -> StateVector:
    """Apply one gate in place and return the (mutated) state.

    For parametric rotations the angle comes from gate.angle when fixed,
    otherwise from the `angle` argument.  CX/H/X ignore `angle`.
    """
    n = state.n_qubits
    for q in gate.qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n}-qubit state")
    kind = gate.kind
    theta = None
    if kind in ROTATION_GATES:
        theta = gate.angle if gate.angle is not None else angle
        if theta is None:
            raise ValueError(f"{kind.name} gate needs an angle")
        theta = float(theta)
        if not math.isfinite(theta):
            raise ValueError(f"gate angle must be finite, got {theta}")
    amps = state.amps

    if kind is GateKind.RX:
        c, s = math.cos(0.5 * theta), math.sin(0.5 * theta)
        _apply_matrix1(amps, gate.qubits[0], c, -1j * s, -1j * s, c)
    elif kind is GateKind.RY:
        c, s = math.cos(0.5 * theta), math.sin(0.5 * theta)
        _apply_matrix1(amps, gate.qubits[0], c, -s, s, c)
    elif kind is GateKind.RZ:
        v = _view1(amps, gate.qubits[0])
        v[:, 0, :] *= np.exp(-0.5j * theta)
        v[:, 1, :] *= np.exp(0.5j * theta)
    elif kind is GateKind.H:
        _apply_matrix1(amps, gate.qubits[0], _SQRT1_2, _SQRT1_2, _SQRT1_2, -_SQRT1_2)
    elif kind is GateKind.X:
        _swap_bit(amps, gate.qubits[0])
    elif kind is GateKind.RZZ:
        v, _, _ = _view2(amps, *gate.qubits)
        p_eq = np.exp(-0.5j * theta)  # ZZ eigenvalue +1 (equal bits)
        p_ne = np.exp(0.5j * theta)
        v[:, 0, :, 0, :] *= p_eq
        v[:, 1, :, 1, :] *= p_eq
        v[:, 0, :, 1, :] *= p_ne
        v[:, 1, :, 0, :] *= p_ne
    elif kind is GateKind.CX:
        control, _ = gate.qubits
        v, hi, _ = _view2(amps, *gate.qubits)
        if control == hi:
            a = v[:, 1, :, 0, :].copy()
            v[:, 1, :, 0, :] = v[:, 1, :, 1, :]
            v[:, 1, :, 1, :] = a
        else:
            a = v[:, 0, :, 1, :].copy()
            v[:, 0, :, 1, :] = v[:, 1, :, 1, :]
            v[:, 1, :, 1, :] = a
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unknown gate kind {kind}")
    return state


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}")
    return complex(np.vdot(a.amps, b.amps))


def apply_pauli_string(state: StateVector, pauli: PauliString) -> StateVector:
    """Return P|state> as a new state (the input is untouched)."""
    n = state.n_qubits
    if pauli.max_site >= n:
        raise ValueError(f"site {pauli.max_site} out of range for {n}-qubit state")
    out = state.amps.copy()
    for site, axis in pauli.factors:
        if axis == "Z":
            v = _view1(out, site)
            v[:, 1, :] *= -1.0
        elif axis == "X":
            _swap_bit(out, site)
        else:  # Y = i * X * Z
            v = _view1(out, site)
            v[:, 1, :] *= -1.0
            _swap_bit(out, site)
            out *= 1j
    return StateVector(n, out)


def expectation_pauli_string(state: StateVector, pauli: PauliString) -> float:
    """<state|P|state>; asserts the Hermitian result is real within 1e-12."""
    val = inner_product(state, apply_pauli_string(state, pauli))
    scale = max(1.0, float(np.vdot(state.amps, state.amps).real))
    if abs(val.imag) > 1e-12 * scale:
        raise ValueError(f"Pauli expectation has imaginary residue {val.imag:.3e}")
    return float(val.real)


def parity_signs(n_qubits: int, mask: int) -> np.ndarray:
    """(-1)^popcount(b & mask) for every basis index b, as a float array."""
    dim = 1 << n_qubits
    idx = np.arange(dim, dtype=np.int64)
    par = np.zeros(dim, dtype=np.int64)
    m = int(mask)
    while m:
        q = (m & -m).bit_length() - 1
        par ^= (idx >> q) & 1
        m &= m - 1
    return 1.0 - 2.0 * par
