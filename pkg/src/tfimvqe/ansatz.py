"""Parametric circuit families and their analytic energy gradients.

Families:
  HEA       per-qubit (RY, RZ) layer, then L x [CX chain + (RY, RZ) layer]
  REAL_AMP  HEA without the RZ rotations (real amplitudes)
  HVA       fixed |-> preparation, then L x [RZZ on every bond, RX on every
            qubit] with one shared angle per gate group per layer
  HVA_SB    HVA plus a shared-angle RZ layer (per layer, or once at the end)
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .hamiltonian import PauliSum, apply_hamiltonian
from .lattice import LatticeSpec, edges
from .statevector import (
    _SQRT1_2,
    Gate,
    GateKind,
    StateVector,
    parity_signs,
)

MAX_LAYERS = 64
SB_PLACEMENTS = ("per_layer", "final")


class AnsatzFamily(Enum):
    HEA = "HEA"
    HVA = "HVA"
    HVA_SB = "HVA_SB"
    REAL_AMP = "REAL_AMP"


@dataclass(frozen=True)
class AnsatzSpec:
    family: AnsatzFamily
    layers: int
    lattice: LatticeSpec
    sb_placement: str = "per_layer"

    def __post_init__(self):
        if not isinstance(self.family, AnsatzFamily):
            raise ValueError(f"unknown ansatz family {self.family!r}")
        if not 1 <= self.layers <= MAX_LAYERS:
            raise ValueError(f"layers must be in [1, {MAX_LAYERS}], got {self.layers}")
        if self.sb_placement not in SB_PLACEMENTS:
            raise ValueError(f"sb_placement must be one of {SB_PLACEMENTS}")


def n_ansatz_params(spec: AnsatzSpec) -> int:
    n, layers = spec.lattice.n_sites, spec.layers
    if spec.family is AnsatzFamily.HEA:
        return 2 * n * (layers + 1)
    if spec.family is AnsatzFamily.REAL_AMP:
        return n * (layers + 1)
    if spec.family is AnsatzFamily.HVA:
        return 2 * layers
    if spec.sb_placement == "per_layer":
        return 3 * layers
    return 2 * layers + 1


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list with a slot -> gate-position map for shared parameters."""

    n_qubits: int
    gates: tuple[Gate, ...]
    n_params: int
    param_map: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        slots: list[list[int]] = [[] for _ in range(self.n_params)]
        for pos, g in enumerate(self.gates):
            for q in g.qubits:
                if q >= self.n_qubits:
                    raise ValueError(f"gate {pos} touches qubit {q} of {self.n_qubits}")
            if g.param is not None:
                if g.param >= self.n_params:
                    raise ValueError(f"gate {pos} references slot {g.param} of {self.n_params}")
                slots[g.param].append(pos)
        derived = tuple(tuple(s) for s in slots)
        if self.param_map and self.param_map != derived:
            raise ValueError("param_map inconsistent with gate list")
        object.__setattr__(self, "param_map", derived)
        if any(not s for s in derived):
            empty = [i for i, s in enumerate(derived) if not s]
            raise ValueError(f"parameter slots {empty} feed no gate")
        # each thread lazily binds its own evaluation engine (reused buffers)
        object.__setattr__(self, "_local", threading.local())


def build_ansatz(spec: AnsatzSpec) -> Circuit:
    n = spec.lattice.n_sites
    fam = spec.family
    gates: list[Gate] = []

    if fam in (AnsatzFamily.HEA, AnsatzFamily.REAL_AMP):
        with_rz = fam is AnsatzFamily.HEA
        slot = 0

        def rotation_layer():
            nonlocal slot
            for q in range(n):
                gates.append(Gate(GateKind.RY, (q,), param=slot))
                slot += 1
                if with_rz:
                    gates.append(Gate(GateKind.RZ, (q,), param=slot))
                    slot += 1

        rotation_layer()
        for _ in range(spec.layers):
            for q in range(n - 1):
                gates.append(Gate(GateKind.CX, (q, q + 1)))
            rotation_layer()
        n_params = slot
    else:
        bonds = edges(spec.lattice)
        if not bonds:
            raise ValueError(f"{fam.value} needs a lattice with at least one bond")
        for q in range(n):  # |-> on every qubit: X then H
            gates.append(Gate(GateKind.X, (q,)))
        for q in range(n):
            gates.append(Gate(GateKind.H, (q,)))
        slot = 0

        def sb_layer():
            nonlocal slot
            for q in range(n):
                gates.append(Gate(GateKind.RZ, (q,), param=slot))
            slot += 1

        for _ in range(spec.layers):
            for a, b in bonds:
                gates.append(Gate(GateKind.RZZ, (a, b), param=slot))
            slot += 1
            for q in range(n):
                gates.append(Gate(GateKind.RX, (q,), param=slot))
            slot += 1
            if fam is AnsatzFamily.HVA_SB and spec.sb_placement == "per_layer":
                sb_layer()
        if fam is AnsatzFamily.HVA_SB and spec.sb_placement == "final":
            sb_layer()
        n_params = slot

    circuit = Circuit(n, tuple(gates), n_params)
    assert circuit.n_params == n_ansatz_params(spec)
    return circuit


def _check_params(circuit: Circuit, params) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (circuit.n_params,):
        raise ValueError(
            f"expected {circuit.n_params} parameters, got shape {params.shape}"
        )
    if not np.all(np.isfinite(params)):
        raise ValueError("parameters must be finite")
    return params


# Opcodes for the compiled gate stream.  _PARAM_OPS are the parametric-capable
# codes; DIAG_ZZ and PERM are fusion products, not gate kinds.
(_OP_RX, _OP_RY, _OP_RZ, _OP_RZZ, _OP_CX_HI, _OP_CX_LO, _OP_H, _OP_X,
 _OP_DIAG_ZZ, _OP_PERM) = range(10)

_PARAM_OPS = frozenset({_OP_RX, _OP_RY, _OP_RZ, _OP_RZZ, _OP_DIAG_ZZ})

_OP_CODE_1Q = {GateKind.RX: _OP_RX, GateKind.RY: _OP_RY, GateKind.RZ: _OP_RZ,
               GateKind.H: _OP_H, GateKind.X: _OP_X}


def _fuse_zz_runs(ops: list, n_qubits: int) -> list:
    """Collapse runs of >= 2 same-slot RZZ ops into one diagonal layer whose key
    is the summed ZZ parity vector (the generator is then that same vector)."""
    out = []
    i = 0
    while i < len(ops):
        code, key, slot, theta = ops[i]
        j = i
        if code == _OP_RZZ and slot >= 0:
            while j + 1 < len(ops) and ops[j + 1][0] == _OP_RZZ and ops[j + 1][2] == slot:
                j += 1
        if j > i:
            zz = np.zeros(1 << n_qubits)
            for _, (hi, lo), _, _ in ops[i:j + 1]:
                zz += parity_signs(n_qubits, (1 << hi) | (1 << lo))
            # zz takes few distinct values; a level table keeps the per-call
            # exp() tiny instead of buffer-sized
            levels = np.unique(zz)
            out.append((_OP_DIAG_ZZ, (zz, levels, np.searchsorted(levels, zz)),
                        slot, theta))
        else:
            out.append(ops[i])
        i = j + 1
    return out


def _fuse_permutation_runs(ops: list, n_qubits: int) -> list:
    """Collapse runs of >= 2 X/CX ops into one basis-index permutation; the key
    is (gather indices, their inverse) so the backward pass can undo it."""
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    out = []
    i = 0
    while i < len(ops):
        j = i
        while j < len(ops) and ops[j][0] in (_OP_X, _OP_CX_HI, _OP_CX_LO):
            j += 1
        if j - i >= 2:
            sigma = idx
            for code, key, _, _ in ops[i:j]:
                if code == _OP_X:
                    src = idx ^ (1 << key)
                else:
                    hi, lo = key
                    control, target = (hi, lo) if code == _OP_CX_HI else (lo, hi)
                    src = idx ^ (((idx >> control) & 1) << target)
                sigma = sigma[src]
            inv = np.empty_like(sigma)
            inv[sigma] = idx
            out.append((_OP_PERM, (sigma, inv), -1, 0.0))
            i = j
        else:
            out.append(ops[i])
            i += 1
    return out


def _compile_ops(circuit: Circuit) -> tuple:
    """Flatten the gate list to (opcode, view key, slot, fixed angle) tuples.

    Two-qubit keys are (hi, lo) bit positions; CX direction is folded into the
    opcode so application never re-derives it.  Same-slot RZZ runs and
    parameter-free X/CX runs are fused into single vectorized ops.
    """
    ops = []
    for g in circuit.gates:
        slot = -1 if g.param is None else g.param
        theta = 0.0 if g.angle is None else float(g.angle)
        if g.kind is GateKind.RZZ:
            a, b = g.qubits
            key = (a, b) if a > b else (b, a)
            ops.append((_OP_RZZ, key, slot, theta))
        elif g.kind is GateKind.CX:
            control, target = g.qubits
            if control > target:
                ops.append((_OP_CX_HI, (control, target), -1, 0.0))
            else:
                ops.append((_OP_CX_LO, (target, control), -1, 0.0))
        else:
            ops.append((_OP_CODE_1Q[g.kind], g.qubits[0], slot, theta))
    ops = _fuse_zz_runs(ops, circuit.n_qubits)
    ops = _fuse_permutation_runs(ops, circuit.n_qubits)
    return tuple(ops)


class _Views:
    """Bit-stride views of one amplitude buffer, prebuilt per gate support.

    one[q]       -> (a0, a1, t0, t1): the bit-q halves plus matching scratch
    pair[(h,l)]  -> (b00, b01, b10, b11, t): the four bit-pair blocks + scratch
    flat / full  -> the whole buffer and a buffer-sized scratch
    Scratch views alias shared buffers; gate kernels never overlap their use.
    """

    __slots__ = ("flat", "full", "one", "pair")

    def __init__(self, buf: np.ndarray, ops: tuple, s0: np.ndarray,
                 s1: np.ndarray, full: np.ndarray):
        self.flat = buf
        self.full = full
        self.one = {}
        self.pair = {}
        for code, key, _, _ in ops:
            if code in (_OP_RZZ, _OP_CX_HI, _OP_CX_LO):
                if key in self.pair:
                    continue
                hi, lo = key
                v = buf.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
                b00 = v[:, 0, :, 0, :]
                self.pair[key] = (b00, v[:, 0, :, 1, :], v[:, 1, :, 0, :],
                                  v[:, 1, :, 1, :], s0[: b00.size].reshape(b00.shape))
            elif code in (_OP_DIAG_ZZ, _OP_PERM) or key in self.one:
                continue
            else:
                v = buf.reshape(-1, 2, 1 << key)
                a0 = v[:, 0, :]
                self.one[key] = (a0, v[:, 1, :], s0.reshape(a0.shape), s1.reshape(a0.shape))


def _apply_op(vs: _Views, code: int, key, theta) -> None:
    """Apply one compiled op in place through the cached views (no allocation)."""
    if code == _OP_RZ:
        a0, a1, _, _ = vs.one[key]
        c, s = math.cos(0.5 * theta), math.sin(0.5 * theta)
        a0 *= complex(c, -s)
        a1 *= complex(c, s)
    elif code == _OP_DIAG_ZZ:
        _, levels, level_idx = key
        phases = np.exp(levels * complex(0.0, -0.5 * theta))
        np.take(phases, level_idx, out=vs.full)
        vs.flat *= vs.full
    elif code == _OP_RZZ:
        b00, b01, b10, b11, _ = vs.pair[key]
        c, s = math.cos(0.5 * theta), math.sin(0.5 * theta)
        p_eq = complex(c, -s)  # ZZ eigenvalue +1 (equal bits)
        p_ne = complex(c, s)
        b00 *= p_eq
        b11 *= p_eq
        b01 *= p_ne
        b10 *= p_ne
    elif code <= _OP_RY:
        a0, a1, t0, t1 = vs.one[key]
        c, s = math.cos(0.5 * theta), math.sin(0.5 * theta)
        if code == _OP_RX:
            m01 = m10 = complex(0.0, -s)
        else:  # RY
            m01, m10 = -s, s
        np.multiply(a0, m10, out=t1)  # t1 holds the a0 cross term before a0 changes
        a0 *= c
        np.multiply(a1, m01, out=t0)
        a0 += t0
        a1 *= c
        a1 += t1
    elif code == _OP_PERM:
        np.take(vs.flat, key[0], out=vs.full)
        np.copyto(vs.flat, vs.full)
    elif code == _OP_CX_HI:  # control on the high bit: swap lo within hi=1
        _, _, b10, b11, t = vs.pair[key]
        np.copyto(t, b10)
        np.copyto(b10, b11)
        np.copyto(b11, t)
    elif code == _OP_CX_LO:  # control on the low bit: swap hi within lo=1
        _, b01, _, b11, t = vs.pair[key]
        np.copyto(t, b01)
        np.copyto(b01, b11)
        np.copyto(b11, t)
    elif code == _OP_H:
        a0, a1, t0, t1 = vs.one[key]
        np.add(a0, a1, out=t0)
        np.subtract(a0, a1, out=t1)
        t0 *= _SQRT1_2
        t1 *= _SQRT1_2
        np.copyto(a0, t0)
        np.copyto(a1, t1)
    else:  # _OP_X
        a0, a1, t0, _ = vs.one[key]
        np.copyto(t0, a0)
        np.copyto(a0, a1)
        np.copyto(a1, t0)


def _op_overlap(vl: _Views, vp: _Views, code: int, key) -> complex:
    """<lam|A|psi> for the rotation generator A, via the cached views
    (never materializes A|psi>)."""
    if code == _OP_DIAG_ZZ:
        np.multiply(key[0], vp.flat, out=vp.full)
        return complex(np.vdot(vl.flat, vp.full))
    if code == _OP_RZZ:
        lb = vl.pair[key]
        pb = vp.pair[key]
        eq = np.vdot(lb[0], pb[0]) + np.vdot(lb[3], pb[3])
        ne = np.vdot(lb[1], pb[1]) + np.vdot(lb[2], pb[2])
        return eq - ne
    l0, l1, _, _ = vl.one[key]
    p0, p1, _, _ = vp.one[key]
    if code == _OP_RZ:
        return np.vdot(l0, p0) - np.vdot(l1, p1)
    if code == _OP_RX:
        return np.vdot(l0, p1) + np.vdot(l1, p0)
    # RY: Y = [[0, -i], [i, 0]]
    return 1j * (np.vdot(l1, p0) - np.vdot(l0, p1))


class _Engine:
    """Reusable evaluation workspace for one circuit: compiled ops plus two
    amplitude buffers (state and adjoint) with prebuilt views."""

    __slots__ = ("ops", "psi", "lam", "vpsi", "vlam")

    def __init__(self, circuit: Circuit):
        self.ops = _compile_ops(circuit)
        dim = 1 << circuit.n_qubits
        self.psi = np.empty(dim, dtype=np.complex128)
        self.lam = np.empty(dim, dtype=np.complex128)
        s0 = np.empty(dim // 2, dtype=np.complex128)
        s1 = np.empty(dim // 2, dtype=np.complex128)
        full = np.empty(dim, dtype=np.complex128)
        self.vpsi = _Views(self.psi, self.ops, s0, s1, full)
        self.vlam = _Views(self.lam, self.ops, s0, s1, full)

    def forward(self, params: np.ndarray) -> None:
        self.psi.fill(0.0)
        self.psi[0] = 1.0
        vs = self.vpsi
        for code, key, slot, theta in self.ops:
            _apply_op(vs, code, key, params[slot] if slot >= 0 else theta)


def _engine(circuit: Circuit) -> _Engine:
    eng = getattr(circuit._local, "engine", None)
    if eng is None:
        eng = _Engine(circuit)
        circuit._local.engine = eng
    return eng


def prepare_state(circuit: Circuit, params) -> StateVector:
    """Run the circuit on |0...0> with the given parameter vector."""
    params = _check_params(circuit, params)
    eng = _engine(circuit)
    eng.forward(params)
    return StateVector(circuit.n_qubits, eng.psi.copy())


def energy_and_gradient(circuit: Circuit, params, h: PauliSum) -> tuple[float, np.ndarray]:
    """Adjoint-mode <H> and d<H>/dtheta, at a cost of ~4 state preparations.

    Shared slots accumulate the chain-rule sum over their gate occurrences.
    """
    params = _check_params(circuit, params)
    if h.n_qubits != circuit.n_qubits:
        raise ValueError(f"qubit count mismatch: {h.n_qubits} vs {circuit.n_qubits}")
    eng = _engine(circuit)
    eng.forward(params)
    lam = apply_hamiltonian(h, StateVector(circuit.n_qubits, eng.psi))
    np.copyto(eng.lam, lam.amps)
    e = float(np.vdot(eng.psi, eng.lam).real)
    grad = np.zeros(circuit.n_params)
    # Walk the circuit backwards, keeping psi at "state after gate g" when g is
    # processed; for RA(theta) = exp(-i*theta/2*A) the contribution of one
    # occurrence is Im(<lam|A|psi>).
    vp, vl = eng.vpsi, eng.vlam
    for code, key, slot, theta in reversed(eng.ops):
        if code in _PARAM_OPS:
            if slot >= 0:
                theta = params[slot]
                grad[slot] += float(_op_overlap(vl, vp, code, key).imag)
            _apply_op(vp, code, key, -theta)
            _apply_op(vl, code, key, -theta)
        elif code == _OP_PERM:
            inverse = (key[1], key[0])
            _apply_op(vp, _OP_PERM, inverse, theta)
            _apply_op(vl, _OP_PERM, inverse, theta)
        else:
            _apply_op(vp, code, key, theta)
            _apply_op(vl, code, key, theta)
    return e, grad


def energy_gradient(circuit: Circuit, params, h: PauliSum) -> np.ndarray:
    return energy_and_gradient(circuit, params, h)[1]
