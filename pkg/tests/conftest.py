"""Shared independent oracles for the test suite.

Everything here is deliberately naive and self-contained (dense matrices,
explicit bit loops, closed-form formulas) so the package kernels are checked
against code that shares none of their machinery.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

# ---------------------------------------------------------------------------
# dense gate oracle

I2 = np.eye(2, dtype=complex)
PAULI = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
H_MAT = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)


def rot_matrix(axis: str, theta: float) -> np.ndarray:
    """exp(-i*theta/2 * axis) via the explicit cos/sin form."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return c * I2 - 1j * s * PAULI[axis]


def rzz_matrix(theta: float) -> np.ndarray:
    """exp(-i*theta/2 * Z(x)Z) on the 2-qubit basis |b1 b0>."""
    zz = np.kron(PAULI["Z"], PAULI["Z"])
    return np.cos(theta / 2.0) * np.eye(4) - 1j * np.sin(theta / 2.0) * zz


CX_MAT_CONTROL_HI = np.array(  # control = first kron factor (more significant bit)
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def embed1(n: int, q: int, mat: np.ndarray) -> np.ndarray:
    """Little-endian embedding: qubit q is bit q of the basis index."""
    out = mat if n - 1 == q else I2
    for k in range(n - 2, -1, -1):
        out = np.kron(out, mat if k == q else I2)
    return out


def embed2(n: int, qubits: tuple[int, int], mat4: np.ndarray) -> np.ndarray:
    """Embed a 4x4 matrix acting on (qubits[0], qubits[1]); in mat4 the basis
    is |b1 b0> with b1 = qubits[0]'s bit, b0 = qubits[1]'s bit.  Pure loops."""
    qa, qb = qubits
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        b1 = (col >> qa) & 1
        b0 = (col >> qb) & 1
        local = 2 * b1 + b0
        base = col & ~((1 << qa) | (1 << qb))
        for lto in range(4):
            amp = mat4[lto, local]
            if amp == 0:
                continue
            row = base | (((lto >> 1) & 1) << qa) | ((lto & 1) << qb)
            out[row, col] += amp
    return out


def gate_matrix(n: int, kind: str, qubits, theta: float | None = None) -> np.ndarray:
    kind = kind.lower()
    if kind in ("rx", "ry", "rz"):
        return embed1(n, qubits[0], rot_matrix(kind[-1].upper(), theta))
    if kind == "h":
        return embed1(n, qubits[0], H_MAT)
    if kind == "x":
        return embed1(n, qubits[0], PAULI["X"])
    if kind == "rzz":
        return embed2(n, tuple(qubits), rzz_matrix(theta))
    if kind == "cx":
        return embed2(n, tuple(qubits), CX_MAT_CONTROL_HI)
    raise ValueError(kind)


def circuit_matrix(n: int, ops) -> np.ndarray:
    """ops: sequence of (kind, qubits, theta-or-None), applied left to right."""
    m = np.eye(1 << n, dtype=complex)
    for kind, qubits, theta in ops:
        m = gate_matrix(n, kind, qubits, theta) @ m
    return m


# ---------------------------------------------------------------------------
# dense Pauli / Hamiltonian oracle

def dense_pauli_string(n: int, factors: dict) -> np.ndarray:
    """kron over qubits n-1 .. 0 (little-endian index convention)."""
    out = np.array([[1.0 + 0j]])
    for q in range(n - 1, -1, -1):
        out = np.kron(out, PAULI[factors.get(q, "I")])
    return out


def ring_edges(n: int) -> list[tuple[int, int]]:
    if n == 2:
        return [(0, 1)]
    return sorted(tuple(sorted((i, (i + 1) % n))) for i in range(n))


def torus_edges(rows: int, cols: int) -> set[tuple[int, int]]:
    """Brute-force nearest-neighbor pairs on a rows x cols torus, row-major."""
    out = set()
    for r in range(rows):
        for c in range(cols):
            a = r * cols + c
            for rr, cc in (((r + 1) % rows, c), (r, (c + 1) % cols)):
                b = rr * cols + cc
                if a != b:
                    out.add((min(a, b), max(a, b)))
    return out


def dense_tfim_1d(n: int, jz: float, hx: float) -> np.ndarray:
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    for a, b in ring_edges(n):
        m += jz * dense_pauli_string(n, {a: "Z", b: "Z"})
    for q in range(n):
        m += hx * dense_pauli_string(n, {q: "X"})
    return m


def free_fermion_ground_energy(n: int, jz: float, hx: float) -> float:
    """1D PBC TFIM ground energy from the Jordan-Wigner quasiparticle spectrum,
    even n: E0 = -sum_m sqrt(jz^2 + hx^2 + 2|jz hx| cos((2m+1) pi / n))."""
    if n % 2:
        raise ValueError("closed form used only for even n")
    total = 0.0
    for m in range(n):
        k = (2 * m + 1) * math.pi / n
        total += math.sqrt(jz * jz + hx * hx + 2.0 * abs(jz * hx) * math.cos(k))
    return -total


# ---------------------------------------------------------------------------
# misc oracles

def fd_gradient(f, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    g = np.zeros_like(x, dtype=float)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        g[i] = (f(xp) - f(xm)) / (2.0 * step)
    return g


def partial_trace_outer(amps: np.ndarray, n: int, keep) -> np.ndarray:
    """Partial trace of |amps><amps| onto `keep` via explicit index loops.

    Row/column bits of the result follow little-endian order of sorted(keep).
    """
    keep = sorted(keep)
    rest = [q for q in range(n) if q not in keep]
    dk, dr = 1 << len(keep), 1 << len(rest)
    rho = np.zeros((dk, dr, dk, dr), dtype=complex)

    def full_index(kbits: int, rbits: int) -> int:
        idx = 0
        for pos, q in enumerate(keep):
            idx |= ((kbits >> pos) & 1) << q
        for pos, q in enumerate(rest):
            idx |= ((rbits >> pos) & 1) << q
        return idx

    for ka in range(dk):
        for ra in range(dr):
            ia = full_index(ka, ra)
            for kb in range(dk):
                for rb in range(dr):
                    ib = full_index(kb, rb)
                    rho[ka, ra, kb, rb] = amps[ia] * np.conj(amps[ib])
    return np.einsum("arbr->ab", rho)


def haar_random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return v / np.linalg.norm(v)


def shannon_entropy(probs) -> float:
    return float(-sum(p * math.log(p) for p in probs if p > 1e-15))


def global_phase_aligned(amps: np.ndarray) -> np.ndarray:
    """Rotate a state by a global phase so its largest amplitude is real positive."""
    k = int(np.argmax(np.abs(amps)))
    ph = cmath.phase(complex(amps[k]))
    return amps * cmath.exp(-1j * ph)
