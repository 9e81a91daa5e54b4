"""Pauli-sum Hamiltonians: the TFIM builder, energy/variance, exact eigensolvers.

The transverse-field Ising model used throughout is
    H = jz * sum_<ij> Z_i Z_j  +  hx * sum_i X_i
over the nearest-neighbor bonds of a periodic hypercubic lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import LatticeSpec, edges
from .statevector import PauliString, StateVector, _view1, parity_signs

DENSE_MAX_QUBITS = 10  # dense eigensolver above this is wasteful; Lanczos takes over
LANCZOS_DEFAULT_MAX_ITER = 500
LANCZOS_DEFAULT_TOL = 1e-8
_LANCZOS_BLOCK = 80  # Krylov block size per restart cycle


class NormalizationUndefinedError(ValueError):
    """Raised when the <H>^2 normalization of the energy variance is undefined."""


class LanczosConvergenceError(RuntimeError):
    """Lanczos failed to reach the residual tolerance within the iteration budget."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def _term_action(n_qubits: int, pauli: PauliString):
    """Canonical action P|b> = phase * signs[b] * |b ^ flip>."""
    mx, my, mz = pauli.masks()
    flip = mx | my
    signs = parity_signs(n_qubits, my | mz)
    phase = 1j ** (my.bit_count() % 4)
    return complex(phase), flip, signs


@dataclass(eq=False)
class PauliSum:
    """Real-coefficient sum of Pauli strings on a fixed qubit register."""

    n_qubits: int
    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        if not 1 <= self.n_qubits:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        terms = tuple((float(c), p) for c, p in self.terms)
        if not terms:
            raise ValueError("PauliSum needs at least one term")
        for c, p in terms:
            if not math.isfinite(c):
                raise ValueError(f"non-finite coefficient {c}")
            if p.max_site >= self.n_qubits:
                raise ValueError(f"site {p.max_site} out of range for {self.n_qubits} qubits")
        self.terms = terms
        self._ops = None

    def _compiled(self):
        # Lazily folds all diagonal (X/Y-free) terms into one real diagonal and
        # special-cases single-site X terms; everything else stays generic.
        if self._ops is None:
            diag = None
            xsites: list[tuple[int, float]] = []
            generic: list[tuple[complex, int, np.ndarray]] = []
            for c, p in self.terms:
                mx, my, mz = p.masks()
                if mx == 0 and my == 0:
                    contrib = c * parity_signs(self.n_qubits, mz)
                    diag = contrib if diag is None else diag + contrib
                elif my == 0 and mz == 0 and mx.bit_count() == 1:
                    xsites.append((mx.bit_length() - 1, c))
                else:
                    phase, flip, signs = _term_action(self.n_qubits, p)
                    generic.append((c * phase, flip, signs))
            self._ops = (diag, tuple(xsites), tuple(generic))
        return self._ops


def build_tfim(lat: LatticeSpec, jz: float, hx: float) -> PauliSum:
    """TFIM Pauli sum; ZZ bond terms first (edge order), then per-site X terms."""
    jz, hx = float(jz), float(hx)
    if not (math.isfinite(jz) and math.isfinite(hx)):
        raise ValueError(f"couplings must be finite, got jz={jz}, hx={hx}")
    terms = [(jz, PauliString(((a, "Z"), (b, "Z")))) for a, b in edges(lat)]
    terms += [(hx, PauliString(((q, "X"),))) for q in range(lat.n_sites)]
    return PauliSum(lat.n_sites, tuple(terms))


def apply_hamiltonian(h: PauliSum, state: StateVector) -> StateVector:
    """H|state> as a new (generally unnormalized) state."""
    if h.n_qubits != state.n_qubits:
        raise ValueError(f"qubit count mismatch: {h.n_qubits} vs {state.n_qubits}")
    diag, xsites, generic = h._compiled()
    amps = state.amps
    out = np.zeros_like(amps)
    if diag is not None:
        out += diag * amps
    for q, c in xsites:
        v = _view1(amps, q)
        o = _view1(out, q)
        o[:, 0, :] += c * v[:, 1, :]
        o[:, 1, :] += c * v[:, 0, :]
    if generic:
        idx = np.arange(amps.size, dtype=np.int64)
        for coeff, flip, signs in generic:
            out += coeff * (signs * amps)[idx ^ flip]
    return StateVector(state.n_qubits, out)


def energy(h: PauliSum, state: StateVector) -> float:
    """<state|H|state> (real by Hermiticity), without materializing H|state>."""
    if h.n_qubits != state.n_qubits:
        raise ValueError(f"qubit count mismatch: {h.n_qubits} vs {state.n_qubits}")
    diag, xsites, generic = h._compiled()
    amps = state.amps
    e = 0.0
    if diag is not None:
        probs = amps.real * amps.real + amps.imag * amps.imag
        e += float(np.dot(diag, probs))
    for q, c in xsites:
        v = _view1(amps, q)
        e += 2.0 * c * float(np.vdot(v[:, 0, :], v[:, 1, :]).real)
    if generic:
        idx = np.arange(amps.size, dtype=np.int64)
        for coeff, flip, signs in generic:
            e += float((coeff * np.vdot(amps[idx ^ flip], signs * amps)).real)
    return e


def energy_variance(h: PauliSum, state: StateVector, *, mean_guard: float = 1e-9) -> float:
    """Normalized variance (<H^2> - <H>^2) / <H>^2, with <H^2> = ||H|state>||^2.

    Raises NormalizationUndefinedError when |<H>| <= mean_guard; tiny negative
    results from rounding are clamped to 0.
    """
    hs = apply_hamiltonian(h, state)
    e = float(np.vdot(state.amps, hs.amps).real)
    if abs(e) <= mean_guard:
        raise NormalizationUndefinedError(
            f"<H> = {e:.3e} is within {mean_guard:g} of zero; "
            "the normalized variance is undefined"
        )
    h2 = float(np.vdot(hs.amps, hs.amps).real)
    return max((h2 - e * e) / (e * e), 0.0)


@dataclass(frozen=True)
class EigenPair:
    value: float
    state: StateVector


def eigen_residual(h: PauliSum, pair: EigenPair) -> float:
    """||H|v> - value*|v>||."""
    hs = apply_hamiltonian(h, pair.state)
    return float(np.linalg.norm(hs.amps - pair.value * pair.state.amps))


def dense_matrix(h: PauliSum) -> np.ndarray:
    """Full 2^n x 2^n matrix of the Pauli sum (small n only)."""
    if h.n_qubits > 12:
        raise ValueError(f"dense matrix for {h.n_qubits} qubits is too large")
    dim = 1 << h.n_qubits
    m = np.zeros((dim, dim), dtype=np.complex128)
    idx = np.arange(dim)
    for c, p in h.terms:
        phase, flip, signs = _term_action(h.n_qubits, p)
        m[idx ^ flip, idx] += (c * phase) * signs
    return m


def exact_eigenstates(
    h: PauliSum,
    k: int = 1,
    *,
    method: str = "auto",
    max_iter: int = LANCZOS_DEFAULT_MAX_ITER,
    tol: float = LANCZOS_DEFAULT_TOL,
    seed: int = 0,
    v0=None,
) -> tuple[EigenPair, ...]:
    """The k lowest eigenpairs, ascending.  method: auto | dense | lanczos.

    "auto" uses the dense solver up to 10 qubits and matrix-free Lanczos above.
    `v0` optionally seeds the first Lanczos start vector.  In a degenerate
    ground space the returned states are an arbitrary orthonormal basis of it.
    """
    if not 1 <= k <= 4:
        raise ValueError(f"k must be in [1, 4], got {k}")
    dim = 1 << h.n_qubits
    if k > dim:
        raise ValueError(f"k={k} exceeds the Hilbert space dimension {dim}")
    if method == "auto":
        method = "dense" if h.n_qubits <= DENSE_MAX_QUBITS else "lanczos"
    if method == "dense":
        w, v = np.linalg.eigh(dense_matrix(h))
        pairs = tuple(
            EigenPair(float(w[i]), StateVector(h.n_qubits, v[:, i].copy()))
            for i in range(k)
        )
    elif method == "lanczos":
        pairs = _lanczos_lowest(h, k, max_iter=max_iter, tol=tol, seed=seed, v0=v0)
    else:
        raise ValueError(f"unknown method {method!r}")
    for pair in pairs:
        r = eigen_residual(h, pair)
        if r > max(tol, 1e-8):
            raise LanczosConvergenceError(
                f"eigenpair residual {r:.3e} exceeds {max(tol, 1e-8):g}", r
            )
    return pairs


def _lanczos_lowest(h: PauliSum, k: int, *, max_iter, tol, seed, v0):
    rng = np.random.default_rng(seed)
    dim = 1 << h.n_qubits
    locked: list[np.ndarray] = []
    found: list[EigenPair] = []
    for j in range(k):
        start = None
        if j == 0 and v0 is not None:
            start = np.asarray(v0, dtype=np.complex128).reshape(dim).copy()
        val, vec = _lanczos_ground(
            h, dim, locked, start=start, tol=tol, max_iter=max_iter, rng=rng
        )
        found.append(EigenPair(val, StateVector(h.n_qubits, vec)))
        locked.append(vec)
    found.sort(key=lambda p: p.value)
    return tuple(found)


def _lanczos_ground(h, dim, locked, *, start, tol, max_iter, rng):
    """Restarted Lanczos with full reorthogonalization for the lowest eigenpair
    orthogonal to `locked`.  max_iter bounds the total matrix-vector products."""

    def matvec(vec):
        return apply_hamiltonian(h, StateVector(h.n_qubits, vec)).amps

    def project_out(w):
        for u in locked:
            w -= np.vdot(u, w) * u

    def fresh_start():
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        project_out(v)
        return v / np.linalg.norm(v)

    if start is None:
        q = fresh_start()
    else:
        q = start.astype(np.complex128, copy=True)
        project_out(q)
        nrm = np.linalg.norm(q)
        q = q / nrm if nrm > 1e-12 else fresh_start()

    block = min(_LANCZOS_BLOCK, dim)
    matvecs = 0
    best_res = math.inf
    prev_res = math.inf
    while matvecs < max_iter:
        basis = np.zeros((block, dim), dtype=np.complex128)
        basis[0] = q
        alphas: list[float] = []
        betas: list[float] = []
        m = 0
        broke_down = False
        for j in range(block):
            if matvecs >= max_iter:
                break
            w = matvec(basis[j])
            matvecs += 1
            alpha = float(np.vdot(basis[j], w).real)
            alphas.append(alpha)
            w -= alpha * basis[j]
            if j > 0:
                w -= betas[j - 1] * basis[j - 1]
            for _ in range(2):  # full reorthogonalization, twice for stability
                project_out(w)
                coeffs = basis[: j + 1].conj() @ w
                w -= coeffs @ basis[: j + 1]
            m = j + 1
            beta = float(np.linalg.norm(w))
            if beta < 1e-12 * max(1.0, abs(alpha)):
                broke_down = True  # exact invariant subspace
                break
            if j + 1 < block:
                betas.append(beta)
                basis[j + 1] = w / beta
        if m == 0:
            break
        tri = np.diag(alphas[:m]).astype(np.float64)
        if m > 1:
            off = np.asarray(betas[: m - 1])
            tri += np.diag(off, 1) + np.diag(off, -1)
        _, y = np.linalg.eigh(tri)
        vec = y[:, 0] @ basis[:m]
        vec /= np.linalg.norm(vec)
        hv = matvec(vec)
        matvecs += 1
        val = float(np.vdot(vec, hv).real)
        res = float(np.linalg.norm(hv - val * vec))
        best_res = min(best_res, res)
        if res <= tol:
            return val, vec
        q = vec
        if broke_down or res > 0.99 * prev_res:
            # stalled restart: kick with a small random orthogonal component
            q = q + 0.01 * fresh_start()
        prev_res = res
        project_out(q)
        q /= np.linalg.norm(q)
    raise LanczosConvergenceError(
        f"Lanczos did not converge: best residual {best_res:.3e} after "
        f"{matvecs} matrix-vector products (tol {tol:g})",
        best_res,
    )
