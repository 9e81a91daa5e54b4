"""State-vector VQE benchmarks for the transverse-field Ising model.

Layers: statevector kernels -> lattice/Hamiltonian -> ansatz circuits with
adjoint gradients -> hand-rolled optimizers -> VQE driver, observables,
expressivity sampling, and a CLI that writes deterministic CSV/JSON/SVG.
"""

__version__ = "0.1.0"

from .ansatz import AnsatzFamily, AnsatzSpec, Circuit, build_ansatz, n_ansatz_params
from .hamiltonian import (
    LanczosConvergenceError,
    PauliSum,
    build_tfim,
    exact_eigenstates,
)
from .lattice import LatticeSpec, make_lattice
from .observables import ObservableReport, build_report
from .optimizer import OptOptions, OptResult, cobyla_minimize, lbfgs_minimize
from .statevector import Gate, GateKind, PauliString, StateVector, apply_gate, zero_state
from .vqe import SweepReport, VQEConfig, VQEResult, run_vqe, sweep_field

__all__ = [
    "__version__",
    "AnsatzFamily",
    "AnsatzSpec",
    "Circuit",
    "Gate",
    "GateKind",
    "LanczosConvergenceError",
    "LatticeSpec",
    "ObservableReport",
    "OptOptions",
    "OptResult",
    "PauliString",
    "PauliSum",
    "StateVector",
    "SweepReport",
    "VQEConfig",
    "VQEResult",
    "apply_gate",
    "build_ansatz",
    "build_report",
    "build_tfim",
    "cobyla_minimize",
    "exact_eigenstates",
    "lbfgs_minimize",
    "make_lattice",
    "n_ansatz_params",
    "run_vqe",
    "sweep_field",
    "zero_state",
]
