"""Dense simulation of QSVT matrix inversion for impurity-model Green's functions."""
from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .errors import ConvergenceError, ResourceError, SingularValueWarning, ValidationError
from .pauli import (ComplexFrequency, GroundState, PauliSum, PauliTerm, SiamParams,
                    analytic_bath_V, dense_matrix, exact_ground_state, jw_ladder,
                    shifted_operators, siam_hamiltonian)
from .lcu import BlockEncoding, CountReport, block_encode, decompose_mc_pauli, gate_counts, prep_state
from .qsp import OddPolynomial, PhaseVector, find_phases, inverse_poly, qsp_unitary, to_qsvt_phases
from .qsvt import apply_inverse, build_qsvt, extract_block, singular_floor
from .greens import (GreensResult, Solver, bethe_dos, dmft_loop, greens_matrix, mott_scan,
                     quasiparticle_weight, self_energy, spectral_function, spectral_scan)

__all__ = [
    "ConvergenceError", "ResourceError", "SingularValueWarning", "ValidationError",
    "ComplexFrequency", "GroundState", "PauliSum", "PauliTerm", "SiamParams", "analytic_bath_V",
    "dense_matrix", "exact_ground_state", "jw_ladder", "shifted_operators", "siam_hamiltonian",
    "BlockEncoding", "CountReport", "block_encode", "decompose_mc_pauli", "gate_counts",
    "prep_state", "OddPolynomial", "PhaseVector", "find_phases", "inverse_poly", "qsp_unitary",
    "to_qsvt_phases", "apply_inverse", "build_qsvt", "extract_block", "singular_floor",
    "GreensResult", "Solver", "bethe_dos", "dmft_loop", "greens_matrix", "mott_scan",
    "quasiparticle_weight", "self_energy", "spectral_function", "spectral_scan",
]
