"""Zeno-limit reduction of strongly dissipative Lindblad dynamics.

Full Lindblad evolution and steady states (``lindblad``), the effective model on
the dissipation-free subspace (``zeno``), its classical Markov limit (``markov``)
and brute-force superoperator checks (``dyson``).
"""

from .errors import (ArgumentError, ContractError, DegenerateSpectrumError, IntegrationError,
                     NonUniqueStationaryError, ZenoError)
from .operators import (Operator, TensorSpace, HermitianEigensystem, hermitian_eig, kron, partial_trace,
                        place, SIGMA_X, SIGMA_Y, SIGMA_Z)
from .lindblad import DensityMatrix, LindbladModel, Trajectory, evolve, liouvillian_apply, ness_full
from .zeno import (DissipatorSpectrum, EffectiveModel, TargetSpec, chain_full_model, coeffs_C,
                   compose_two_boundary, dissipator_spectrum_analytic, dissipator_spectrum_numeric,
                   projected_hamiltonian, reduce_hamiltonian, reduce_single_boundary, single_spin_dissipator,
                   xyz_chain_hamiltonian)
from .markov import (MarkovChain, StationaryDistribution, assemble_R_infinity, evolve_populations,
                     markov_rates, stationary_distribution, zeno_ness)
from .config import ScenarioConfig, SweepConfig

__all__ = [name for name in dir() if not name.startswith("_")]
