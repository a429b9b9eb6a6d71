"""Entangled-flux allocation for flex-grid quantum networks.

Models polarization-entanglement distribution links in terms of coincidence
rates and a two-parameter dimensionless noise description, derives per-link
fidelity and entangled-bit-rate optima, and allocates shared frequency
channels plus source flux across many links with a genetic algorithm
validated against exhaustive search.
"""

from .analysis import (LinkOptima, constrained_optimal_flux, count_allocations,
                       critical_noise, ebr_max, ebr_roots,
                       entanglement_possible, fidelity_floor_roots,
                       fidelity_max, golden_section_max, link_optima)
from .errors import (AllocationTooLargeError, EntfluxError,
                     InfeasibleConstraintError, InvalidStateError,
                     NoEntanglementError, ScenarioFormatError,
                     UndefinedVisibilityError)
from .linkmodel import (LinkMetrics, LinkSpec, UserEndpoint, ValidityCheck,
                        accidental_rate_general, accidental_rate_single,
                        check_validity, correlated_rate, ebr_dimensioned,
                        ebr_dimensionless, fidelity_dimensioned,
                        fidelity_dimensionless, noise_param, visibility)
from .optimize import (Allocation, BruteForceResult, FitnessReport, GAConfig,
                       GAResult, NetworkSpec, RunsResult, best_of_runs,
                       brute_force_optimize, constrained_flux_bound, fitness,
                       ga_optimize, ideal_fitness, link_fluxes, network_optima)
from .scenarios import (LinkDef, ScenarioResult, ScenarioSpec, emit_curves,
                        emit_report, format_report, load_scenario,
                        run_scenario, save_scenario)
from .states import (ChannelState, DensityMatrix4, PureState4, Unitary4,
                     bell_psi_minus, fidelity, link_state_general,
                     log_negativity, maximally_mixed, partial_transpose,
                     werner_state)

__version__ = "0.1.0"
