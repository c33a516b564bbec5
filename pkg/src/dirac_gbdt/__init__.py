"""Direct and inverse spectral problems for discrete self-adjoint Dirac systems
with rational Weyl functions."""
from .errors import *  # noqa: F401,F403
from .gbdt import (AdmissibleTriple, GbdtRecursion, GbdtState, Potential, Signature,
                   dualize, fundamental_explicit, fundamental_product, initial_state,
                   new_admissible_triple, potential, step, transfer)
from .inverse import (Realization, RiccatiSolution, inverse_pipeline, inverse_problem,
                      make_realization, realization_from_triple, solve_riccati,
                      triple_from_realization)
from .stability import PerturbationSpec, StabilityReport, stability_sweep
from .verblunsky import asymptotics_report, halmos_reconstruct, rho_from_potential
from .weyl import WeylEvaluator, weyl_eval, weyl_via_blocks

__version__ = "0.1.0"
