"""Hamiltonian-style sampling for discontinuous densities and ordinal
discrete parameters.

Discrete parameters are embedded into the real line (``embedding``), momenta
on discontinuous coordinates follow a Laplace distribution whose dynamics are
integrated exactly coordinate by coordinate (``integrators``), and the
resulting proposals are wrapped into transition kernels with warmup
adaptation and diagnostics (``samplers``, ``tuning``, ``diagnostics``).
Bundled targets live in ``dhmc.models``; the ``dhmc`` console script drives
everything from a YAML config.
"""

from .core import (ConfigError, ContractError, DhmcError, EnergyLedger,
                   MassSpec, ModelError, OutOfSupportError, PhaseState,
                   TargetModel, hamiltonian, kinetic_energy, sample_momentum)
from .diagnostics import (ChainSummary, EssReport, batch_means_ess,
                          min_ess_report, summarize)
from .embedding import EmbeddedPrior, EmbeddingMap
from .integrators import (StepOutcome, SweepOrder, coord_step, coord_sweep,
                          dhmc_step, gaussian_event_step, leapfrog_step)
from .samplers import (KERNELS, KernelTrace, SamplerConfig, SampleStore,
                       dhmc_transition, hmc_transition, mwg_transition,
                       run_chain, rwm_transition)
from .tuning import TuneState, adapt_stepsize, estimate_mass, flip_statistic

__version__ = "0.1.0"

__all__ = [
    "ChainSummary", "ConfigError", "ContractError", "DhmcError",
    "EmbeddedPrior", "EmbeddingMap", "EnergyLedger", "EssReport", "KERNELS",
    "KernelTrace", "MassSpec", "ModelError", "OutOfSupportError",
    "PhaseState", "SampleStore", "SamplerConfig", "StepOutcome", "SweepOrder",
    "TargetModel", "TuneState", "adapt_stepsize", "batch_means_ess",
    "coord_step", "coord_sweep", "dhmc_step", "dhmc_transition",
    "estimate_mass", "flip_statistic", "gaussian_event_step", "hamiltonian",
    "hmc_transition", "kinetic_energy", "leapfrog_step", "min_ess_report",
    "mwg_transition", "run_chain", "rwm_transition", "sample_momentum",
    "summarize",
]
