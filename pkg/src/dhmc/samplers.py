"""Markov transition kernels built on the integrators, plus the chain driver.

Kernels
-------

- ``dhmc``: stepsize and path length drawn fresh each iteration, momentum
  refreshed, one permutation shared by the whole trajectory.  With an empty
  smooth block the proposal conserves the Hamiltonian exactly and is accepted
  with probability one; with a smooth block present a standard
  Metropolis-Hastings test on the energy error decides.
- ``dhmc_coordwise``: the same kernel with every coordinate forced onto the
  Laplace block, so only potential differences are ever needed.  One
  integration step of it is exactly a random-scan Metropolis-within-Gibbs
  pass, which is what the ``mwg`` kernel exposes directly.
- ``mwg``: random-scan Metropolis-within-Gibbs with the symmetric proposal
  theta_j +- eps / m_j.  Implemented through the same coordinate sweep: the
  comparison |p_j| / m_j > dU with Laplace-distributed p_j is the Metropolis
  test with -log(uniform) realized as |p_j| / m_j.  A momentum flip is a
  rejection.
- ``rwm``: random-walk Metropolis with a Gaussian proposal of configurable
  covariance.
- ``hmc``: leapfrog trajectories with a Metropolis correction; smooth targets
  only.

Randomness is consumed in a fixed order (stepsize, path length jitter,
momentum, permutation, acceptance), and draws that would be degenerate are
skipped entirely, so matched configurations of different kernels can be
coupled draw for draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (ConfigError, ContractError, MassSpec, ModelError,
                   PhaseState, TargetModel, kinetic_energy, sample_momentum)
from .integrators import (SweepOrder, _dhmc_step_inplace, _grad_checked,
                          _mass_lookup, _sweep_inplace)
from .tuning import TuneState, adapt_stepsize, mass_from_state

__all__ = ["SamplerConfig", "KernelTrace", "SampleStore", "KERNELS",
           "dhmc_transition", "mwg_transition", "rwm_transition",
           "hmc_transition", "run_chain"]

KERNELS = ("dhmc", "dhmc_coordwise", "hmc", "mwg", "rwm")

# Stepsize adaptation steers the move fraction (or acceptance rate) here
# unless the configuration overrides the target.
DEFAULT_TARGET_STAT = {
    "dhmc": 0.8,
    "dhmc_coordwise": 0.8,
    "hmc": 0.8,
    "mwg": 0.44,
    "rwm": 0.234,
}


@dataclass(frozen=True)
class SamplerConfig:
    """Settings for one chain.

    ``eps_range`` is the (min, max) stepsize jitter window; leave it None to
    let warmup adaptation find a stepsize, in which case the sampling phase
    uses Uniform(0.8 e, e) around the adapted value e.  ``path_len`` is either
    an integer L, jittered over {ceil(0.9 L) .. L} per trajectory, or an
    explicit (min, max) pair; (L, L) disables the jitter.  ``mass`` of None
    means unit masses, re-estimated halfway through warmup when ``tune_mass``
    is on.  ``tune_eps``/``tune_mass`` of None resolve to "tune whatever was
    not given explicitly".
    """

    kernel: str = "dhmc"
    eps_range: tuple | None = None
    path_len: int | tuple = 1
    mass: MassSpec | None = None
    seed: int | None = None
    n_samples: int = 1000
    n_warmup: int = 500
    target_stat: float | None = None
    tune_eps: bool | None = None
    tune_mass: bool | None = None
    rwm_cov: np.ndarray | None = None

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ConfigError(f"unknown kernel {self.kernel!r}; choose from {KERNELS}")
        if self.eps_range is not None:
            try:
                lo, hi = self.eps_range
            except (TypeError, ValueError):
                raise ConfigError("eps_range must be a (min, max) pair") from None
            if not (0.0 < lo <= hi) or not math.isfinite(hi):
                raise ConfigError(
                    f"eps_range must satisfy 0 < min <= max, got ({lo}, {hi})")
            object.__setattr__(self, "eps_range", (float(lo), float(hi)))
        if isinstance(self.path_len, (tuple, list)):
            lo, hi = self.path_len
            if not (1 <= lo <= hi):
                raise ConfigError(f"path_len range must satisfy 1 <= min <= max, got ({lo}, {hi})")
            object.__setattr__(self, "path_len", (int(lo), int(hi)))
        elif int(self.path_len) < 1:
            raise ConfigError(f"path_len must be >= 1, got {self.path_len}")
        else:
            object.__setattr__(self, "path_len", int(self.path_len))
        if self.n_samples < 0 or self.n_warmup < 0:
            raise ConfigError("n_samples and n_warmup must be nonnegative")
        if self.target_stat is not None and not 0.0 < self.target_stat < 1.0:
            raise ConfigError(f"target_stat must lie in (0, 1), got {self.target_stat}")

    def resolved_tune_eps(self) -> bool:
        if self.tune_eps is None:
            return self.eps_range is None
        return bool(self.tune_eps)

    def resolved_tune_mass(self) -> bool:
        if self.tune_mass is None:
            return self.mass is None
        return bool(self.tune_mass)

    def resolved_target(self) -> float:
        if self.target_stat is not None:
            return self.target_stat
        return DEFAULT_TARGET_STAT[self.kernel]

    def path_len_range(self) -> tuple:
        if isinstance(self.path_len, tuple):
            return self.path_len
        return (math.ceil(0.9 * self.path_len), self.path_len)


@dataclass(frozen=True)
class KernelTrace:
    """Per-iteration kernel bookkeeping.

    ``flips`` counts momentum reflections, which for the Gibbs-style kernels
    equal per-coordinate rejections; ``coord_updates`` is the number of
    coordinate-wise updates attempted (zero for rwm/hmc); ``potential_evals``
    counts potential, potential-difference and gradient calls.
    """

    accepted: bool
    delta_H: float
    flips: int
    potential_evals: int
    eps_used: float
    coord_updates: int = 0
    path_len_used: int = 0
    diverged: bool = False


def _draw_eps(rng: np.random.Generator, eps_range) -> float:
    lo, hi = eps_range
    return float(rng.uniform(lo, hi))


def _draw_path_len(rng: np.random.Generator, lo: int, hi: int) -> int:
    # A degenerate range consumes no randomness, so L=1 kernels stay
    # stream-for-stream couplable with Metropolis-within-Gibbs.
    if hi > lo:
        return int(rng.integers(lo, hi + 1))
    return int(lo)


def _dhmc_move(model, state, rng, eps_range, path_range, mass, u_current):
    """One dhmc transition; returns (state, trace, cached potential)."""
    eps = _draw_eps(rng, eps_range)
    L = _draw_path_len(rng, *path_range)
    smooth = state.smooth_idx
    disc = state.disc_idx
    p = sample_momentum(rng, mass, smooth, disc)
    order = SweepOrder.draw(rng, disc)
    theta = state.theta.copy()
    pv = p.copy()
    m_by, minv_by = _mass_lookup(mass, disc, state.dim)
    flips = 0
    evals = 0
    updates = L * len(disc)

    if len(smooth) == 0:
        # Energy is conserved exactly, so the proposal is accepted with
        # probability one and no potential value is ever needed.
        for _ in range(L):
            f, e = _sweep_inplace(model, theta, pv, order.perm, eps, m_by, minv_by)
            flips += f
            evals += e
        new = PhaseState(theta, pv, smooth, disc)
        trace = KernelTrace(accepted=True, delta_H=0.0, flips=flips,
                            potential_evals=evals, eps_used=eps,
                            coord_updates=updates, path_len_used=L)
        return new, trace, u_current

    if u_current is None:
        u_current = float(model.potential(state.theta))
        evals += 1
        if u_current != u_current:
            raise ModelError(f"{model.name} returned NaN potential")
    k0 = kinetic_energy(p, mass, smooth, disc)
    u_end = None
    for _ in range(L):
        f, e, diverged, u_end = _dhmc_step_inplace(
            model, theta, pv, smooth, mass, eps, order.perm, m_by, minv_by)
        flips += f
        evals += e
        if diverged:
            trace = KernelTrace(accepted=False, delta_H=np.inf, flips=flips,
                                potential_evals=evals, eps_used=eps,
                                coord_updates=updates, path_len_used=L,
                                diverged=True)
            return state, trace, u_current
    k1 = kinetic_energy(pv, mass, smooth, disc)
    delta_h = (u_end + k1) - (u_current + k0)
    if np.log(rng.uniform()) < -delta_h:
        new = PhaseState(theta, pv, smooth, disc)
        trace = KernelTrace(accepted=True, delta_H=float(delta_h), flips=flips,
                            potential_evals=evals, eps_used=eps,
                            coord_updates=updates, path_len_used=L)
        return new, trace, u_end
    trace = KernelTrace(accepted=False, delta_H=float(delta_h), flips=flips,
                        potential_evals=evals, eps_used=eps,
                        coord_updates=updates, path_len_used=L)
    return state, trace, u_current


def _mwg_move(model, state, rng, eps_range, mass):
    """One random-scan Metropolis-within-Gibbs pass over all coordinates.

    The coordinate sweep already performs the Metropolis test: with p_j drawn
    Laplace(m_j), the quantity |p_j|/m_j is Exp(1) and the move condition
    |p_j|/m_j > dU accepts with probability min(1, exp(-dU)).
    """
    eps = _draw_eps(rng, eps_range)
    disc = state.disc_idx
    p = sample_momentum(rng, mass, state.smooth_idx, disc)
    order = SweepOrder.draw(rng, disc)
    theta = state.theta.copy()
    pv = p.copy()
    m_by, minv_by = _mass_lookup(mass, disc, state.dim)
    rejects, evals = _sweep_inplace(model, theta, pv, order.perm, eps, m_by, minv_by)
    new = PhaseState(theta, pv, state.smooth_idx, disc)
    trace = KernelTrace(accepted=True, delta_H=0.0, flips=rejects,
                        potential_evals=evals, eps_used=eps,
                        coord_updates=len(disc), path_len_used=1)
    return new, trace


def _proposal_factor(rwm_cov, dim):
    """Left factor A with A A' = covariance; None means identity."""
    if rwm_cov is None:
        return None
    cov = np.asarray(rwm_cov, dtype=float)
    if cov.ndim == 1:
        if cov.shape[0] != dim or np.any(cov < 0):
            raise ConfigError("diagonal rwm_cov must be length dim and nonnegative")
        return np.sqrt(cov)
    if cov.ndim == 2 and cov.shape == (dim, dim):
        try:
            return np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ConfigError("rwm_cov must be positive definite") from exc
    raise ConfigError(f"rwm_cov has shape {cov.shape}, expected ({dim},) or ({dim}, {dim})")


def _rwm_move(model, state, rng, eps_range, factor, u_current):
    eps = _draw_eps(rng, eps_range)
    z = rng.standard_normal(state.dim)
    if factor is None:
        step = eps * z
    elif factor.ndim == 1:
        step = eps * (factor * z)
    else:
        step = eps * (factor @ z)
    prop = state.theta + step
    evals = 0
    if u_current is None:
        u_current = float(model.potential(state.theta))
        evals += 1
        if u_current != u_current:
            raise ModelError(f"{model.name} returned NaN potential")
    u_prop = float(model.potential(prop))
    evals += 1
    if u_prop != u_prop:
        raise ModelError(f"{model.name} returned NaN potential")
    delta = u_prop - u_current
    if np.log(rng.uniform()) < -delta:
        new = PhaseState(prop, state.p, state.smooth_idx, state.disc_idx)
        return new, KernelTrace(True, float(delta), 0, evals, eps), u_prop
    return state, KernelTrace(False, float(delta), 0, evals, eps), u_current


def _hmc_move(model, state, rng, eps_range, path_range, mass, u_current):
    """Leapfrog trajectory with the boundary gradient shared between steps."""
    eps = _draw_eps(rng, eps_range)
    L = _draw_path_len(rng, *path_range)
    smooth = state.smooth_idx
    p = sample_momentum(rng, mass, smooth, state.disc_idx)
    theta = state.theta.copy()
    pv = p.copy()
    evals = 0
    if u_current is None:
        u_current = float(model.potential(state.theta))
        evals += 1
        if u_current != u_current:
            raise ModelError(f"{model.name} returned NaN potential")
    k0 = kinetic_energy(p, mass, smooth, state.disc_idx)
    g = _grad_checked(model, theta)
    evals += 1
    u_end = None
    for _ in range(L):
        pv[smooth] -= 0.5 * eps * g
        theta[smooth] += eps * mass.smooth_velocity(pv[smooth])
        u = float(model.potential(theta))
        evals += 1
        if u != u:
            raise ModelError(f"{model.name} returned NaN potential")
        if u == np.inf:
            trace = KernelTrace(accepted=False, delta_H=np.inf, flips=0,
                                potential_evals=evals, eps_used=eps,
                                path_len_used=L, diverged=True)
            return state, trace, u_current
        g = _grad_checked(model, theta)
        evals += 1
        pv[smooth] -= 0.5 * eps * g
        u_end = u
    k1 = kinetic_energy(pv, mass, smooth, state.disc_idx)
    delta_h = (u_end + k1) - (u_current + k0)
    if np.log(rng.uniform()) < -delta_h:
        new = PhaseState(theta, pv, smooth, state.disc_idx)
        trace = KernelTrace(True, float(delta_h), 0, evals, eps, path_len_used=L)
        return new, trace, u_end
    trace = KernelTrace(False, float(delta_h), 0, evals, eps, path_len_used=L)
    return state, trace, u_current


def _require_eps_range(cfg: SamplerConfig):
    if cfg.eps_range is None:
        raise ConfigError("eps_range is required for a direct transition "
                          "(stepsize tuning happens inside run_chain)")
    return cfg.eps_range


def _mass_or_unit(cfg, state):
    mass = cfg.mass
    if mass is None:
        mass = MassSpec.unit(len(state.smooth_idx), len(state.disc_idx))
    mass.check_sizes(len(state.smooth_idx), len(state.disc_idx))
    return mass


def dhmc_transition(model: TargetModel, state: PhaseState, cfg: SamplerConfig,
                    rng: np.random.Generator):
    """One transition of the split-integrator kernel.

    Draws eps ~ Uniform(cfg.eps_range) and a jittered path length, refreshes
    the momentum, runs the trajectory under a single fresh permutation, and
    applies a Metropolis test on the energy error when a smooth block exists.
    Returns (new state, KernelTrace).
    """
    eps_range = _require_eps_range(cfg)
    mass = _mass_or_unit(cfg, state)
    new, trace, _ = _dhmc_move(model, state, rng, eps_range,
                               cfg.path_len_range(), mass, None)
    return new, trace


def mwg_transition(model: TargetModel, state: PhaseState, cfg: SamplerConfig,
                   rng: np.random.Generator):
    """One random-scan Metropolis-within-Gibbs sweep.

    Requires every coordinate on the discontinuous block; proposals are
    theta_j +- eps / m_j with the sign uniform, accepted with probability
    min(1, exp(-dU)).  Consumes randomness in the same order as
    ``dhmc_transition`` with path_len 1, which makes the two kernels
    couplable realization by realization.
    """
    if len(state.smooth_idx):
        raise ContractError("mwg_transition requires an all-discontinuous partition")
    eps_range = _require_eps_range(cfg)
    mass = _mass_or_unit(cfg, state)
    return _mwg_move(model, state, rng, eps_range, mass)


def rwm_transition(model: TargetModel, state: PhaseState, cfg: SamplerConfig,
                   rng: np.random.Generator):
    """One random-walk Metropolis transition with Gaussian proposal.

    The proposal is theta + eps * A z with A A' = cfg.rwm_cov (identity when
    unset) and eps ~ Uniform(cfg.eps_range).
    """
    eps_range = _require_eps_range(cfg)
    factor = _proposal_factor(cfg.rwm_cov, state.dim)
    new, trace, _ = _rwm_move(model, state, rng, eps_range, factor, None)
    return new, trace


def hmc_transition(model: TargetModel, state: PhaseState, cfg: SamplerConfig,
                   rng: np.random.Generator):
    """One leapfrog-trajectory transition; smooth targets only."""
    if len(state.disc_idx):
        raise ContractError("hmc_transition requires an all-smooth partition")
    eps_range = _require_eps_range(cfg)
    mass = _mass_or_unit(cfg, state)
    new, trace, _ = _hmc_move(model, state, rng, eps_range,
                              cfg.path_len_range(), mass, None)
    return new, trace


@dataclass
class SampleStore:
    """Column-wise draws plus everything needed to interpret and score them.

    ``draws`` holds raw sampling-space values; embedded discrete coordinates
    decode through ``embeddings``.  ``potential_evals`` counts sampling-phase
    model work only, warmup work is reported separately.
    """

    names: list
    draws: np.ndarray
    smooth_idx: np.ndarray
    disc_idx: np.ndarray
    embeddings: dict
    traces: list
    kernel: str
    eps_range: tuple
    mass: MassSpec
    divergences: int = 0
    potential_evals: int = 0
    warmup_evals: int = 0
    warmup_divergences: int = 0
    warnings: list = field(default_factory=list)
    seed: int | None = None

    @property
    def n_samples(self) -> int:
        return self.draws.shape[0]

    @property
    def dim(self) -> int:
        return self.draws.shape[1]

    def column(self, i: int) -> np.ndarray:
        return self.draws[:, i]

    def decoded_column(self, i: int) -> np.ndarray:
        """Column i with embedded coordinates decoded to their integers."""
        col = self.draws[:, i]
        emap = self.embeddings.get(i)
        if emap is None:
            return col
        return emap.decode(col).astype(float)

    def decoded_draws(self) -> np.ndarray:
        out = np.empty_like(self.draws)
        for i in range(self.dim):
            out[:, i] = self.decoded_column(i)
        return out

    def acceptance_rate(self) -> float:
        if not self.traces:
            return float("nan")
        return sum(t.accepted for t in self.traces) / len(self.traces)

    def move_fraction(self) -> float:
        """1 - flips per coordinate update over the sampling phase."""
        updates = sum(t.coord_updates for t in self.traces)
        if updates == 0:
            return float("nan")
        flips = sum(t.flips for t in self.traces)
        return 1.0 - flips / updates

    def mean_path_len(self) -> float:
        if not self.traces:
            return float("nan")
        return float(np.mean([t.path_len_used for t in self.traces]))


def _resolve_partition(model: TargetModel, kernel: str):
    d = model.dim
    if kernel in ("dhmc_coordwise", "mwg"):
        return np.array([], dtype=np.intp), np.arange(d, dtype=np.intp)
    if kernel == "hmc":
        if len(model.disc_idx):
            raise ConfigError(
                f"hmc requires an all-smooth target, {model.name} declares "
                f"{len(model.disc_idx)} discontinuous coordinates")
        return np.arange(d, dtype=np.intp), np.array([], dtype=np.intp)
    return (np.asarray(model.smooth_idx, dtype=np.intp),
            np.asarray(model.disc_idx, dtype=np.intp))


def _iteration_statistic(trace: KernelTrace) -> float:
    """Move fraction for sweep kernels, acceptance for trajectory kernels.

    For mixed targets both constraints bind, so the minimum is adapted: the
    stepsize shrinks when either the sweep flips too often or the smooth
    block rejects too often.
    """
    stat = 1.0 if trace.accepted else 0.0
    if trace.coord_updates:
        stat = min(stat, 1.0 - trace.flips / trace.coord_updates)
    return stat


def run_chain(model: TargetModel, init, cfg: SamplerConfig,
              rng: np.random.Generator | None = None) -> SampleStore:
    """Warmup, adapt, then collect ``cfg.n_samples`` draws from one chain.

    ``init`` may be a PhaseState, a bare theta vector, or None to start from
    ``model.initial_theta``.  Warmup adapts the stepsize by stochastic
    approximation toward the kernel's target statistic and re-estimates
    diagonal masses halfway through (when enabled); the sampling-phase kernel
    is frozen.  Fully deterministic given the rng.

    Returns a SampleStore; per-iteration traces cover the sampling phase.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    smooth, disc = _resolve_partition(model, cfg.kernel)
    if isinstance(init, PhaseState):
        theta0 = np.array(init.theta, dtype=float)
    elif init is None:
        theta0 = np.asarray(model.initial_theta(rng), dtype=float)
    else:
        theta0 = np.array(init, dtype=float)
    if theta0.shape != (model.dim,):
        raise ConfigError(f"initial point has shape {theta0.shape}, "
                          f"expected ({model.dim},)")
    state = PhaseState(theta0, np.zeros(model.dim), smooth, disc)
    u0 = float(model.potential(state.theta))
    if not np.isfinite(u0):
        raise ConfigError("initial point has non-finite potential")

    mass = cfg.mass
    if mass is None:
        mass = MassSpec.unit(len(smooth), len(disc))
    mass.check_sizes(len(smooth), len(disc))
    factor = _proposal_factor(cfg.rwm_cov, model.dim) if cfg.kernel == "rwm" else None

    tune_eps = cfg.resolved_tune_eps()
    tune_mass = cfg.resolved_tune_mass()
    if cfg.eps_range is not None:
        lo, hi = cfg.eps_range
        eps0 = 0.5 * (lo + hi)
    else:
        if not tune_eps:
            raise ConfigError("eps_range is required when stepsize tuning is off")
        eps0 = 0.1
    ts = TuneState(log_eps=math.log(eps0), target_stat=cfg.resolved_target())

    warnings = []
    path_range = cfg.path_len_range()
    u_cur = u0
    warmup_evals = 1  # the initial-point check above
    warmup_div = 0
    mass_update_at = cfg.n_warmup // 2 if cfg.n_warmup else None
    if cfg.kernel == "rwm" and cfg.rwm_cov is not None:
        tune_mass = False  # an explicit proposal covariance is kept as given

    def move(st, eps_range, cur_mass, cur_factor, u_in):
        if cfg.kernel in ("dhmc", "dhmc_coordwise"):
            return _dhmc_move(model, st, rng, eps_range, path_range, cur_mass, u_in)
        if cfg.kernel == "mwg":
            new, tr = _mwg_move(model, st, rng, eps_range, cur_mass)
            return new, tr, u_in
        if cfg.kernel == "rwm":
            return _rwm_move(model, st, rng, eps_range, cur_factor, u_in)
        return _hmc_move(model, st, rng, eps_range, path_range, cur_mass, u_in)

    for i in range(cfg.n_warmup):
        eps_range = (ts.eps, ts.eps) if tune_eps else cfg.eps_range
        state, trace, u_cur = move(state, eps_range, mass, factor, u_cur)
        warmup_evals += trace.potential_evals
        warmup_div += trace.diverged
        if tune_eps:
            ts = adapt_stepsize(ts, _iteration_statistic(trace))
        if tune_mass and mass_update_at is not None:
            if i < mass_update_at:
                ts = ts.observe_draw(state.theta)
            elif i == mass_update_at:
                if ts.count >= 10:
                    if cfg.kernel == "rwm":
                        var = ts.variances()
                        var = np.where(var > 0, var, 1.0)
                        factor = np.sqrt(var)
                        # eps now scales per-coordinate sd, so restart near 1
                        if tune_eps:
                            ts = replace(ts, log_eps=math.log(2.4 / math.sqrt(model.dim)))
                    else:
                        mass, mass_warnings = mass_from_state(ts, smooth, disc)
                        warnings.extend(mass_warnings)
                else:
                    warnings.append("too few warmup draws to re-estimate masses")

    if tune_eps:
        final_eps_range = (0.8 * ts.eps, ts.eps)
    else:
        final_eps_range = cfg.eps_range

    draws = np.empty((cfg.n_samples, model.dim))
    traces = []
    divergences = 0
    evals = 0
    for i in range(cfg.n_samples):
        state, trace, u_cur = move(state, final_eps_range, mass, factor, u_cur)
        draws[i] = state.theta
        traces.append(trace)
        divergences += trace.diverged
        evals += trace.potential_evals

    return SampleStore(
        names=list(model.param_names), draws=draws, smooth_idx=smooth,
        disc_idx=disc, embeddings=dict(model.embeddings), traces=traces,
        kernel=cfg.kernel, eps_range=tuple(final_eps_range), mass=mass,
        divergences=divergences, potential_evals=evals,
        warmup_evals=warmup_evals, warmup_divergences=warmup_div,
        warnings=warnings, seed=cfg.seed)
