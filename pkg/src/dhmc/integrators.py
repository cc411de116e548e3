"""Energy-exact and splitting integrators for mixed targets.

Three update families live here:

- ``coord_step`` / ``coord_sweep``: coordinate-wise updates for Laplace
  momenta.  A coordinate either jumps by ``eps * sign(p_j) / m_j`` while the
  momentum pays for the change in potential, or bounces (momentum flip) when
  the kinetic budget ``|p_j| / m_j`` does not cover the increase.  Each update
  preserves the Hamiltonian exactly, for any potential.
- ``dhmc_step``: one step of the split integrator, a half kick and half drift
  of the smooth block around a full sweep of the discontinuous block.
- ``gaussian_event_step``: event-driven integration for Gaussian momenta on
  axis-aligned piecewise-constant potentials, refracting or reflecting at each
  cell boundary.

Tunnelling caveat: a coordinate jump can step across a thin high-potential
sliver narrower than ``eps / m_j`` without ever paying for it; choose step
sizes below the smallest feature the potential should resolve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ContractError, MassSpec, ModelError, PhaseState, TargetModel

__all__ = [
    "StepOutcome", "SweepOrder", "coord_step", "coord_sweep", "dhmc_step",
    "leapfrog_step", "gaussian_event_step",
]


@dataclass(frozen=True)
class StepOutcome:
    """New state plus counters accumulated while producing it.

    ``potential_evals`` counts model work: one per ``potential`` or
    ``potential_diff`` call and one per ``grad_smooth`` call.  ``flips``
    counts momentum reflections, ``events`` counts boundary events of the
    event-driven integrator, ``diverged`` flags a smooth drift that left the
    support (the caller should reject the trajectory).
    """

    state: PhaseState
    flips: int = 0
    potential_evals: int = 0
    events: int = 0
    diverged: bool = False


@dataclass(frozen=True)
class SweepOrder:
    """Permutation of the discontinuous coordinates used by one trajectory.

    Drawn uniformly, so the order and its reverse are equally likely, which is
    what makes the randomised sweep reversible in distribution.
    """

    perm: np.ndarray

    def __post_init__(self):
        perm = np.array(self.perm, dtype=np.intp)
        if perm.ndim != 1:
            raise ContractError("perm must be a 1-d array of coordinate indices")
        perm.setflags(write=False)
        object.__setattr__(self, "perm", perm)

    @classmethod
    def draw(cls, rng: np.random.Generator, disc_idx) -> "SweepOrder":
        # copy up front: permutation chokes on empty read-only input
        return cls(perm=rng.permutation(np.array(disc_idx, dtype=np.intp)))

    def reversed(self) -> "SweepOrder":
        return SweepOrder(perm=self.perm[::-1])


def _mass_lookup(mass: MassSpec, disc_idx: np.ndarray, d: int):
    """Full-length mass and inverse-mass arrays indexed by coordinate."""
    m_by = np.full(d, np.nan)
    m_by[disc_idx] = mass.m_disc
    return m_by, 1.0 / m_by


def _sweep_inplace(model, theta, p, order, eps, m_by, minv_by):
    """Run coordinate updates in ``order``, mutating theta and p.

    Returns (flips, potential_evals).  Precondition: potential(theta) finite.
    """
    flips = 0
    evals = 0
    diff = model.potential_diff
    if diff is not None:
        for j in order:
            pj = p[j]
            s = 1.0 if pj >= 0 else -1.0
            minv = minv_by[j]
            new = theta[j] + eps * s * minv
            du = diff(theta, j, new)
            evals += 1
            if du != du:
                raise ModelError(f"{model.name} returned NaN potential_diff")
            if abs(pj) * minv > du:
                theta[j] = new
                p[j] = pj - s * m_by[j] * du
            else:
                p[j] = -pj
                flips += 1
    else:
        pot = model.potential
        for j in order:
            pj = p[j]
            s = 1.0 if pj >= 0 else -1.0
            minv = minv_by[j]
            new = theta[j] + eps * s * minv
            old = theta[j]
            u0 = pot(theta)
            theta[j] = new
            u1 = pot(theta)
            evals += 2
            du = u1 - u0
            if du != du:
                raise ModelError(f"{model.name} returned NaN potential")
            if abs(pj) * minv > du:
                p[j] = pj - s * m_by[j] * du
            else:
                theta[j] = old
                p[j] = -pj
                flips += 1
    return flips, evals


def _grad_checked(model, theta):
    g = model.grad_smooth(theta)
    g = np.asarray(g, dtype=float)
    if np.any(np.isnan(g)):
        raise ModelError(f"{model.name} returned NaN gradient")
    return g


def _dhmc_step_inplace(model, theta, p, smooth, mass, eps, order, m_by, minv_by):
    """One split-integrator step, mutating theta and p.

    Returns (flips, evals, diverged, u_end) where u_end is the potential at
    the final position when the smooth block is non-empty (None otherwise);
    callers reuse it for the acceptance test.
    """
    evals = 0
    flips = 0
    half = 0.5 * eps
    if len(smooth):
        p[smooth] -= half * _grad_checked(model, theta)
        evals += 1
        theta[smooth] += half * mass.smooth_velocity(p[smooth])
        u_mid = model.potential(theta)
        evals += 1
        if u_mid != u_mid:
            raise ModelError(f"{model.name} returned NaN potential")
        if u_mid == np.inf:
            return flips, evals, True, None
    if len(order):
        f, e = _sweep_inplace(model, theta, p, order, eps, m_by, minv_by)
        flips += f
        evals += e
    if len(smooth):
        theta[smooth] += half * mass.smooth_velocity(p[smooth])
        u_end = model.potential(theta)
        evals += 1
        if u_end != u_end:
            raise ModelError(f"{model.name} returned NaN potential")
        if u_end == np.inf:
            return flips, evals, True, None
        p[smooth] -= half * _grad_checked(model, theta)
        evals += 1
        return flips, evals, False, float(u_end)
    return flips, evals, False, None


def _check_step_args(model, state: PhaseState, mass: MassSpec):
    if model.dim != state.dim:
        raise ContractError("model dimension does not match the state")
    mass.check_sizes(len(state.smooth_idx), len(state.disc_idx))


def coord_step(model: TargetModel, state: PhaseState, j: int, eps: float,
               mass: MassSpec) -> StepOutcome:
    """Single coordinate update of coordinate j (must lie in disc_idx).

    Proposes theta_j + eps * sign(p_j) / m_j; the move happens when
    |p_j| / m_j exceeds the potential increase, with the momentum reduced by
    m_j * dU, otherwise p_j is flipped in place.  Ties bounce, sign(0) = +1,
    an infinite dU always bounces.  Precondition: potential(theta) is finite.
    """
    _check_step_args(model, state, mass)
    if eps <= 0:
        raise ContractError("eps must be positive")
    if j not in set(int(i) for i in state.disc_idx):
        raise ContractError(f"coordinate {j} is not in disc_idx")
    theta = state.theta.copy()
    p = state.p.copy()
    m_by, minv_by = _mass_lookup(mass, state.disc_idx, state.dim)
    flips, evals = _sweep_inplace(model, theta, p, np.array([j], dtype=np.intp),
                                  eps, m_by, minv_by)
    out = PhaseState(theta, p, state.smooth_idx, state.disc_idx)
    return StepOutcome(state=out, flips=flips, potential_evals=evals)


def coord_sweep(model: TargetModel, state: PhaseState, order: SweepOrder,
                eps: float, mass: MassSpec) -> StepOutcome:
    """Apply coord_step to every coordinate of ``order`` in sequence.

    Preserves the Hamiltonian exactly regardless of the potential, which is
    why no acceptance test is needed downstream.
    """
    _check_step_args(model, state, mass)
    if eps <= 0:
        raise ContractError("eps must be positive")
    disc = set(int(i) for i in state.disc_idx)
    if any(int(j) not in disc for j in order.perm):
        raise ContractError("sweep order must only visit disc_idx coordinates")
    theta = state.theta.copy()
    p = state.p.copy()
    m_by, minv_by = _mass_lookup(mass, state.disc_idx, state.dim)
    flips, evals = _sweep_inplace(model, theta, p, order.perm, eps, m_by, minv_by)
    out = PhaseState(theta, p, state.smooth_idx, state.disc_idx)
    return StepOutcome(state=out, flips=flips, potential_evals=evals)


def dhmc_step(model: TargetModel, state: PhaseState, eps: float, mass: MassSpec,
              order: SweepOrder) -> StepOutcome:
    """One step of the split integrator.

    Half kick and half drift of the smooth block, a full coordinate sweep of
    the discontinuous block, then the mirror half drift and half kick.  With
    an empty discontinuous block this is exactly one velocity-Verlet step;
    with an empty smooth block it is exactly ``coord_sweep``.  A drift that
    lands outside the support marks the outcome divergent and stops early.
    """
    _check_step_args(model, state, mass)
    if eps <= 0:
        raise ContractError("eps must be positive")
    theta = state.theta.copy()
    p = state.p.copy()
    m_by, minv_by = _mass_lookup(mass, state.disc_idx, state.dim)
    flips, evals, diverged, _ = _dhmc_step_inplace(
        model, theta, p, state.smooth_idx, mass, eps, order.perm, m_by, minv_by)
    if diverged:
        return StepOutcome(state=state, flips=flips, potential_evals=evals,
                           diverged=True)
    out = PhaseState(theta, p, state.smooth_idx, state.disc_idx)
    return StepOutcome(state=out, flips=flips, potential_evals=evals)


def leapfrog_step(model: TargetModel, state: PhaseState, eps: float,
                  mass: MassSpec) -> StepOutcome:
    """Classic velocity-Verlet step treating every coordinate as smooth.

    Requires a model whose coordinates are all declared smooth; exact for
    linear potentials, second-order accurate for smooth ones, and silently
    wrong across discontinuities, which is the failure mode the
    coordinate-wise updates exist to fix.
    """
    if len(state.disc_idx):
        raise ContractError("leapfrog_step requires an all-smooth partition")
    _check_step_args(model, state, mass)
    if eps <= 0:
        raise ContractError("eps must be positive")
    theta = state.theta.copy()
    p = state.p.copy()
    smooth = state.smooth_idx
    p[smooth] -= 0.5 * eps * _grad_checked(model, theta)
    theta[smooth] += eps * mass.smooth_velocity(p[smooth])
    u = model.potential(theta)
    if u != u:
        raise ModelError(f"{model.name} returned NaN potential")
    evals = 3
    if u == np.inf:
        return StepOutcome(state=state, flips=0, potential_evals=evals,
                           diverged=True)
    p[smooth] -= 0.5 * eps * _grad_checked(model, theta)
    out = PhaseState(theta, p, state.smooth_idx, state.disc_idx)
    return StepOutcome(state=out, flips=0, potential_evals=evals)


def gaussian_event_step(model, state: PhaseState, eps: float) -> StepOutcome:
    """Advance Gaussian-momentum dynamics on an axis-aligned grid potential.

    The model must expose ``axis_maps`` (knot sequences per axis) and
    ``cell_potential(cells)``; between boundaries the motion is linear with
    unit mass.  At a boundary crossing along axis i the momentum refracts,
    p_i <- sign(p_i) sqrt(p_i^2 - 2 dU), when p_i^2 / 2 > dU and reflects,
    p_i <- -p_i, otherwise; an infinite dU always reflects.  Simultaneous
    events (within 1e-12 of each other) are processed in ascending axis
    order.  Energy is conserved exactly up to rounding.
    """
    if not hasattr(model, "axis_maps") or not hasattr(model, "cell_potential"):
        raise ContractError(
            f"{getattr(model, 'name', 'model')} does not expose an axis grid")
    if eps <= 0:
        raise ContractError("eps must be positive")
    theta = state.theta.copy()
    p = state.p.copy()
    d = state.dim
    maps = model.axis_maps
    if len(maps) != d:
        raise ContractError("axis grid dimension does not match the state")
    cells = [maps[i].cell_of(theta[i]) for i in range(d)]
    u_here = model.cell_potential(cells)
    evals = 1
    if not np.isfinite(u_here):
        raise ContractError("start position must have finite potential")

    events = 0
    flips = 0
    remaining = float(eps)
    while remaining > 0.0:
        # Time to the next boundary along each moving axis; clamp tiny
        # negative values from rounding so overshoots fire immediately.
        t_hit = np.full(d, np.inf)
        for i in range(d):
            pi = p[i]
            knots = maps[i].knots
            ci = cells[i]
            if pi > 0.0:
                t_hit[i] = max((knots[ci + 1] - theta[i]) / pi, 0.0)
            elif pi < 0.0:
                t_hit[i] = max((knots[ci] - theta[i]) / pi, 0.0)
        i = int(np.argmin(t_hit))
        t_min = float(t_hit[i])
        if t_min >= remaining:
            theta += remaining * p
            break
        # Advance to the event time, snapping the hitting axis onto its knot;
        # exact ties resolve to the lowest axis index via argmin.
        theta += t_min * p
        ci = cells[i]
        theta[i] = maps[i].knots[ci + 1] if p[i] > 0 else maps[i].knots[ci]
        remaining -= t_min
        events += 1
        pi = p[i]
        step = 1 if pi > 0 else -1
        next_cell = ci + step
        if next_cell < 0 or next_cell >= maps[i].n_cells:
            du = np.inf
        else:
            trial = list(cells)
            trial[i] = next_cell
            u_next = model.cell_potential(trial)
            evals += 1
            du = u_next - u_here
        if 0.5 * pi * pi > du:
            p[i] = step * np.sqrt(pi * pi - 2.0 * du)
            cells[i] = next_cell
            u_here = u_next
        else:
            p[i] = -pi
            flips += 1
    out = PhaseState(theta, p, state.smooth_idx, state.disc_idx)
    return StepOutcome(state=out, flips=flips, potential_evals=evals,
                       events=events)
