"""Open-population Jolly-Seber capture-recapture posterior.

Parameters over T capture occasions: capture probabilities p_1..p_T and
survival probabilities phi_1..phi_{T-1} (both log-odds transformed, uniform
priors), and unmarked population sizes U_1..U_T (embedded integers with
logarithmic knots by default).  The likelihood splits into a first-capture
binomial part and a recapture part driven by the backward recursion

    chi_i = 1 - phi_i * (p_{i+1} + (1 - p_{i+1}) * (1 - chi_{i+1})),

chi_i being the probability that an animal released at occasion i is never
seen again.  The prior on the U chain is the floored Normal
U_{i+1} | U_i ~ floor(N(U_i - u_i, sigma_b^2 + phi_i(1 - phi_i))), evaluated
as the exact Normal interval mass on [n, n+1), plus pi(U_1) ~ 1/U_1.

``potential_diff`` is O(1) for the embedded U coordinates; moves of the
continuous coordinates fall back to two full potential evaluations
internally.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaln, ndtr

from ..core import ContractError, TargetModel
from ..embedding import EmbeddingMap

__all__ = ["JollySeberStats", "JollySeberTarget", "survival_chi",
           "simulate_capture_recapture", "population_draws",
           "save_stats", "load_stats"]

_EMPTY = np.array([], dtype=np.intp)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class JollySeberStats:
    """Sufficient statistics of a capture-recapture experiment.

    Arrays are indexed by occasion 0..T-1: ``u`` unmarked captures, ``m``
    marked recaptures (m[0] = 0), ``R`` animals released after each occasion,
    ``r`` how many of those were seen again later (r[T-1] = 0 by convention),
    ``z`` animals seen before but not at the occasion and seen after
    (z[0] = z[T-1] = 0).
    """

    u: np.ndarray
    m: np.ndarray
    R: np.ndarray
    r: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        for name in ("u", "m", "R", "r", "z"):
            arr = np.array(getattr(self, name), dtype=np.int64)
            if arr.ndim != 1 or np.any(arr < 0):
                raise ContractError(f"{name} must be nonnegative integers")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        T = len(self.u)
        if T < 2:
            raise ContractError("need at least two capture occasions")
        for name in ("m", "R", "r", "z"):
            if len(getattr(self, name)) != T:
                raise ContractError("statistics arrays must share one length")
        if np.any(self.r > self.R):
            raise ContractError("r_i cannot exceed R_i")

    @property
    def T(self) -> int:
        return len(self.u)


def survival_chi(phi, p):
    """Backward recursion for the never-seen-again probabilities.

    ``phi`` has length T-1 and ``p`` length T; the returned array has length
    T with the sentinel chi[T-1] = 1 appended for convenient indexing.
    """
    phi = np.asarray(phi, dtype=float)
    p = np.asarray(p, dtype=float)
    T = len(p)
    if len(phi) != T - 1:
        raise ContractError("phi must have length T-1")
    chi = np.ones(T)
    for i in range(T - 2, -1, -1):
        chi[i] = 1.0 - phi[i] * (p[i + 1] + (1.0 - p[i + 1]) * (1.0 - chi[i + 1]))
    return chi


def _interval_normal_logmass(n, mu, sd):
    """log P(n <= X < n+1) for X ~ N(mu, sd^2), stable in both tails."""
    z0 = (n - mu) / sd
    z1 = (n + 1.0 - mu) / sd
    if z0 + z1 > 0.0:
        mass = ndtr(-z0) - ndtr(-z1)
    else:
        mass = ndtr(z1) - ndtr(z0)
    if mass <= 0.0:
        return -np.inf
    return math.log(mass)


class JollySeberTarget(TargetModel):

    name = "jolly_seber"

    def __init__(self, stats: JollySeberStats, sigma_b: float = 500.0,
                 n_max: int = 5000, kind: str = "log"):
        if sigma_b <= 0:
            raise ContractError("sigma_b must be positive")
        self.stats = stats
        self.sigma_b = float(sigma_b)
        self.n_max = int(n_max)
        T = stats.T
        self.T = T
        self.dim = 3 * T - 1
        self._smooth = np.arange(2 * T - 1, dtype=np.intp)
        self._disc = np.arange(2 * T - 1, 3 * T - 1, dtype=np.intp)
        self.emaps = []
        for i in range(T):
            lo = max(int(stats.u[i]), 1 if i == 0 else 0)
            if self.n_max < lo:
                raise ContractError(f"n_max={n_max} below u_{i + 1}={lo}")
            if kind == "log":
                emap = EmbeddingMap.logarithmic(lo, self.n_max)
            elif kind == "uniform":
                emap = EmbeddingMap.uniform(lo, self.n_max)
            else:
                raise ContractError(f"unknown embedding kind {kind!r}")
            self.emaps.append(emap)
        self.embeddings = {int(j): m for j, m in zip(self._disc, self.emaps)}

    @property
    def smooth_idx(self):
        return self._smooth

    @property
    def disc_idx(self):
        return self._disc

    @property
    def param_names(self):
        T = self.T
        return ([f"p{i + 1}" for i in range(T)]
                + [f"phi{i + 1}" for i in range(T - 1)]
                + [f"U{i + 1}" for i in range(T)])

    def _split(self, theta):
        T = self.T
        return theta[:T], theta[T:2 * T - 1], theta[2 * T - 1:]

    def _decode_u(self, ut):
        cells = np.empty(self.T, dtype=np.intp)
        for i, (x, emap) in enumerate(zip(ut, self.emaps)):
            if not emap.contains(x):
                return None, None
            cells[i] = emap.cell_of(x)
        uvals = np.array([m.values[c] for m, c in zip(self.emaps, cells)],
                         dtype=float)
        return cells, uvals

    def potential(self, theta):
        lp, lphi, ut = self._split(theta)
        cells, U = self._decode_u(ut)
        if cells is None:
            return float("inf")
        st = self.stats
        p = expit(lp)
        phi = expit(lphi)
        log_p = -np.logaddexp(0.0, -lp)
        log_1mp = -np.logaddexp(0.0, lp)
        log_phi = -np.logaddexp(0.0, -lphi)

        # First captures.
        pot = -float(np.sum(gammaln(U + 1.0) - gammaln(U - st.u + 1.0)
                            + st.u * log_p + (U - st.u) * log_1mp))
        # Recaptures.
        chi = survival_chi(phi, p)
        c = st.R[:-1] - st.r[:-1]
        pot -= float(np.sum(c * np.log(chi[:-1])
                            + st.z[1:] * (log_phi + log_1mp[1:])
                            + st.m[1:] * (log_phi + log_p[1:])))
        # Priors on the U chain.
        pot += math.log(U[0])
        var_b = self.sigma_b ** 2 + phi * (1.0 - phi)
        for i in range(self.T - 1):
            pot -= _interval_normal_logmass(U[i + 1], U[i] - st.u[i],
                                            math.sqrt(var_b[i]))
        # Uniform priors on p, phi via the log-odds transform Jacobian.
        pot -= float(np.sum(log_p + log_1mp) + np.sum(log_phi - np.logaddexp(0.0, lphi)))
        # Embedding cell widths.
        for i, (emap, cell) in enumerate(zip(self.emaps, cells)):
            pot += math.log(emap.knots[cell + 1] - emap.knots[cell])
        return float(pot)

    def grad_smooth(self, theta):
        lp, lphi, ut = self._split(theta)
        cells, U = self._decode_u(ut)
        if cells is None:
            raise ContractError("gradient queried off support")
        st = self.stats
        T = self.T
        p = expit(lp)
        phi = expit(lphi)
        chi = survival_chi(phi, p)

        du_dp = -st.u / p + (U - st.u) / (1.0 - p)
        du_dphi = np.zeros(T - 1)
        # Direct recapture terms.
        du_dp[1:] += st.z[1:] / (1.0 - p[1:]) - st.m[1:] / p[1:]
        du_dphi -= (st.z[1:] + st.m[1:]) / phi
        # Never-seen-again part via the adjoint of the chi recursion.
        c = st.R[:-1] - st.r[:-1]
        lam = np.empty(T - 1)
        for i in range(T - 1):
            lam[i] = -c[i] / chi[i]
            if i > 0:
                lam[i] += lam[i - 1] * phi[i - 1] * (1.0 - p[i])
        du_dphi += lam * (chi[:-1] - 1.0) / phi
        du_dp[1:] += lam * (-phi * chi[1:])
        # U-chain prior variance depends on phi.
        sigma2 = self.sigma_b ** 2 + phi * (1.0 - phi)
        for i in range(T - 1):
            s = math.sqrt(sigma2[i])
            mu = U[i] - st.u[i]
            z0 = (U[i + 1] - mu) / s
            z1 = (U[i + 1] + 1.0 - mu) / s
            mass = math.exp(_interval_normal_logmass(U[i + 1], mu, s))
            dmass_ds = (z0 * math.exp(-0.5 * z0 * z0)
                        - z1 * math.exp(-0.5 * z1 * z1)) / (s * _SQRT_2PI)
            ds_dphi = (1.0 - 2.0 * phi[i]) / (2.0 * s)
            du_dphi[i] += -dmass_ds * ds_dphi / mass
        g = np.empty(2 * T - 1)
        g[:T] = p * (1.0 - p) * du_dp + (2.0 * p - 1.0)
        g[T:] = phi * (1.0 - phi) * du_dphi + (2.0 * phi - 1.0)
        return g

    def _u_local_terms(self, i, cell, lp, lphi, uvals):
        """Terms of the potential that involve U_{i+1} (0-based i)."""
        st = self.stats
        emap = self.emaps[i]
        Ui = float(emap.values[cell])
        log_1mp = -np.logaddexp(0.0, lp[i])
        pot = -(gammaln(Ui + 1.0) - gammaln(Ui - st.u[i] + 1.0)
                + (Ui - st.u[i]) * log_1mp)
        pot += math.log(emap.knots[cell + 1] - emap.knots[cell])
        if i == 0:
            pot += math.log(Ui)
        if i > 0:
            phi = expit(lphi[i - 1])
            s = math.sqrt(self.sigma_b ** 2 + phi * (1.0 - phi))
            pot -= _interval_normal_logmass(Ui, uvals[i - 1] - st.u[i - 1], s)
        if i < self.T - 1:
            phi = expit(lphi[i])
            s = math.sqrt(self.sigma_b ** 2 + phi * (1.0 - phi))
            pot -= _interval_normal_logmass(uvals[i + 1], Ui - st.u[i], s)
        return float(pot)

    def potential_diff(self, theta, j, value):
        first_u = 2 * self.T - 1
        if j < first_u:
            moved = theta.copy()
            moved[j] = value
            return self.potential(moved) - self.potential(theta)
        i = j - first_u
        emap = self.emaps[i]
        if not emap.contains(value):
            return float("inf")
        cell0 = emap.cell_of(theta[j])
        cell1 = emap.cell_of(value)
        if cell0 == cell1:
            return 0.0
        lp, lphi, ut = self._split(theta)
        _, uvals = self._decode_u(ut)
        before = self._u_local_terms(i, cell0, lp, lphi, uvals)
        uvals[i] = emap.values[cell1]
        after = self._u_local_terms(i, cell1, lp, lphi, uvals)
        return after - before

    def initial_theta(self, rng):
        """A dispersed but in-support start near plausible parameter values."""
        T = self.T
        theta = np.empty(self.dim)
        theta[:2 * T - 1] = 0.5 * rng.standard_normal(2 * T - 1)
        for i, emap in enumerate(self.emaps):
            guess = max(int(self.stats.u[i]) * 2 + 20, emap.lo + 1)
            guess = min(guess + int(rng.integers(0, 10)), emap.hi)
            theta[2 * T - 1 + i] = emap.embed_center(guess)
        return theta


def simulate_capture_recapture(rng: np.random.Generator, u1: int, p, phi,
                               births_scale: float = 50.0):
    """Individual-based forward simulation of an open population.

    ``u1`` is the initial unmarked population, ``p`` the per-occasion capture
    probabilities (length T), ``phi`` survival probabilities (length T-1);
    births are Poisson with mean ``births_scale`` per interval.  Returns
    (JollySeberStats, truth dict with the realized U_i).
    """
    p = np.asarray(p, dtype=float)
    phi = np.asarray(phi, dtype=float)
    T = len(p)
    if u1 < 1 or T < 2 or len(phi) != T - 1:
        raise ContractError("need u1 >= 1, T >= 2 and len(phi) == T-1")
    # histories[a][i] = True when animal a is captured at occasion i.
    alive = [True] * u1
    marked = [False] * u1
    histories = [[False] * T for _ in range(u1)]
    U_true = np.zeros(T, dtype=int)
    for i in range(T):
        U_true[i] = sum(1 for a in range(len(alive)) if alive[a] and not marked[a])
        for a in range(len(alive)):
            if alive[a] and rng.random() < p[i]:
                histories[a][i] = True
                marked[a] = True
        if i < T - 1:
            for a in range(len(alive)):
                if alive[a] and rng.random() >= phi[i]:
                    alive[a] = False
            for _ in range(rng.poisson(births_scale)):
                alive.append(True)
                marked.append(False)
                histories.append([False] * T)
    u = np.zeros(T, dtype=int)
    m = np.zeros(T, dtype=int)
    R = np.zeros(T, dtype=int)
    r = np.zeros(T, dtype=int)
    z = np.zeros(T, dtype=int)
    for h in histories:
        seen = [i for i in range(T) if h[i]]
        if not seen:
            continue
        first = seen[0]
        u[first] += 1
        for i in seen[1:]:
            m[i] += 1
        for i in seen:
            R[i] += 1
            if any(k > i for k in seen):
                r[i] += 1
        for i in range(first + 1, seen[-1] + 1):
            if not h[i]:
                z[i] += 1
    stats = JollySeberStats(u=u, m=m, R=R, r=r, z=z)
    return stats, {"U": U_true, "p": p.copy(), "phi": phi.copy()}


def population_draws(stats: JollySeberStats, u_draws, phi_draws,
                     rng: np.random.Generator):
    """Total population sizes N_i = M_i + U_i per stored draw.

    The marked population starts at M_1 = 0; the animals marked by occasion i
    (previous marked plus the u_i newly marked) survive to i+1 binomially
    with rate phi_i.
    """
    u_draws = np.asarray(u_draws)
    phi_draws = np.asarray(phi_draws, dtype=float)
    n_draws, T = u_draws.shape
    if phi_draws.shape != (n_draws, T - 1):
        raise ContractError("phi draws must be (n, T-1)")
    N = np.empty((n_draws, T), dtype=np.int64)
    for d in range(n_draws):
        M = 0
        for i in range(T):
            N[d, i] = M + u_draws[d, i]
            if i < T - 1:
                M = rng.binomial(M + int(stats.u[i]), phi_draws[d, i])
    return N


def save_stats(path, stats: JollySeberStats):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["occasion", "u", "m", "R", "r", "z"])
        for i in range(stats.T):
            w.writerow([i + 1, stats.u[i], stats.m[i], stats.R[i],
                        stats.r[i], stats.z[i]])


def load_stats(path) -> JollySeberStats:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["occasion", "u"]:
        raise ContractError(f"{path}: expected a capture-recapture statistics CSV")
    data = np.array([[int(v) for v in row] for row in rows[1:]])
    if data.size == 0:
        raise ContractError(f"{path}: no data rows")
    return JollySeberStats(u=data[:, 1], m=data[:, 2], R=data[:, 3],
                           r=data[:, 4], z=data[:, 5])
