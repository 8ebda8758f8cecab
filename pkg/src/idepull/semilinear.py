"""Finite-dimensional semilinear difference equations u' = L_t u + K_t(u).

Constants follow one norm family throughout: vectors carry the max-norm
and matrices its induced operator norm (max absolute row sum).  The
pullback limit is certified through the per-period contraction product
prod (alpha_r + gamma * kappa_r) < 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exceptions import BudgetExceededError, NoContractionError, TimeOrderError

__all__ = [
    "SemilinearSystem",
    "PullbackReport",
    "build_semilinear",
    "transition",
    "step_semilinear",
    "iterate",
    "variation_of_constants",
    "gronwall_bound",
    "contraction_product",
    "pullback_limit",
]

Nonlinearity = Callable[[np.ndarray], np.ndarray]


def _mat_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, ord=np.inf))


def _vec_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


@dataclass(frozen=True, eq=False)
class SemilinearSystem:
    """Periodic semilinear system with its estimate constants.

    ``gamma`` and ``alphas`` bound the transition operators via
    ||Phi(t, tau)|| <= gamma * prod alpha_r; ``kappas`` are per-slot
    Lipschitz constants of the nonlinearities.  ``estimated`` names the
    constants that were sampled rather than user-certified.
    """

    matrices: tuple[np.ndarray, ...]
    nonlinearities: tuple[Nonlinearity, ...]
    kappas: tuple[float, ...]
    gamma: float
    alphas: tuple[float, ...]
    estimated: frozenset[str]

    @property
    def theta(self) -> int:
        return len(self.matrices)

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]

    def step(self, t: int, u: np.ndarray) -> np.ndarray:
        r = t % self.theta
        return self.matrices[r] @ u + self.nonlinearities[r](u)


def _sample_kappa(k: Nonlinearity, dim: int, rng: np.random.Generator, pairs: int = 10_000) -> float:
    u = rng.normal(scale=3.0, size=(pairs, dim))
    v = rng.normal(scale=3.0, size=(pairs, dim))
    kappa = 0.0
    for a, b in zip(u, v):
        den = _vec_norm(a - b)
        if den == 0.0:
            continue
        kappa = max(kappa, _vec_norm(np.asarray(k(a)) - np.asarray(k(b))) / den)
    return kappa


def build_semilinear(
    matrices: Sequence[np.ndarray],
    nonlinearities: Sequence[Nonlinearity] | Nonlinearity,
    *,
    kappas: Sequence[float] | None = None,
    gamma: float | None = None,
    alphas: Sequence[float] | None = None,
    rng: np.random.Generator | None = None,
    validate: bool = True,
) -> SemilinearSystem:
    """Normalize inputs and fill in missing constants by sampling.

    Defaults: alpha_r is the row-sum norm of L_r, gamma the largest sampled
    ratio ||Phi(t, tau)|| / prod alpha_r (at least 1), and kappa_r the
    largest difference quotient of K_r over random pairs.  Sampled
    constants are recorded in ``estimated`` and are not certificates.
    """
    mats = tuple(np.array(m, dtype=float) for m in matrices)
    if not mats:
        raise ValueError("need at least one matrix")
    d = mats[0].shape[0]
    for m in mats:
        if m.shape != (d, d):
            raise ValueError(f"matrices must share shape ({d}, {d}), got {m.shape}")
        m.setflags(write=False)

    if callable(nonlinearities):
        nls = (nonlinearities,) * len(mats)
    else:
        nls = tuple(nonlinearities)
        if len(nls) == 1:
            nls = nls * len(mats)
    if len(nls) != len(mats):
        raise ValueError(f"got {len(nls)} nonlinearities for {len(mats)} matrices")

    rng = np.random.default_rng(0) if rng is None else rng
    estimated = set()

    if kappas is None:
        kappas = tuple(_sample_kappa(k, d, rng) for k in nls)
        estimated.add("kappas")
    else:
        kappas = tuple(float(k) for k in kappas)
        if len(kappas) == 1:
            kappas = kappas * len(mats)
    if len(kappas) != len(mats) or any(k < 0 for k in kappas):
        raise ValueError("kappas must be nonnegative, one per period slot")

    if alphas is None:
        alphas = tuple(max(_mat_norm(m), np.finfo(float).tiny) for m in mats)
        estimated.add("alphas")
    else:
        alphas = tuple(float(a) for a in alphas)
        if len(alphas) == 1:
            alphas = alphas * len(mats)
    if len(alphas) != len(mats) or any(a <= 0 for a in alphas):
        raise ValueError("alphas must be positive, one per period slot")

    theta = len(mats)
    if gamma is None:
        worst = 1.0
        for tau in range(theta):
            phi = np.eye(d)
            prod = 1.0
            for s in range(tau, tau + theta):
                phi = mats[s % theta] @ phi
                prod *= alphas[s % theta]
                worst = max(worst, _mat_norm(phi) / prod)
        gamma = worst
        estimated.add("gamma")
    gamma = float(gamma)
    if gamma < 1.0:
        raise ValueError(f"gamma must be >= 1, got {gamma}")

    system = SemilinearSystem(mats, nls, kappas, gamma, alphas, frozenset(estimated))
    if validate:
        _validate(system, rng)
    return system


def _validate(sys: SemilinearSystem, rng: np.random.Generator, samples: int = 200) -> None:
    slack = 1.0 + 1e-9
    theta, d = sys.theta, sys.dim
    for tau in range(theta):
        phi = np.eye(d)
        prod = 1.0
        for s in range(tau, tau + theta):
            phi = sys.matrices[s % theta] @ phi
            prod *= sys.alphas[s % theta]
            if _mat_norm(phi) > sys.gamma * prod * slack:
                raise ValueError(
                    f"transition norm bound violated on window ({tau}, {s + 1}): "
                    f"{_mat_norm(phi)} > gamma * prod = {sys.gamma * prod}"
                )
    for r in range(theta):
        u = rng.normal(scale=3.0, size=(samples, d))
        v = rng.normal(scale=3.0, size=(samples, d))
        for a, b in zip(u, v):
            lhs = _vec_norm(np.asarray(sys.nonlinearities[r](a)) - np.asarray(sys.nonlinearities[r](b)))
            if lhs > sys.kappas[r] * _vec_norm(a - b) * slack + 1e-15:
                raise ValueError(f"declared kappa {sys.kappas[r]} violated at slot {r}")


def transition(sys: SemilinearSystem, t: int, tau: int) -> np.ndarray:
    """Transition matrix L_{t-1} ... L_tau, the identity when t == tau."""
    if t < tau:
        raise TimeOrderError(f"target time {t} precedes initial time {tau}")
    phi = np.eye(sys.dim)
    for s in range(tau, t):
        phi = sys.matrices[s % sys.theta] @ phi
    return phi


def step_semilinear(sys: SemilinearSystem, t: int, u: np.ndarray) -> np.ndarray:
    return sys.step(t, np.asarray(u, dtype=float))


def iterate(sys: SemilinearSystem, t: int, tau: int, u: np.ndarray) -> np.ndarray:
    """Stepwise general solution through (tau, u)."""
    if t < tau:
        raise TimeOrderError(f"target time {t} precedes initial time {tau}")
    state = np.asarray(u, dtype=float)
    for s in range(tau, t):
        state = sys.step(s, state)
    return state


def variation_of_constants(sys: SemilinearSystem, t: int, tau: int, u: np.ndarray) -> np.ndarray:
    """Solution via Phi(t,tau) u + sum_s Phi(t, s+1) K_s(phi(s, tau, u)).

    The inner states are the stepwise solution; the transition factors are
    accumulated backward so the assembly is a genuinely different
    computational route than plain iteration (they agree to rounding).
    """
    if t < tau:
        raise TimeOrderError(f"target time {t} precedes initial time {tau}")
    u = np.asarray(u, dtype=float)
    if t == tau:
        return u.copy()

    inner = [u]
    state = u
    for s in range(tau, t - 1):
        state = sys.step(s, state)
        inner.append(state)

    acc = np.zeros(sys.dim)
    back = np.eye(sys.dim)  # Phi(t, s+1), built from s = t-1 downward
    for s in range(t - 1, tau - 1, -1):
        acc = acc + back @ np.asarray(sys.nonlinearities[s % sys.theta](inner[s - tau]))
        back = back @ sys.matrices[s % sys.theta]
    return back @ u + acc


def gronwall_bound(sys: SemilinearSystem, t: int, tau: int, delta0: float) -> float:
    """Certified separation bound gamma * delta0 * prod (alpha_r + gamma kappa_r)."""
    if t < tau:
        raise TimeOrderError(f"target time {t} precedes initial time {tau}")
    if delta0 < 0:
        raise ValueError(f"initial separation must be >= 0, got {delta0}")
    prod = 1.0
    for r in range(tau, t):
        prod *= sys.alphas[r % sys.theta] + sys.gamma * sys.kappas[r % sys.theta]
    return sys.gamma * delta0 * prod


def contraction_product(sys: SemilinearSystem) -> float:
    """Per-period product prod_r (alpha_r + gamma * kappa_r)."""
    prod = 1.0
    for r in range(sys.theta):
        prod *= sys.alphas[r] + sys.gamma * sys.kappas[r]
    return prod


@dataclass(frozen=True)
class PullbackReport:
    """Outcome of the pullback limit: periods used and certified tail."""

    periods: int
    last_update: float
    tail_bound: float
    factor: float
    estimated: frozenset[str]


def pullback_limit(
    sys: SemilinearSystem,
    tol: float,
    u0: np.ndarray | None = None,
    max_periods: int = 100_000,
) -> tuple[tuple[np.ndarray, ...], PullbackReport]:
    """Periodic fibers by deepening the pullback one period at a time.

    Starting ever further in the past is, by periodicity, the same as
    applying one more period to the previous sweep; iteration stops when
    successive per-class fibers move by at most ``tol`` in the max-norm.
    The geometric tail gamma q / (1 - gamma q) * last_update certifies the
    remaining error whenever gamma * q < 1.
    """
    q = contraction_product(sys)
    if q >= 1.0:
        raise NoContractionError(f"per-period contraction product {q} is not below 1")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")

    theta, d = sys.theta, sys.dim
    state = np.zeros(d) if u0 is None else np.asarray(u0, dtype=float)
    fibers: list[np.ndarray] | None = None
    for period in range(1, max_periods + 1):
        new = []
        for k in range(theta):
            new.append(state)
            state = sys.step(k, state)
        if fibers is not None:
            update = max(_vec_norm(a - b) for a, b in zip(new, fibers))
            fibers = new
            if update <= tol:
                gq = sys.gamma * q
                tail = gq / (1.0 - gq) * update if gq < 1.0 else math.inf
                report = PullbackReport(period, update, tail, q, sys.estimated)
                return tuple(f.copy() for f in fibers), report
        else:
            fibers = new
    raise BudgetExceededError(
        f"pullback limit did not settle within {max_periods} periods (q = {q})"
    )
