"""Rate function, quantile probes, and Bernstein-Markov growth constants.

The large-deviation rate of a vector measure is its weighted energy minus
the weighted energy of the equilibrium measure (speed n^2).  The family of
configuration functionals that certify the rate all collapse onto the same
energy value in the desk-scale regime, so they are probed through a single
deterministic device: quantile configurations of a target measure, whose
normalized log interaction weight approaches minus the weighted energy.

Bernstein-Markov growth is estimated through the Christoffel kernel
diagonal: beta_n is the sup over the system of the degree-n kernel of the
(probability-normalized) measure, and beta_n^(1/2n) -> 1 exactly when sup
norms of polynomials grow subexponentially against their L2 norms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Configuration, apportion, quantile_configuration
from .energy import as_field, weighted_energy
from .equilibrium import solve_equilibrium
from .errors import IllConditionedGram
from .fekete import log_boltzmann

DEGREE_CAP = 24
GRAM_CONDITION_GUARD = 1e12


@dataclass(frozen=True, eq=False)
class RateReport:
    rate: float
    measure_energy: float
    equilibrium_energy: float


@dataclass(frozen=True)
class BMEstimate:
    degree: int
    beta: float
    root: float  # beta ** (1 / (2 degree))


def rate_function(mu, field=None, equilibrium=None, cells=None, tol=1e-4):
    """Weighted-energy excess of ``mu`` over the equilibrium measure."""
    field = as_field(field, mu.system.p)
    if equilibrium is None:
        equilibrium = solve_equilibrium(
            mu.system, field, cells=cells or mu[0].cells, tol=tol
        )
    e_mu = weighted_energy(mu, field).total
    e_eq = equilibrium.energy.total
    return RateReport(
        rate=float(e_mu - e_eq),
        measure_energy=float(e_mu),
        equilibrium_energy=float(e_eq),
    )


def quantile_energy_probe(mu, n_list, field=None):
    """Normalized log weight of quantile configurations of ``mu``.

    Block sizes follow largest-remainder apportionment of the component
    masses; the values approach minus the weighted energy of ``mu``.
    Returns rows (n, value).
    """
    field = as_field(field, mu.system.p)
    rows = []
    for n in n_list:
        m = apportion(int(n), mu.masses)
        X = quantile_configuration(mu, m)
        val = log_boltzmann(X, field, m)
        rows.append((int(n), float(val / m.total ** 2)))
    return rows


def field_shift_identity(X, field, index=None):
    """Exact relation between unweighted and weighted log interaction weight.

    Returns (lhs, rhs) with lhs the difference of log weights and rhs twice
    the total point count times the summed field values.
    """
    index = X.index if index is None else index
    field = as_field(field, X.system.p)
    lhs = log_boltzmann(X, None, index) - log_boltzmann(X, field, index)
    n = index.total
    rhs = 2.0 * n * sum(
        float(np.sum(field(i, b))) for i, b in enumerate(X.blocks)
    )
    return float(lhs), float(rhs)


def _legendre_values(x, a, b, k_max):
    """Orthonormal Legendre values on [a, b] w.r.t. uniform probability.

    Columns k = 0..k_max of sqrt(2k+1) P_k(t), t the affine image in [-1, 1];
    stable three-term recurrence, valid for |t| > 1 as well.
    """
    t = (2.0 * np.asarray(x, dtype=float) - (a + b)) / (b - a)
    out = np.empty((t.size, k_max + 1))
    out[:, 0] = 1.0
    if k_max >= 1:
        out[:, 1] = t
    for k in range(1, k_max):
        out[:, k + 1] = ((2 * k + 1) * t * out[:, k] - k * out[:, k - 1]) / (k + 1)
    return out * np.sqrt(2.0 * np.arange(k_max + 1) + 1.0)


def _support_bounds(t, h, w):
    pos = np.nonzero(w > 1e-13 * w.max())[0]
    return t[pos[0]] - h / 2, t[pos[-1]] + h / 2


def _kernel_profile(tau, degree, field=None, weight_scale=0, refine=8):
    """Cumulative Christoffel kernel sups for degrees 0..degree.

    Orthonormalizes in the Legendre basis of the numerical support (which
    keeps the Gram well conditioned even when the measure ignores part of
    its interval, the case the estimate is meant to expose) and takes sups
    over the full interval.  The input is normalized to a probability
    measure; weighting multiplies the measure by exp(-2 scale Q) and the
    kernel diagonal by exp(-2 scale Q) as well.
    """
    if degree > DEGREE_CAP:
        raise ValueError(f"degree capped at {DEGREE_CAP}")
    i = tau.interval_index
    t, h, w = tau.refined(refine)
    w = w * h
    if field is not None and weight_scale:
        field = as_field(field, tau.system.p)
        w = w * np.exp(-2.0 * weight_scale * field(i, t))
    w = w / w.sum()
    a, b = _support_bounds(t, h, w)
    phi = _legendre_values(t, a, b, degree)
    gram = (phi * w[:, None]).T @ phi
    cond = float(np.linalg.cond(gram))
    if not np.isfinite(cond) or cond > GRAM_CONDITION_GUARD:
        raise IllConditionedGram(
            f"gram condition {cond:.3e} at degree {degree}", degree=degree
        )
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise IllConditionedGram(
            f"gram not numerically positive at degree {degree}", degree=degree
        )
    # Rows of q are orthonormal-polynomial values at the grid nodes.
    q = np.linalg.solve(chol, phi.T)
    kern = np.cumsum(q * q, axis=0)
    if field is not None and weight_scale:
        kern = kern * np.exp(-2.0 * weight_scale * field(i, t))[None, :]
    return np.max(kern, axis=1)


def bm_constant(tau, degree, field=None, weight_scale=0, refine=8):
    """Christoffel-kernel growth estimate for one base measure.

    ``beta`` is the sup over the interval of the degree-``degree`` kernel
    diagonal of the probability-normalized measure; ``root`` its
    (2 degree)-th root.  Roots tending to 1 certify subexponential sup
    growth; roots bounded away from 1 expose a support defect.
    """
    sups = _kernel_profile(tau, degree, field, weight_scale, refine)
    beta = float(sups[degree])
    root = float(beta ** (1.0 / (2 * degree))) if degree > 0 else 1.0
    return BMEstimate(degree=degree, beta=beta, root=root)


def growth_constant(base_measures, max_degree, epsilon, field=None, weight_scale=0):
    """L1 growth constant C: sup |p| <= C (1+eps)^deg int |p| d tau.

    Derived from the L2 kernel sups (beta of the normalized measure bounds
    sup|p| by beta * int |p| d tau-hat), maximized over intervals and
    degrees up to ``max_degree``, which must respect the degree cap.
    """
    c = 0.0
    for tau in base_measures:
        sups = _kernel_profile(tau, max_degree, field, weight_scale)
        ks = np.arange(max_degree + 1)
        c = max(
            c, float(np.max(sups / tau.total_mass / (1.0 + epsilon) ** ks))
        )
    return c


def random_configuration(system, index, rng):
    """Uniformly random sorted configuration; test utility."""
    blocks = tuple(
        np.sort(rng.uniform(*system.intervals[i], size=n_i))
        for i, n_i in enumerate(index.counts)
    )
    return Configuration(system, blocks)
