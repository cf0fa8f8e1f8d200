"""Multiple orthogonal polynomials of type II for the base-measure vector.

The monic polynomial of degree n = sum(n_i) satisfying, for every interval j
and every k < n_j,

    int P(x) x^k w_j(x) dx = 0

is found from the n x n moment system assembled in a globally rescaled
variable (span mapped to [-1, 1]) for conditioning.  Its expected value
identity: the mean of prod_k (z - x_k) over the unweighted ensemble equals
P(z).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import _tensor_reduce, gibbs_sample
from .errors import IllConditionedSystem

CONDITION_GUARD = 1e12


@dataclass(frozen=True, eq=False)
class MonicPolynomial:
    """x^degree + sum_k coefficients[k] x^k."""

    degree: int
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(np.asarray(self.coefficients, dtype=float))
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        if c.size != self.degree:
            raise ValueError("need exactly `degree` lower coefficients")

    def __call__(self, x):
        full = np.concatenate((self.coefficients, [1.0]))
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), full)

    def real_roots(self, system, cells=4000):
        """Sign-change bisection on each interval; diagnostics only."""
        roots = []
        for i in range(system.p):
            xs = np.linspace(*system.intervals[i], cells)
            vals = self(xs)
            sign = np.sign(vals)
            for k in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
                lo, hi = xs[k], xs[k + 1]
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    if self(lo) * self(mid) <= 0:
                        hi = mid
                    else:
                        lo = mid
                roots.append(0.5 * (lo + hi))
        return np.array(roots)


def moments(tau, k_max, refine=8, center=0.0, scale=1.0):
    """Moments int ((x - center)/scale)^k w(x) dx, k = 0..k_max, refined grid."""
    t, h, w = tau.refined(refine)
    s = (t - center) / scale
    out = np.empty(k_max + 1)
    powers = np.ones_like(s)
    for k in range(k_max + 1):
        out[k] = np.sum(powers * w) * h
        powers = powers * s
    return out


def solve_mop(spec, index):
    """Solve the type II orthogonality system for the monic polynomial.

    Raises IllConditionedSystem when the rescaled moment matrix has
    condition estimate above 1e12; checks the orthogonality residuals
    against 1e-8 relative to the largest moment magnitude.
    """
    sys_ = spec.system
    n = index.total
    lo = min(a for a, _ in sys_.intervals)
    hi = max(b for _, b in sys_.intervals)
    center = 0.5 * (lo + hi)
    scale = 0.5 * (hi - lo)

    rows = []
    rhs = []
    for j, n_j in enumerate(index.counts):
        mom = moments(spec.base[j], 2 * n, center=center, scale=scale)
        for k in range(n_j):
            rows.append(mom[k : k + n])
            rhs.append(-mom[k + n])
    mat = np.asarray(rows)
    rhs = np.asarray(rhs)
    cond = float(np.linalg.cond(mat))
    if not np.isfinite(cond) or cond > CONDITION_GUARD:
        raise IllConditionedSystem(
            f"moment system condition {cond:.3e} exceeds guard", condition=cond
        )
    b = np.linalg.solve(mat, rhs)

    # Map t^n + sum b_l t^l back through t = (x - center)/scale, monic in x.
    tpoly = np.polynomial.Polynomial(np.concatenate((b, [1.0])))
    xpoly = tpoly(np.polynomial.Polynomial([-center / scale, 1.0 / scale]))
    coef = xpoly.coef * scale ** n
    coef = coef / coef[-1]
    poly = MonicPolynomial(n, coef[:-1])

    worst = 0.0
    scale_ref = 1.0
    for j, n_j in enumerate(index.counts):
        t, h, w = spec.base[j].refined(8)
        pv = poly(t)
        scale_ref = max(scale_ref, float(np.max(np.abs(moments(spec.base[j], 2 * n)))))
        for k in range(n_j):
            res = abs(float(np.sum(pv * t ** k * w) * h))
            worst = max(worst, res)
    if worst > 1e-8 * scale_ref:
        raise IllConditionedSystem(
            f"orthogonality residual {worst:.3e} too large", condition=cond
        )
    return poly


def expectation_identity_check(
    spec, d, z_points, mode="auto", budget=2 ** 25, refine=8,
    samples=400, burn_in=50, thin=5, seed=0,
):
    """Compare E prod_k (z - x_k) under the unweighted ensemble against P(z).

    Returns rows (z, P(z), estimate, stderr); stderr is 0 in quadrature
    mode.  The identity concerns the unweighted ensemble, so any external
    field on the spec is ignored.
    """
    plain = spec.unweighted()
    m = plain.index(d)
    poly = solve_mop(plain, m)
    zs = tuple(float(z) for z in z_points)
    rows = []
    if mode == "auto":
        mode = "quadrature" if m.total <= 4 else "mc"
    if mode == "quadrature":
        z_full, prods, _ = _tensor_reduce(plain, d, budget, refine, z_points=zs)
        for z, pz in zip(zs, prods):
            rows.append((z, float(poly(z)), float(pz / z_full), 0.0))
        return rows
    batch = gibbs_sample(plain, d, samples, burn_in, thin, seed)
    for z in zs:
        vals = np.array(
            [float(np.prod(z - X.flatten())) for X in batch]
        )
        stderr = float(vals.std(ddof=1) / np.sqrt(vals.size))
        rows.append((z, float(poly(z)), float(vals.mean()), stderr))
    return rows


def export_csv(poly, path):
    rows = ["power,coefficient"]
    for k, c in enumerate(poly.coefficients):
        rows.append(f"{k},{c:.17g}")
    rows.append(f"{poly.degree},1")
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")
