"""Coarse Ricci curvature: pairwise, local, and the non-increasing envelope.

kappa(x, y) = 1 - W1(P_x, P_y)/d(x, y) per pair; K_eps(x) is its infimum
over the punctured eps-ball; the envelope K(r) is the largest non-increasing,
nonnegative function with K(d(x, x0)) <= K_eps(x) for every point, i.e. the
running minimum of the per-distance infima clamped at zero.  The profile also
carries the attraction constant rho (one-step drift toward the origin on the
annulus eps <= d <= 2*eps), the origin drift J(x0), and the sub-Gaussian
constant s^2.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chain_model import MetricChain
from .errors import DegenerateKernelError, EmptyAnnulusError
from .stepfun import StepFunction
from .transport import DiscreteMeasure, w1_flow, w1_line, w1_to_point

ANNULUS_TOL = 1e-12


@dataclass(frozen=True)
class CurvatureProfile:
    """Everything the bound formulas need, tied to one (eps, origin) choice."""

    epsilon: float
    origin: int
    kappa_local: np.ndarray      # K_eps per point; +inf where the eps-ball is empty
    isolated: np.ndarray         # bool mask of empty eps-balls
    envelope: StepFunction       # largest non-increasing nonnegative minorant K(r)
    rho: float                   # attraction constant at the origin
    j0: float                    # J(x0) = W1(P_x0, delta_x0)
    s2: float                    # sub-Gaussian constant

    def as_dict(self):
        return {
            "epsilon": self.epsilon,
            "origin": int(self.origin),
            "rho": self.rho,
            "j0": self.j0,
            "s2": self.s2,
            "kappa_local": [None if np.isinf(v) else float(v) for v in self.kappa_local],
            "envelope": self.envelope.as_dict(),
        }


def kappa_pair(chain: MetricChain, x: int, y: int) -> float:
    """1 - W1(P_x, P_y)/d(x, y), with W1 from the certified flow solver."""
    if x == y:
        raise ValueError("kappa is undefined on the diagonal (d(x,y) = 0)")
    mu = DiscreteMeasure.from_vector(chain.kernel[x])
    nu = DiscreteMeasure.from_vector(chain.kernel[y])
    return 1.0 - w1_flow(mu, nu, chain) / chain.dist[x, y]


def _is_uniform_grid(coords: np.ndarray) -> bool:
    steps = np.diff(coords)
    return steps.size > 0 and np.all(steps > 0) and np.ptp(steps) <= 1e-9 * steps[0]


def _local_curvature_uniform_line(chain: MetricChain, epsilon: float) -> np.ndarray:
    """Batched K_eps on a uniform line grid via the CDF identity, one offset at a time."""
    coords = chain.coords
    step = coords[1] - coords[0]
    max_off = int(np.floor(epsilon / step + 1e-9))
    n = chain.n
    cdf = np.cumsum(chain.kernel, axis=1)
    gaps = np.diff(coords)
    kloc = np.full(n, np.inf)
    for off in range(1, max_off + 1):
        w1 = np.abs(cdf[:-off] - cdf[off:])[:, :-1] @ gaps
        kap = 1.0 - w1 / (coords[off:] - coords[:-off])
        np.minimum(kloc[: n - off], kap, out=kloc[: n - off])
        np.minimum(kloc[off:], kap, out=kloc[off:])
    return kloc


def _local_curvature_generic(chain: MetricChain, epsilon: float) -> np.ndarray:
    n = chain.n
    kloc = np.full(n, np.inf)
    rows = [DiscreteMeasure.from_vector(chain.kernel[i]) for i in range(n)]
    for x in range(n):
        for y in range(x + 1, n):
            d = chain.dist[x, y]
            if d <= 0 or d > epsilon + ANNULUS_TOL:
                continue
            if chain.coords is not None:
                w1 = w1_line(rows[x], rows[y], chain.coords)
            else:
                w1 = w1_flow(rows[x], rows[y], chain)
            kap = 1.0 - w1 / d
            if kap < kloc[x]:
                kloc[x] = kap
            if kap < kloc[y]:
                kloc[y] = kap
    return kloc


def local_curvature(chain: MetricChain, epsilon: float) -> np.ndarray:
    """K_eps(x) = inf over 0 < d(x,y) <= eps of kappa(x, y), per point.

    Points whose eps-ball is empty get +inf (the infimum over an empty set)
    and a loud warning: that usually means eps is below the discretization
    scale.  On uniform line grids, W1 between kernel rows is evaluated with
    the exact CDF identity (cross-validated against the flow solver in the
    test suite); otherwise each pair goes through the certified solver.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if chain.coords is not None and _is_uniform_grid(chain.coords):
        kloc = _local_curvature_uniform_line(chain, epsilon)
    else:
        kloc = _local_curvature_generic(chain, epsilon)
    isolated = np.isinf(kloc)
    if np.any(isolated):
        warnings.warn(
            f"{int(isolated.sum())} point(s) have no neighbour within "
            f"eps={epsilon}; K_eps is vacuous (+inf) there",
            stacklevel=2)
    return kloc


def curvature_envelope(chain: MetricChain, epsilon: float, origin: int,
                       kappa_local: Optional[np.ndarray] = None) -> StepFunction:
    """Largest non-increasing, nonnegative K with K(d(x, x0)) <= K_eps(x) for all x.

    Materialized at the sorted distinct realized distances: the per-distance
    infimum of K_eps, swept by a running minimum (non-increasing), clamped at
    zero (the theorems need K >= 0).
    """
    if kappa_local is None:
        kappa_local = local_curvature(chain, epsilon)
    if np.all(np.isinf(kappa_local)):
        raise ValueError("every point is isolated at this epsilon; increase it")
    d = chain.dist[origin]
    order = np.argsort(d, kind="stable")
    breakpoints, values = [], []
    for i in order:
        r = d[i]
        if not breakpoints or r > breakpoints[-1] + 1e-12:
            breakpoints.append(r)
            values.append(kappa_local[i])
        else:
            values[-1] = min(values[-1], kappa_local[i])
    swept = np.minimum.accumulate(np.asarray(values, dtype=float))
    if np.isinf(swept[0]):
        # leading isolated radii impose no constraint; hold the first real value
        first = int(np.argmin(np.isinf(swept)))
        swept[:first] = swept[first]
    swept = np.maximum(swept, 0.0)
    return StepFunction(np.asarray(breakpoints, dtype=float), swept)


def attraction_rho(chain: MetricChain, epsilon: float, origin: int) -> float:
    """inf over eps <= d(x, x0) <= 2*eps of d(x, x0) - W1(P_x, delta_x0).

    W1 to a point mass is the expected distance, so the infimum is exact.
    The annulus is taken closed on both sides: on the discrete example chains
    this reproduces the continuum infimum over distances just above eps, and
    any smaller-than-true rho keeps the attractiveness hypothesis valid.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    d = chain.dist[origin]
    annulus = np.nonzero((d >= epsilon - ANNULUS_TOL)
                         & (d <= 2 * epsilon + ANNULUS_TOL) & (d > 0))[0]
    if annulus.size == 0:
        raise EmptyAnnulusError(
            f"no point with eps <= d(x, origin) <= 2*eps for eps={epsilon}; "
            "use a larger epsilon")
    drifts = d[annulus] - chain.kernel[annulus] @ d
    return float(drifts.min())


def subgaussian_s2(chain: MetricChain, method: str = "hoeffding_support",
                   value: Optional[float] = None) -> float:
    """Sub-Gaussian constant s^2 valid for every kernel row.

    hoeffding_support: max over rows of (support diameter)^2 / 4 -- the range
    of a 1-Lipschitz function on the support is at most its metric diameter,
    so this is the tightest generic Hoeffding constant on a finite chain.
    gaussian_variance: the variance declared by a Gaussian builder.
    user_supplied: pass-through of `value`.
    """
    if method == "hoeffding_support":
        s2 = 0.0
        for i in range(chain.n):
            supp = np.nonzero(chain.kernel[i])[0]
            diam = float(chain.dist[np.ix_(supp, supp)].max())
            s2 = max(s2, diam * diam / 4.0)
        if s2 <= 0:
            raise DegenerateKernelError(
                "every kernel row is a point mass; s^2 = 0 is degenerate")
        return s2
    if method == "gaussian_variance":
        if chain.gaussian_variance is None:
            raise ValueError("chain was not built with a declared Gaussian variance")
        return float(chain.gaussian_variance)
    if method == "user_supplied":
        if value is None or value <= 0:
            raise ValueError("user_supplied requires a positive value")
        return float(value)
    raise ValueError(f"unknown s2 method {method!r}")


def curvature_profile(chain: MetricChain, epsilon: float,
                      origin: Optional[int] = None,
                      s2_method: str = "hoeffding_support",
                      s2_value: Optional[float] = None,
                      kappa_local: Optional[np.ndarray] = None) -> CurvatureProfile:
    """Assemble the full curvature profile at one (eps, origin) choice."""
    if origin is None:
        origin = chain.origin_hint
    if origin is None:
        raise ValueError("no origin given and the chain has no origin_hint")
    if kappa_local is None:
        kappa_local = local_curvature(chain, epsilon)
    envelope = curvature_envelope(chain, epsilon, origin, kappa_local)
    rho = attraction_rho(chain, epsilon, origin)
    j0 = w1_to_point(chain, origin, origin)
    s2 = subgaussian_s2(chain, method=s2_method, value=s2_value)
    return CurvatureProfile(epsilon=float(epsilon), origin=int(origin),
                            kappa_local=kappa_local,
                            isolated=np.isinf(kappa_local),
                            envelope=envelope, rho=rho, j0=j0, s2=s2)
