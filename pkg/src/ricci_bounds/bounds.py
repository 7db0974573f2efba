"""Concentration bounds for the equilibrium measure of a nonnegatively curved chain.

Implements the drift function F, its antiderivative phi, the double integral
Phi, the two constants C_{alpha,d0} and C'_{alpha,d0}, the general
(alpha, d0)-parameterized tail bound, the fixed-parameter bound with its
closed-form constant C0, parameter search (paper default / admissible grid /
convexity line search in alpha), and the epsilon sweep exposing the
rho-versus-curvature trade-off.

All integrals of the piecewise-constant envelope are evaluated in closed
form; quadrature exists only as a test-side oracle.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .chain_model import MetricChain, check_epsilon_geodesic
from .curvature import CurvatureProfile, curvature_profile
from .errors import (EmptyAnnulusError, InadmissibleParamsError,
                     InfeasibleSearchError, NoAttractivePointError)

LN2 = math.log(2.0)


@dataclass(frozen=True)
class BoundParams:
    """A candidate (alpha, d0) pair with its admissibility breakdown.

    The four conditions: d0 >= 2*eps; F(d0) > s^2 K(d0)/2; alpha < 1/(s^2 K(d0));
    C_{alpha,d0} < 1.  `admissible` is their conjunction.
    """

    alpha: float
    d0: float
    epsilon: float
    admissible: bool
    admissibility_report: dict
    strategy: str = "manual"

    def as_dict(self):
        return {"alpha": self.alpha, "d0": self.d0, "epsilon": self.epsilon,
                "admissible": self.admissible, "strategy": self.strategy,
                "admissibility_report": self.admissibility_report}


@dataclass
class TailCurve:
    """A sampled map level -> probability (bound or empirical)."""

    levels: np.ndarray
    values: np.ndarray
    kind: str  # theorem1 | theorem_princ | empirical | poissonian
    meta: dict = field(default_factory=dict)

    def clamped(self) -> np.ndarray:
        """Values clamped into [0, 1] for plotting; raw values stay in `values`."""
        return np.minimum(self.values, 1.0)

    def exceeds_one(self) -> bool:
        return bool(np.any(self.values > 1.0))


# ---------------------------------------------------------------------------
# F, phi, Phi
# ---------------------------------------------------------------------------

def F_of(profile: CurvatureProfile, l: float) -> float:
    """Guaranteed one-step drift at distance l from the origin.

    -J(x0) on [0, eps]; rho on (eps, 2*eps); rho + int_{2eps}^{l} K beyond.
    """
    eps = profile.epsilon
    if l <= eps:
        return -profile.j0
    if l < 2 * eps:
        return profile.rho
    return profile.rho + profile.envelope.integral(2 * eps, l)


def phi_of(profile: CurvatureProfile, l: float) -> float:
    """phi(l) = int_0^l F(u) du, exact (F is piecewise linear)."""
    eps = profile.epsilon
    val = -profile.j0 * min(l, eps)
    if l > eps:
        val += profile.rho * (min(l, 2 * eps) - eps)
    if l > 2 * eps:
        val += profile.rho * (l - 2 * eps)
        val += profile.envelope.double_integral(2 * eps, l)
    return val


def Phi_of(profile: CurvatureProfile, l: float) -> float:
    """Phi(l) = rho*l + int_{2eps}^l int_{2eps}^u K(v) dv du, for l >= 2*eps."""
    eps = profile.epsilon
    if l < 2 * eps - 1e-12:
        raise ValueError(f"Phi is defined for l >= 2*eps = {2 * eps}, got {l}")
    return profile.rho * l + profile.envelope.double_integral(2 * eps, l)


# ---------------------------------------------------------------------------
# The two constants
# ---------------------------------------------------------------------------

def ln_C_alpha_d0(profile: CurvatureProfile, alpha: float, d0: float) -> float:
    s2 = profile.s2
    kd0 = float(profile.envelope(d0))
    t = alpha * s2 * kd0
    if t >= 1.0:
        raise InadmissibleParamsError(
            f"alpha*s^2*K(d0) = {t:.6g} >= 1: C is undefined there")
    f = F_of(profile, d0)
    return (-alpha * f * f * (1.0 - alpha * s2 / (2.0 * (1.0 - t)))
            - 0.5 * math.log1p(-t))


def C_alpha_d0(profile: CurvatureProfile, alpha: float, d0: float) -> float:
    """C_{alpha,d0} = exp(-alpha F(d0)^2 (1 - alpha s^2 / (2(1 - alpha s^2 K(d0))))) / sqrt(1 - alpha s^2 K(d0))."""
    return math.exp(ln_C_alpha_d0(profile, alpha, d0))


def ln_Cprime_alpha_d0(profile: CurvatureProfile, alpha: float, d0: float) -> float:
    lo = d0 - F_of(profile, d0)
    hi = profile.j0 + profile.epsilon
    if hi <= lo:
        return 0.0
    fd0 = F_of(profile, d0)
    # integrand is max(F(d0), F(u)); F is non-decreasing, so it is F(d0)
    # up to u = d0 and F(u) beyond
    total = fd0 * max(0.0, min(hi, d0) - lo)
    if hi > d0:
        total += phi_of(profile, hi) - phi_of(profile, d0)
    return alpha * total


def Cprime_alpha_d0(profile: CurvatureProfile, alpha: float, d0: float) -> float:
    """C'_{alpha,d0} >= 1; equals 1 whenever J(x0) + eps <= d0 - F(d0) or alpha = 0."""
    return math.exp(ln_Cprime_alpha_d0(profile, alpha, d0))


# ---------------------------------------------------------------------------
# Admissibility
# ---------------------------------------------------------------------------

def admissibility(profile: CurvatureProfile, alpha: float, d0: float,
                  strategy: str = "manual") -> BoundParams:
    """Evaluate the four admissibility conditions for an (alpha, d0) pair."""
    s2 = profile.s2
    kd0 = float(profile.envelope(d0))
    fd0 = F_of(profile, d0)
    c1 = d0 >= 2 * profile.epsilon - 1e-12
    c2 = fd0 > s2 * kd0 / 2.0
    c3 = alpha * s2 * kd0 < 1.0
    if c3:
        ln_c = ln_C_alpha_d0(profile, alpha, d0)
        c4 = ln_c < 0.0
        c_val = math.exp(ln_c)
    else:
        c4 = False
        c_val = math.inf
    report = {
        "d0_ge_2eps": {"holds": bool(c1), "d0": d0, "two_eps": 2 * profile.epsilon},
        "F_exceeds_half_s2K": {"holds": bool(c2), "F_d0": fd0, "s2K_half": s2 * kd0 / 2.0},
        "alpha_below_inverse_s2K": {"holds": bool(c3), "alpha": alpha,
                                    "limit": math.inf if kd0 == 0 else 1.0 / (s2 * kd0)},
        "C_below_one": {"holds": bool(c4), "C": c_val},
    }
    return BoundParams(alpha=alpha, d0=d0, epsilon=profile.epsilon,
                       admissible=bool(c1 and c2 and c3 and c4),
                       admissibility_report=report, strategy=strategy)


# ---------------------------------------------------------------------------
# Bound curves
# ---------------------------------------------------------------------------

def bound_princ(profile: CurvatureProfile, params: BoundParams,
                levels: Sequence[float]) -> TailCurve:
    """Tail bound C' * C/(1-C) * exp(-alpha (phi(l) - phi(d0))) for l >= d0.

    Raw values are kept even when they exceed 1 (flagged via meta); the
    clamped companion is available from the curve object.
    """
    if not params.admissible:
        raise InadmissibleParamsError(
            "bound requested with inadmissible (alpha, d0)",
            report=params.admissibility_report)
    levels = np.asarray(levels, dtype=float)
    if levels.size and float(levels.min()) < params.d0 - 1e-9:
        raise ValueError(f"levels must be >= d0 = {params.d0}")
    alpha, d0 = params.alpha, params.d0
    ln_c = ln_C_alpha_d0(profile, alpha, d0)
    ln_pref = (ln_Cprime_alpha_d0(profile, alpha, d0) + ln_c
               - math.log1p(-math.exp(ln_c)))
    phi_d0 = phi_of(profile, d0)
    ln_vals = np.array([ln_pref - alpha * (phi_of(profile, l) - phi_d0)
                        for l in levels])
    values = np.exp(ln_vals)
    return TailCurve(levels=levels, values=values, kind="theorem_princ",
                     meta={"alpha": alpha, "d0": d0, "ln_prefactor": ln_pref,
                           "C": math.exp(ln_c),
                           "Cprime": math.exp(ln_Cprime_alpha_d0(profile, alpha, d0)),
                           "exceeds_one": bool(np.any(values > 1.0))})


def theorem1_params(profile: CurvatureProfile, strategy: str = "paper_default") -> BoundParams:
    """The fixed choice alpha = 1/(2 s^2), d0 = 2*eps + ln(2) s^2 / rho."""
    if profile.rho <= 0:
        raise NoAttractivePointError(
            f"rho = {profile.rho:.6g} <= 0: no attractive point at eps = "
            f"{profile.epsilon}; increase eps or abort")
    alpha = 1.0 / (2.0 * profile.s2)
    d0 = 2.0 * profile.epsilon + LN2 * profile.s2 / profile.rho
    # holds automatically (kappa <= 1 pointwise), asserted rather than assumed
    assert float(profile.envelope(d0)) <= 1.0 + 1e-12
    return admissibility(profile, alpha, d0, strategy=strategy)


def ln_C0_of(profile: CurvatureProfile) -> float:
    """log of the closed-form constant in the fixed-parameter tail bound."""
    if profile.rho <= 0:
        raise NoAttractivePointError(
            f"rho = {profile.rho:.6g} <= 0: no attractive point at eps = "
            f"{profile.epsilon}; increase eps or abort")
    s2, rho, eps = profile.s2, profile.rho, profile.epsilon
    d0 = 2.0 * eps + LN2 * s2 / rho
    numerator = ((3.0 * eps / (2.0 * s2)) * max(3.0 * eps, rho + LN2 * s2 / rho)
                 - rho * rho / (4.0 * s2)
                 + Phi_of(profile, d0) / (2.0 * s2))
    return numerator - math.log1p(-math.exp(-rho * rho / (4.0 * s2)))


def C0_of(profile: CurvatureProfile) -> float:
    return math.exp(ln_C0_of(profile))


def bound_theorem1(profile: CurvatureProfile, levels: Sequence[float]) -> TailCurve:
    """Tail bound C0 * exp(-Phi(l) / (2 s^2)) for l > 2*eps + ln(2) s^2 / rho.

    The closed-form C0 is evaluated exactly; the delegated (alpha, d0)
    machinery with the same parameter choice is exposed via meta["params"]
    (its curve is bound_princ(profile, meta["params"], levels) and is
    provably at most this one).
    """
    params = theorem1_params(profile)
    levels = np.asarray(levels, dtype=float)
    if levels.size and float(levels.min()) <= params.d0 - 1e-9:
        raise ValueError(f"levels must be > d0 = {params.d0}")
    ln_c0 = ln_C0_of(profile)
    s2 = profile.s2
    values = np.exp([ln_c0 - Phi_of(profile, l) / (2.0 * s2) for l in levels])
    return TailCurve(levels=levels, values=np.asarray(values), kind="theorem1",
                     meta={"alpha": params.alpha, "d0": params.d0,
                           "C0": math.exp(ln_c0) if ln_c0 < 700 else math.inf,
                           "ln_C0": ln_c0, "params": params,
                           "exceeds_one": bool(np.any(np.asarray(values) > 1.0))})


# ---------------------------------------------------------------------------
# Parameter search
# ---------------------------------------------------------------------------

def _alpha_grid(profile: CurvatureProfile, d0: float, count: int) -> np.ndarray:
    s2 = profile.s2
    kd0 = float(profile.envelope(d0))
    a_max = 2.0 / s2 if kd0 <= 0 else min(1.0 / (s2 * kd0), 2.0 / s2)
    return np.geomspace(a_max / 1000.0, a_max * (1.0 - 1e-9), count)


def _ln_bound_at(profile, alpha, d0, level):
    ln_c = ln_C_alpha_d0(profile, alpha, d0)
    return (ln_Cprime_alpha_d0(profile, alpha, d0) + ln_c
            - math.log1p(-math.exp(ln_c))
            - alpha * (phi_of(profile, level) - phi_of(profile, d0)))


def search_params(profile: CurvatureProfile, strategy: str = "paper_default",
                  reference_level: Optional[float] = None,
                  d0_range: Optional[tuple] = None,
                  fixed_d0: Optional[float] = None,
                  n_alpha: int = 32, n_d0: int = 32) -> BoundParams:
    """Choose (alpha, d0).

    paper_default: alpha = 1/(2 s^2), d0 = 2*eps + ln(2) s^2 / rho.
    grid: minimize the raw bound at `reference_level` over a lattice of 32
      geometric alpha values per d0 (capped at min(1/(s^2 K(d0)), 2/s^2)) and
      32 linear d0 values on [2*eps, 2*eps + 10(rho + s^2/rho)] (override with
      `d0_range`); the paper-default point is always included; only admissible
      pairs with d0 <= reference_level compete.
    alpha_convexity: fix d0 (paper default unless `fixed_d0`) and minimize the
      log prefactor ln(C' C / (1 - C)) over alpha by golden section -- valid
      because ln C is convex in alpha and the extra terms preserve convexity.
    """
    if profile.rho <= 0:
        raise NoAttractivePointError(
            f"rho = {profile.rho:.6g} <= 0: no attractive point at eps = "
            f"{profile.epsilon}; increase eps or abort")
    if strategy == "paper_default":
        params = theorem1_params(profile, strategy="paper_default")
        if not params.admissible:
            raise InfeasibleSearchError(
                "paper-default parameters are not admissible",
                report=[params.admissibility_report])
        return params

    if strategy == "alpha_convexity":
        d0 = fixed_d0 if fixed_d0 is not None else (
            2.0 * profile.epsilon + LN2 * profile.s2 / profile.rho)
        lo, hi = 0.0, float(_alpha_grid(profile, d0, 2)[-1])

        def objective(a):
            ln_c = ln_C_alpha_d0(profile, a, d0)
            if ln_c >= 0:
                return math.inf
            return (ln_Cprime_alpha_d0(profile, a, d0) + ln_c
                    - math.log1p(-math.exp(ln_c)))

        probe = np.linspace(lo + (hi - lo) * 1e-4, hi * (1 - 1e-9), 64)
        finite = [a for a in probe if objective(a) < math.inf]
        if not finite:
            params = admissibility(profile, probe[len(probe) // 2], d0,
                                   strategy="alpha_convexity")
            raise InfeasibleSearchError(
                f"no alpha makes C < 1 at d0 = {d0:.6g} (the drift F(d0) is "
                "too weak against s^2 K(d0))",
                report=[params.admissibility_report])
        a_lo, a_hi = min(finite), max(finite)
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        x1 = a_hi - invphi * (a_hi - a_lo)
        x2 = a_lo + invphi * (a_hi - a_lo)
        f1, f2 = objective(x1), objective(x2)
        for _ in range(200):
            if a_hi - a_lo < 1e-12 * max(1.0, a_hi):
                break
            if f1 <= f2:
                a_hi, x2, f2 = x2, x1, f1
                x1 = a_hi - invphi * (a_hi - a_lo)
                f1 = objective(x1)
            else:
                a_lo, x1, f1 = x1, x2, f2
                x2 = a_lo + invphi * (a_hi - a_lo)
                f2 = objective(x2)
        best_alpha = (a_lo + a_hi) / 2.0
        params = admissibility(profile, best_alpha, d0, strategy="alpha_convexity")
        if not params.admissible:
            raise InfeasibleSearchError(
                "convexity search ended on an inadmissible point",
                report=[params.admissibility_report])
        return params

    if strategy != "grid":
        raise ValueError(f"unknown strategy {strategy!r}")

    default = theorem1_params(profile)
    if reference_level is None:
        reference_level = 2.0 * default.d0
    if d0_range is None:
        d0_range = (2.0 * profile.epsilon,
                    2.0 * profile.epsilon + 10.0 * (profile.rho + profile.s2 / profile.rho))
    d0_values = list(np.linspace(d0_range[0], d0_range[1], n_d0))
    d0_values.append(default.d0)
    best = None
    failures = []
    phi_ref = phi_of(profile, reference_level)
    for d0 in d0_values:
        if d0 > reference_level:
            failures.append({"d0": d0, "reason": "d0 beyond reference level"})
            continue
        phi_d0 = phi_of(profile, d0)
        for alpha in _alpha_grid(profile, d0, n_alpha):
            params = admissibility(profile, float(alpha), float(d0), strategy="grid")
            if not params.admissible:
                failures.append(params.admissibility_report)
                continue
            ln_c = ln_C_alpha_d0(profile, alpha, d0)
            val = (ln_Cprime_alpha_d0(profile, alpha, d0) + ln_c
                   - math.log1p(-math.exp(ln_c)) - alpha * (phi_ref - phi_d0))
            if best is None or val < best[0]:
                best = (val, params)
    if best is None:
        raise InfeasibleSearchError(
            "no admissible (alpha, d0) pair on the search lattice "
            "(on every candidate either C >= 1 or the drift condition fails); "
            "the bound gives nothing here",
            report=failures[:64])
    return best[1]


# ---------------------------------------------------------------------------
# Epsilon sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    rho: float
    envelope_max: float
    envelope_support_end: float
    params: Optional[BoundParams]
    bound_at_reference: float
    note: str = ""


@dataclass(frozen=True)
class SweepResult:
    rows: List[SweepRow]
    reference_level: float
    argmin_epsilon: Optional[float]


def _max_workers() -> int:
    env = os.environ.get("RICCI_BOUND_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def epsilon_sweep(chain: MetricChain, origin: int, epsilons: Sequence[float],
                  reference_level: float, strategy: str = "grid",
                  s2_method: str = "hoeffding_support",
                  s2_value: Optional[float] = None,
                  check_geodesic: bool = True) -> SweepResult:
    """Run the full pipeline per eps and expose the rho/curvature trade-off.

    Each row records rho, an envelope summary, and the best bound value at
    the reference level under the chosen search strategy.  Epsilons with an
    empty annulus (or that break the eps-geodesic property) are skipped with
    a note.  Rows evaluate independently on a small thread pool capped by
    RICCI_BOUND_THREADS.
    """

    def one(eps: float) -> SweepRow:
        if check_geodesic:
            rep = check_epsilon_geodesic(chain, eps)
            if not rep.is_geodesic:
                return SweepRow(eps, math.nan, math.nan, math.nan, None,
                                math.inf, note="not eps-geodesic")
        try:
            profile = curvature_profile(chain, eps, origin=origin,
                                        s2_method=s2_method, s2_value=s2_value)
        except EmptyAnnulusError:
            return SweepRow(eps, math.nan, math.nan, math.nan, None,
                            math.inf, note="empty annulus")
        if profile.rho <= 0:
            return SweepRow(eps, profile.rho, float(profile.envelope.values.max()),
                            profile.envelope.support_end(), None, math.inf,
                            note="rho <= 0")
        try:
            params = search_params(profile, strategy=strategy,
                                   reference_level=reference_level)
        except (InfeasibleSearchError, NoAttractivePointError) as exc:
            return SweepRow(eps, profile.rho, float(profile.envelope.values.max()),
                            profile.envelope.support_end(), None, math.inf,
                            note=str(exc))
        if params.d0 > reference_level:
            return SweepRow(eps, profile.rho, float(profile.envelope.values.max()),
                            profile.envelope.support_end(), params, math.inf,
                            note="d0 beyond reference level")
        val = math.exp(_ln_bound_at(profile, params.alpha, params.d0,
                                    reference_level))
        return SweepRow(eps, profile.rho, float(profile.envelope.values.max()),
                        profile.envelope.support_end(), params, val)

    eps_list = list(epsilons)
    with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
        rows = list(pool.map(one, eps_list))
    usable = [r for r in rows if math.isfinite(r.bound_at_reference)]
    argmin = min(usable, key=lambda r: r.bound_at_reference).epsilon if usable else None
    return SweepResult(rows=rows, reference_level=reference_level,
                       argmin_epsilon=argmin)
