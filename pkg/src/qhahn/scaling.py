"""Deterministic macroscopic and KPZ-scale quantities.

All scaling coefficients are combinations of the q-digamma function and its
derivatives evaluated at theta, theta + log_q(mu) and theta + log_q(nu).
Derivatives in theta are always taken analytically through the digamma
series; finite differences appear only in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, RangeError
from .qspecial import QSeriesConfig, q_digamma, q_digamma_limit

__all__ = [
    "ModelParams",
    "ScalingCoefficients",
    "ScalingMaps",
    "coefficients",
    "theta_from_kappa",
    "macroscopic_curve",
    "scaling_maps",
    "xi_of",
    "time_parametrized",
    "stationary_density_current",
    "alpha_from_density",
    "kpz_quantities",
    "height_fluctuation_coefficient",
]

_BISECT_CAP = 200


@dataclass(frozen=True)
class ModelParams:
    """The model triple (q, mu, nu) plus derived validity flags.

    Construction enforces 0 < q < 1 and 0 <= nu <= mu < 1; the stricter
    conditions are computed, not assumed.
    """

    q: float
    mu: float
    nu: float

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise DomainError(f"q must lie in (0,1), got {self.q}")
        if not 0.0 <= self.nu <= self.mu < 1.0:
            raise DomainError(
                f"need 0 <= nu <= mu < 1, got nu={self.nu}, mu={self.mu}"
            )

    @property
    def strict_order(self) -> bool:
        """0 < nu < mu < 1: the generic parameter regime."""
        return 0.0 < self.nu < self.mu < 1.0

    @property
    def cond_munu(self) -> bool:
        """q <= nu < mu <= 1/2: needed for the steep-descent bounds."""
        return self.q <= self.nu < self.mu <= 0.5

    @property
    def theta_bound(self) -> float:
        """Upper bound log_q(2q/(1+q)) on theta; positive for q in (0,1)."""
        return math.log(2.0 * self.q / (1.0 + self.q)) / math.log(self.q)

    def theta_ok(self, theta: float) -> bool:
        return 0.0 < theta < self.theta_bound

    def series_config(self, tol: float = 1e-13) -> QSeriesConfig:
        return QSeriesConfig(q=self.q, tol=tol)


@dataclass(frozen=True)
class ScalingCoefficients:
    """The coefficient set (theta, kappa, f, chi, phi, phi') driving every
    scaling map, together with the base q for unit conversions."""

    q: float
    theta: float
    kappa: float
    f: float
    chi: float
    phi: float
    phi_prime: float

    @property
    def log_q(self) -> float:
        return math.log(self.q)


class _Digamma:
    """q-digamma evaluations at shifted arguments, with the nu=0 case
    mapped to the finite z -> infinity limits."""

    def __init__(self, params: ModelParams, cfg: QSeriesConfig):
        self.params = params
        self.cfg = cfg
        lq = math.log(params.q)
        self.shift_mu = math.log(params.mu) / lq if params.mu > 0 else math.inf
        self.shift_nu = math.log(params.nu) / lq if params.nu > 0 else math.inf

    def at(self, z: float, order: int) -> float:
        if math.isinf(z):
            return q_digamma_limit(order, self.cfg)
        return q_digamma(z, order, self.cfg)

    def triple(self, theta: float, order: int):
        """(psi(theta), psi(theta+log_q mu), psi(theta+log_q nu)) at order."""
        return (
            self.at(theta, order),
            self.at(theta + self.shift_mu, order),
            self.at(theta + self.shift_nu, order),
        )


def coefficients(
    params: ModelParams, theta: float, cfg: QSeriesConfig | None = None
) -> ScalingCoefficients:
    """Evaluate (kappa, f, chi, phi, phi') at the fan parameter theta."""
    if theta <= 0.0:
        raise DomainError(f"theta must be positive, got {theta}")
    if params.mu == params.nu:
        raise DomainError("coefficients need nu < mu (degenerate dynamics otherwise)")
    cfg = cfg or params.series_config()
    dg = _Digamma(params, cfg)
    lq = math.log(params.q)

    p0, pmu, pnu = dg.triple(theta, 0)
    d0, dmu, dnu = dg.triple(theta, 1)
    s0, smu, snu = dg.triple(theta, 2)

    denom = dmu - dnu
    if denom == 0.0:
        raise DomainError("psi'(theta+log_q mu) == psi'(theta+log_q nu); "
                          "kappa undefined for these parameters")
    kappa = (d0 - dnu) / denom
    f = (kappa * (pmu - pnu) + pnu - p0) / lq
    chi = (kappa * (smu - snu) + snu - s0) / 2.0
    phi = pmu - pnu
    phi_prime = dmu - dnu
    return ScalingCoefficients(
        q=params.q, theta=theta, kappa=kappa, f=f, chi=chi,
        phi=phi, phi_prime=phi_prime,
    )


def _kappa_only(params: ModelParams, theta: float, cfg: QSeriesConfig) -> float:
    dg = _Digamma(params, cfg)
    d0, dmu, dnu = dg.triple(theta, 1)
    return (d0 - dnu) / (dmu - dnu)


def kappa_limits(params: ModelParams):
    """(lim_{theta->inf} kappa, lim_{theta->0} kappa) = ((1-nu)/(mu-nu), inf)."""
    lo = (1.0 - params.nu) / (params.mu - params.nu)
    return lo, math.inf


def theta_from_kappa(
    params: ModelParams, kappa_target: float, cfg: QSeriesConfig | None = None
) -> float:
    """Invert the strictly decreasing map theta -> kappa by bisection."""
    cfg = cfg or params.series_config()
    lo_limit, hi_limit = kappa_limits(params)
    if not lo_limit < kappa_target < hi_limit:
        raise RangeError(
            f"kappa={kappa_target} unattainable; attainable interval is "
            f"({lo_limit}, {hi_limit})",
            interval=(lo_limit, hi_limit),
        )
    # kappa decreases in theta: bracket the target
    th_lo, th_hi = 1.0, 1.0
    for _ in range(_BISECT_CAP):
        if _kappa_only(params, th_lo, cfg) > kappa_target:
            break
        th_lo /= 2.0
    for _ in range(_BISECT_CAP):
        if _kappa_only(params, th_hi, cfg) < kappa_target:
            break
        th_hi *= 2.0
    for _ in range(_BISECT_CAP):
        mid = 0.5 * (th_lo + th_hi)
        k_mid = _kappa_only(params, mid, cfg)
        if abs(k_mid - kappa_target) < 1e-10:
            return mid
        if k_mid > kappa_target:
            th_lo = mid
        else:
            th_hi = mid
    return 0.5 * (th_lo + th_hi)


def macroscopic_curve(
    params: ModelParams, theta_grid, cfg: QSeriesConfig | None = None
):
    """Points (x, y) = (f/kappa, 1/kappa) of the rarefaction-fan curve.

    Returns (points, endpoints): points is a list of (theta, x, y) and
    endpoints maps 'theta_to_0' / 'theta_to_inf' to the labeled limit
    points where the curve touches the axes.
    """
    cfg = cfg or params.series_config()
    pts = []
    for theta in theta_grid:
        co = coefficients(params, theta, cfg)
        pts.append((theta, co.f / co.kappa, 1.0 / co.kappa))
    dg = _Digamma(params, cfg)
    lq = math.log(params.q)
    x0 = (dg.at(dg.shift_mu, 0) - dg.at(dg.shift_nu, 0)) / lq
    y_inf = (params.mu - params.nu) / (1.0 - params.nu)
    endpoints = {"theta_to_0": (x0, 0.0), "theta_to_inf": (0.0, y_inf)}
    return pts, endpoints


@dataclass(frozen=True)
class ScalingMaps:
    tau: float
    p: float
    beta_x: float


def scaling_maps(coeffs: ScalingCoefficients, N: int, c: float, x: float) -> ScalingMaps:
    """Time, centering and Fredholm shift for the (N, c, x) observation frame.

        tau(N,c)  = kappa N + c N^(2/3)
        p(N,c)    = (f-1) N + (c phi / log q) N^(2/3)
                    - (c^2 phi'^2 / (4 chi log q)) N^(1/3)
        beta_x    = c^2 phi'^2 / (4 chi) - chi^(1/3) x

    The N^(2/3) coefficient of p is the tagged-particle velocity phi/log q
    (positive) times the extra time c N^(2/3); the N^(1/3) term is the
    second-order Taylor correction with d(velocity)/d(tau) =
    -phi'^2/(2 chi N log q).
    """
    if N < 1:
        raise DomainError(f"N must be a positive integer, got {N}")
    n23 = float(N) ** (2.0 / 3.0)
    n13 = float(N) ** (1.0 / 3.0)
    lq = coeffs.log_q
    tau = coeffs.kappa * N + c * n23
    p = (
        (coeffs.f - 1.0) * N
        + (c * coeffs.phi / lq) * n23
        - (c * c * coeffs.phi_prime**2 / (4.0 * coeffs.chi * lq)) * n13
    )
    beta_x = c * c * coeffs.phi_prime**2 / (4.0 * coeffs.chi) - coeffs.chi ** (1.0 / 3.0) * x
    return ScalingMaps(tau=tau, p=p, beta_x=beta_x)


def xi_of(coeffs: ScalingCoefficients, X: float, N: int, c: float) -> float:
    """Rescaled tagged-particle position.

    The denominator chi^(1/3) N^(1/3) / log q is negative, so positions
    above the centering map to negative xi.
    """
    maps = scaling_maps(coeffs, N, c, 0.0)
    denom = coeffs.chi ** (1.0 / 3.0) * float(N) ** (1.0 / 3.0) / coeffs.log_q
    return (X - maps.p) / denom


def time_parametrized(coeffs: ScalingCoefficients, tau: float, c: float):
    """Label and centering as functions of the time tau.

    N(tau,c) inverts tau(N,c) = kappa N + c N^(2/3) through third order;
    P(tau,c) = p(N(tau,c), c) expanded to the tau^(1/3) order.
    """
    if tau <= 0.0:
        raise DomainError(f"tau must be positive, got {tau}")
    k = coeffs.kappa
    lq = coeffs.log_q
    f1 = coeffs.f - 1.0
    t23 = tau ** (2.0 / 3.0)
    t13 = tau ** (1.0 / 3.0)
    N = tau / k - c * t23 / k ** (5.0 / 3.0) + 2.0 * c * c * t13 / (3.0 * k ** (7.0 / 3.0))
    P = (
        f1 * tau / k
        + c * (coeffs.phi / (k ** (2.0 / 3.0) * lq) - f1 / k ** (5.0 / 3.0)) * t23
        + c * c * (
            2.0 * f1 / (3.0 * k ** (7.0 / 3.0))
            - 2.0 * coeffs.phi / (3.0 * k ** (4.0 / 3.0) * lq)
            - coeffs.phi_prime**2 / (4.0 * coeffs.chi * k ** (1.0 / 3.0) * lq)
        ) * t13
    )
    return N, P


def stationary_density_current(
    params: ModelParams, alpha: float, cfg: QSeriesConfig | None = None
):
    """Density rho and bond current j of the stationary measure with
    fugacity alpha in (0,1)."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    cfg = cfg or params.series_config()
    dg = _Digamma(params, cfg)
    lq = math.log(params.q)
    la = math.log(alpha) / lq
    pa = dg.at(la, 0)
    pam = dg.at(la + dg.shift_mu, 0)
    pan = dg.at(la + dg.shift_nu, 0)
    denom = lq + pa - pan
    rho = lq / denom
    j = (pam - pan) / denom
    return rho, j


def alpha_from_density(
    params: ModelParams, rho_target: float, cfg: QSeriesConfig | None = None
) -> float:
    """Invert the strictly decreasing map alpha -> rho by bisection."""
    cfg = cfg or params.series_config()
    if not 0.0 < rho_target < 1.0:
        raise RangeError(
            f"rho={rho_target} unattainable; densities lie strictly in (0,1)",
            interval=(0.0, 1.0),
        )
    lo, hi = 1e-300, 1.0 - 1e-16
    rho_hi = stationary_density_current(params, hi, cfg)[0]
    if rho_target < rho_hi:
        raise RangeError(
            f"rho={rho_target} below the resolvable range (> {rho_hi})",
            interval=(rho_hi, 1.0),
        )
    for _ in range(_BISECT_CAP):
        mid = 0.5 * (lo + hi)
        rho_mid = stationary_density_current(params, mid, cfg)[0]
        if abs(rho_mid - rho_target) < 1e-10:
            return mid
        if rho_mid > rho_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class KpzQuantities:
    lam: float
    A: float
    coeff_residual: float


def kpz_quantities(
    params: ModelParams, theta: float, cfg: QSeriesConfig | None = None
) -> KpzQuantities:
    """KPZ scaling-theory inputs lambda = j''(rho)/2 and the gap-law
    curvature constant A, plus the residual of the non-universal-scale
    identity -lambda A^2 / 2 = -8 chi / (a^3 kappa).

    With a = log q + psi(theta) - psi(theta+log_q nu) and b = phi, one has
    rho = log q / a and j = b / a, and all theta-derivatives are analytic
    digamma derivatives.
    """
    if theta <= 0.0:
        raise DomainError(f"theta must be positive, got {theta}")
    if not params.strict_order:
        raise DomainError("kpz_quantities needs 0 < nu < mu < 1")
    cfg = cfg or params.series_config()
    dg = _Digamma(params, cfg)
    lq = math.log(params.q)

    p0, pmu, pnu = dg.triple(theta, 0)
    d0, dmu, dnu = dg.triple(theta, 1)
    s0, smu, snu = dg.triple(theta, 2)

    a = lq + p0 - pnu
    a1 = d0 - dnu
    a2 = s0 - snu
    b1 = dmu - dnu
    b2 = smu - snu

    lam = a**3 * (b2 * a1 - a2 * b1) / (2.0 * a1**3 * lq**2)
    A = 4.0 * a1 * lq / a**3

    co = coefficients(params, theta, cfg)
    lhs = -0.5 * lam * A * A
    rhs = -8.0 * co.chi / (a**3 * co.kappa)
    return KpzQuantities(lam=lam, A=A, coeff_residual=abs(lhs - rhs) / abs(rhs))


def height_fluctuation_coefficient(
    params: ModelParams, theta: float, cfg: QSeriesConfig | None = None
):
    """Coefficient of the rescaled fluctuation variable in the height
    observable, and the deterministic mean term (f+1)/kappa.

    The coefficient 2/a * (chi/kappa)^(1/3) is negative since
    a = log q + psi(theta) - psi(theta+log_q nu) < 0.
    """
    cfg = cfg or params.series_config()
    dg = _Digamma(params, cfg)
    lq = math.log(params.q)
    a = lq + dg.at(theta, 0) - dg.at(theta + dg.shift_nu, 0)
    co = coefficients(params, theta, cfg)
    coeff = 2.0 / a * (co.chi / co.kappa) ** (1.0 / 3.0)
    mean_term = (co.f + 1.0) / co.kappa
    return coeff, mean_term
