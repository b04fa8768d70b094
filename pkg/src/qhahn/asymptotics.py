"""Steepest-descent toolkit: exponent functions on contours, descent
profiles, Taylor-coefficient diagnostics, and the series identities that
tie the scaling coefficients to the contour geometry.

Real parts of the exponent functions are evaluated through log|.| sums
(total functions away from exact zeros); full complex values use
factorwise principal logarithms, which is valid on the circles used here
because every factor except 1 - w itself stays in the open unit disk
around 1 - the 1 - w factor on the w-circle has the exact continuous form
log(1-q^theta) + i s.  Any factor leaving that disk is flagged as a
winding failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchError, ConvergenceError, DomainError
from .qspecial import QSeriesConfig, _log_qpoch_inf_array
from .scaling import ModelParams, ScalingCoefficients

__all__ = [
    "CircleC",
    "CircleD",
    "LogqImageOfC",
    "VContour",
    "VLine",
    "ExponentFunctions",
    "g_helper",
    "g_scaled",
    "lemma_checks",
    "steep_descent_check",
    "taylor_check",
    "identity_checks",
]


# ---------------------------------------------------------------------------
# contours


@dataclass(frozen=True)
class CircleC:
    """w(s) = 1 - (1 - q^theta) e^{is}, s in (-pi, pi]: circle through
    q^theta (s=0) and 2 - q^theta (s=pi), centered at 1."""

    q: float
    theta: float

    def points(self, s):
        s = np.asarray(s, dtype=float)
        return 1.0 - (1.0 - self.q**self.theta) * np.exp(1j * s)

    def tangents(self, s):
        s = np.asarray(s, dtype=float)
        return -1j * (1.0 - self.q**self.theta) * np.exp(1j * s)

    interval = (-math.pi, math.pi)


@dataclass(frozen=True)
class CircleD:
    """z(t) = q^theta e^{it}: circle of radius q^theta around 0."""

    q: float
    theta: float

    def points(self, t):
        t = np.asarray(t, dtype=float)
        return self.q**self.theta * np.exp(1j * t)

    def tangents(self, t):
        t = np.asarray(t, dtype=float)
        return 1j * self.q**self.theta * np.exp(1j * t)

    interval = (-math.pi, math.pi)


@dataclass(frozen=True)
class LogqImageOfC:
    """Image of CircleC under w -> log_q w (principal log; the circle
    stays in the right half plane so the image is smooth)."""

    q: float
    theta: float

    def points(self, s):
        w = CircleC(self.q, self.theta).points(s)
        return np.log(w) / math.log(self.q)

    def tangents(self, s):
        c = CircleC(self.q, self.theta)
        return c.tangents(s) / (c.points(s) * math.log(self.q))

    interval = (-math.pi, math.pi)


@dataclass(frozen=True)
class VContour:
    """{tip + e^{i phi sgn(t)} |t| : t in [-delta, delta]}, oriented
    upward (lower ray in, upper ray out)."""

    tip: complex
    phi: float
    delta: float

    def points(self, t):
        t = np.asarray(t, dtype=float)
        return self.tip + np.exp(1j * self.phi * np.sign(t)) * np.abs(t)

    def tangents(self, t):
        t = np.asarray(t, dtype=float)
        sg = np.where(t >= 0, 1.0, -1.0)
        return sg * np.exp(1j * self.phi * sg)

    @property
    def interval(self):
        return (-self.delta, self.delta)


@dataclass(frozen=True)
class VLine:
    """Vertical segment theta + i t, t in [-height, height]."""

    theta: float
    height: float

    def points(self, t):
        t = np.asarray(t, dtype=float)
        return self.theta + 1j * t

    def tangents(self, t):
        t = np.asarray(t, dtype=float)
        return np.full(t.shape, 1j)

    @property
    def interval(self):
        return (-self.height, self.height)


# ---------------------------------------------------------------------------
# exponent functions


class ExponentFunctions:
    """The three exponent functions of the kernel asymptotics, bound to one
    coefficient set and one observation frame (c, x).

        f0(z) = -f log z + kappa (L(nu z) - L(mu z)) + L(z) - L(nu z)
        f1(z) = -c phi log_q z + c (L(nu z) - L(mu z))
        f2(z) = beta_x log_q z

    with L(a) = log (a;q)_inf.  The sign of the log_q z term in f1 makes
    Z -> f1(q^Z) critical at Z = theta, consistently with the quadratic
    Taylor coefficient c phi'/2 and with the centering maps in `scaling`.
    """

    def __init__(self, coeffs: ScalingCoefficients, params: ModelParams,
                 c: float = 0.0, x: float = 0.0,
                 cfg: QSeriesConfig | None = None):
        if params.q != coeffs.q:
            raise DomainError("coefficients and params disagree on q")
        self.coeffs = coeffs
        self.params = params
        self.c = c
        self.x = x
        self.cfg = cfg or params.series_config()
        self.beta_x = (
            c * c * coeffs.phi_prime**2 / (4.0 * coeffs.chi)
            - coeffs.chi ** (1.0 / 3.0) * x
        )

    def _lp(self, a):
        """Vector log-Pochhammer with principal factor logs (lenient)."""
        return _log_qpoch_inf_array(a, self.params.q, self.cfg.tol, self.cfg.max_terms)

    def _check_disk(self, z):
        """Factorwise principal logs are single-valued iff every factor
        1 - a z q^k stays off the closed negative real axis; on our
        contours we enforce the stronger disk condition |a z q^k| < 1 for
        all factors except the k=0, a=1 one."""
        z = np.asarray(z)
        amax = max(self.params.mu, self.params.nu, self.params.q)
        if np.any(np.abs(z) * amax >= 1.0):
            raise BranchError(
                "a q-Pochhammer factor leaves the unit disk on this contour; "
                "principal factor logs would wind"
            )

    def f0(self, z):
        """Complex f0 with principal-branch logs; valid for z off the
        closed negative real axis with all factors in the safe disk."""
        z = np.asarray(z, dtype=complex)
        self._check_disk(z)
        if np.any((z.real <= 0) & (z.imag == 0)):
            raise BranchError("log z undefined on the closed negative real axis")
        co, pr = self.coeffs, self.params
        return (
            -co.f * np.log(z)
            + co.kappa * (self._lp(pr.nu * z) - self._lp(pr.mu * z))
            + self._lp(z)
            - self._lp(pr.nu * z)
        )

    def f1(self, z):
        z = np.asarray(z, dtype=complex)
        self._check_disk(z)
        co, pr = self.coeffs, self.params
        lqz = np.log(z) / math.log(pr.q)
        return self.c * (-co.phi * lqz + self._lp(pr.nu * z) - self._lp(pr.mu * z))

    def f2(self, z):
        z = np.asarray(z, dtype=complex)
        return self.beta_x * np.log(z) / math.log(self.params.q)

    def f0_real(self, z):
        """Re f0 through log|.| sums: total away from exact zeros, no
        branch bookkeeping needed."""
        z = np.asarray(z, dtype=complex)
        co, pr = self.coeffs, self.params
        out = -co.f * np.log(np.abs(z))
        for a, weight in ((pr.nu, co.kappa - 1.0), (pr.mu, -co.kappa), (1.0, 1.0)):
            if a == 0.0 or weight == 0.0:
                continue
            out = out + weight * self._log_abs_poch(a * z)
        return out

    def _log_abs_poch(self, a):
        a = np.asarray(a)
        q, tol = self.params.q, self.cfg.tol
        amax = float(np.max(np.abs(a)))
        if amax == 0.0:
            return np.zeros(a.shape)
        if 2 * amax / (1 - q) < tol:
            kmax = 1
        else:
            kmax = int(math.log(tol * (1.0 - q) / (2.0 * amax)) / math.log(q)) + 2
        powers = q ** np.arange(kmax)
        factors = 1.0 - np.multiply.outer(powers, a)
        return np.log(np.abs(factors)).sum(axis=0)

    def f0_on_circle_c(self, s):
        """Complex f0 along CircleC(theta) with a continuous branch.

        The k=0 factor of (z;q)_inf is 1 - w(s) = (1-q^theta) e^{is}
        exactly, so its continuous log is log(1-q^theta) + i s; all other
        factors stay in the open unit disk around 1 (checked), where the
        principal log is already continuous.
        """
        s = np.asarray(s, dtype=float)
        contour = CircleC(self.params.q, self.coeffs.theta)
        w = contour.points(s)
        co, pr = self.coeffs, self.params
        q = pr.q
        r = 1.0 - q**co.theta
        # all factors with a q^k != 1: require |a q^k w| < 1
        second = max(pr.mu, pr.nu, q)
        if np.any(np.abs(w) * second >= 1.0):
            raise BranchError("winding: factor modulus reached 1 on CircleC")
        out = -co.f * np.log(w)  # Re w > 0: principal log continuous
        out = out + co.kappa * (self._lp(pr.nu * w) - self._lp(pr.mu * w))
        out = out - self._lp(pr.nu * w)
        # (w;q)_inf: exact k=0 term + principal-safe tail
        out = out + math.log(r) + 1j * s + self._lp(q * w)
        return out


# ---------------------------------------------------------------------------
# descent diagnostics


@dataclass
class DescentProfile:
    monotone: bool
    max_at_zero: bool
    grid: np.ndarray
    values: np.ndarray
    contour: str


def steep_descent_check(
    ef: ExponentFunctions, contour: str = "C", grid_size: int = 4096
) -> DescentProfile:
    """Sample the descent functional on CircleC (-Re f0) or CircleD
    (+Re f0) and test that the maximum sits at parameter 0 with monotone
    decay toward +/- pi.

    Returns the diagnostic even when monotonicity fails.  A slack of 1e-12
    (scaled) absorbs rounding at the flat endpoints where the derivative
    vanishes.
    """
    q, theta = ef.params.q, ef.coeffs.theta
    s = np.linspace(-math.pi, math.pi, 2 * (grid_size // 2) + 1)
    if contour == "C":
        pts = CircleC(q, theta).points(s)
        values = -ef.f0_real(pts)
    elif contour == "D":
        pts = CircleD(q, theta).points(s)
        values = ef.f0_real(pts)
    else:
        raise DomainError(f"contour must be 'C' or 'D', got {contour!r}")
    mid = len(s) // 2
    scale = max(1.0, float(np.max(np.abs(values))))
    slack = 1e-12 * scale
    right = np.diff(values[mid:])
    left = np.diff(values[: mid + 1])
    monotone = bool(np.all(right <= slack) and np.all(left >= -slack))
    max_at_zero = bool(abs(values[mid] - values.max()) <= slack)
    return DescentProfile(
        monotone=monotone, max_at_zero=max_at_zero, grid=s, values=values,
        contour=contour,
    )


def taylor_check(ef: ExponentFunctions, h: float = 1e-3) -> dict:
    """Finite-difference probe of Z -> f_i(q^Z) at Z = theta.

    5-point central stencils; reports the first and second f0 derivatives
    (should vanish), the relative residual of f0''' against 2 chi, the
    residual of f1'' against c phi', and the deviation of f2's first
    difference from beta_x (f2 is exactly linear in Z).

    The third derivative combines the 5-point stencil at steps 2h and h by
    Richardson extrapolation: the single-step stencil has an h^2 bias of
    order f^(5) h^2 / 4, which at these parameter scales sits near 1e-5
    relative — above the 1e-6 target — while its roundoff floor
    prevents simply shrinking h.
    """
    q = ef.params.q
    theta = ef.coeffs.theta

    def stencils(fun, hh):
        zs = theta + hh * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
        vals = np.real(fun(q**zs))
        d1 = (-vals[4] + 8 * vals[3] - 8 * vals[1] + vals[0]) / (12 * hh)
        d2 = (-vals[4] + 16 * vals[3] - 30 * vals[2] + 16 * vals[1] - vals[0]) / (
            12 * hh * hh
        )
        d3 = (vals[4] - 2 * vals[3] + 2 * vals[1] - vals[0]) / (2 * hh**3)
        return d1, d2, d3

    d1, d2, d3_h = stencils(ef.f0, h)
    _, _, d3_2h = stencils(ef.f0, 2 * h)
    d3 = (4.0 * d3_h - d3_2h) / 3.0
    chi2 = 2.0 * ef.coeffs.chi
    out = {
        "f0_d1": float(d1),
        "f0_d2": float(d2),
        "f0_d3": float(d3),
        "f0_d3_residual": abs(d3 - chi2) / abs(chi2),
    }
    e1, e2_h, _ = stencils(ef.f1, h)
    _, e2_2h, _ = stencils(ef.f1, 2 * h)
    e2 = (4.0 * e2_h - e2_2h) / 3.0
    target = ef.c * ef.coeffs.phi_prime
    out["f1_d1"] = float(e1)
    out["f1_d2_residual"] = (
        abs(e2 - target) / abs(target) if target != 0.0 else abs(e2)
    )
    zs = theta + h * np.array([-1.0, 0.0, 1.0])
    f2v = np.real(ef.f2(q**zs))
    first = (f2v[2] - f2v[1]) / h
    second = (f2v[2] - 2 * f2v[1] + f2v[0]) / (h * h)
    out["f2_d1_residual"] = abs(first - ef.beta_x)
    out["f2_d2"] = float(second)
    return out


# ---------------------------------------------------------------------------
# the comparison function g and its inequalities


def g_helper(b: float, s):
    """g(b, s) = b sin s / (1 + b^2 - 2 b cos s) for |b| < 1."""
    if not abs(b) < 1.0:
        raise DomainError(f"|b| < 1 required, got b={b}")
    s = np.asarray(s, dtype=float)
    return b * np.sin(s) / (1.0 + b * b - 2.0 * b * np.cos(s))


def g_scaled(b: float, s):
    """(1-b)^2 g(b,s) / b, with the analytic limit sin s at b = 0."""
    if not abs(b) < 1.0:
        raise DomainError(f"|b| < 1 required, got b={b}")
    s = np.asarray(s, dtype=float)
    if b == 0.0:
        return np.sin(s)
    return (1.0 - b) ** 2 * np.sin(s) / (1.0 + b * b - 2.0 * b * np.cos(s))


def lemma_checks(grid_size: int = 512, b_values=None) -> dict:
    """Numerical margins of the two comparison-function inequalities.

    part 1: b <= c implies scaled g(b,.) >= scaled g(c,.) on [0, pi];
    part 2: (scaled g(b/2, t))^2 >= scaled g(b, t) * sin t on [0, pi].
    Returned margins are the minima of LHS - RHS; nonnegative (up to
    rounding) when the inequalities hold.
    """
    s = np.linspace(0.0, math.pi, grid_size)
    if b_values is None:
        b_values = np.concatenate([
            np.linspace(-0.95, 0.95, 39),
        ])
    margin1 = math.inf
    for i, b in enumerate(b_values):
        for c in b_values[i + 1 :]:
            diff = g_scaled(float(b), s) - g_scaled(float(c), s)
            margin1 = min(margin1, float(diff.min()))
    margin2 = math.inf
    for b in np.linspace(0.02, 0.98, 49):
        lhs = g_scaled(float(b) / 2.0, s) ** 2
        rhs = g_scaled(float(b), s) * np.sin(s)
        margin2 = min(margin2, float((lhs - rhs).min()))
    return {"part1_margin": margin1, "part2_margin": margin2}


# ---------------------------------------------------------------------------
# series identities


def identity_checks(ef: ExponentFunctions, tol: float = 1e-14,
                    max_terms: int = 100_000) -> dict:
    """Residuals of the two series identities behind the descent proofs.

    The first expresses f as a weighted series over the contour-comparison
    prefactors (with r = 1 - q^theta and h(a,k) = r a q^k/(1 - a q^k)):

        f = kappa * sum_k [1 - P(mu,k) Q(nu,k)] S(mu,k)
              +     sum_k [1 - P(nu,k) Q'(k)]  S(nu,k)

    with P(a,k) = (1+h)^2/h, Q(a,k) = h/(1+h)^2 and S(a,k) =
    ((1-r)^2/r) h/(1+h)^2; the second expresses the constant 1 through the
    derivative series of kappa's defining combination.
    """
    co, pr = ef.coeffs, ef.params
    q, mu, nu = pr.q, pr.mu, pr.nu
    r = 1.0 - q**co.theta

    def h_of(a, qk):
        v = a * qk
        return r * v / (1.0 - v)

    total = 0.0
    qk = 1.0
    for k in range(max_terms):
        hmu = h_of(mu, qk)
        hnu = h_of(nu, qk)
        hq = h_of(q, qk)  # the q^{k+1} comparison term
        term1 = (
            1.0 - ((1.0 + hmu) ** 2 / hmu) * (hnu / (1.0 + hnu) ** 2)
        ) * ((1.0 - r) ** 2 / r) * (hmu / (1.0 + hmu) ** 2)
        term2 = (
            1.0 - ((1.0 + hnu) ** 2 / hnu) * (hq / (1.0 + hq) ** 2)
        ) * ((1.0 - r) ** 2 / r) * (hnu / (1.0 + hnu) ** 2)
        term = co.kappa * term1 + term2
        total += term
        if abs(term) < tol * (1.0 - q) and k > 2:
            break
        qk *= q
    else:
        raise ConvergenceError("f-identity series hit the term cap")
    f_residual = abs(total - co.f)

    qtk = q**co.theta
    total2 = 0.0
    yk = qtk
    for k in range(max_terms):
        tmu = mu * yk / (1.0 - mu * yk) ** 2
        tnu = nu * yk / (1.0 - nu * yk) ** 2
        tq = q * yk / (1.0 - q * yk) ** 2
        term = co.kappa * (tmu - tnu) + tnu - tq
        total2 += term
        if abs(term) < tol * (1.0 - q) and k >  2:
            break
        yk *= q
    else:
        raise ConvergenceError("unit-identity series hit the term cap")
    one_residual = abs((1.0 - qtk) ** 2 / qtk * total2 - 1.0)
    return {"f_identity_residual": f_residual, "one_identity_residual": one_residual}
