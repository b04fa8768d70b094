"""q-series special functions with explicit truncation control.

Everything is a truncated series or product whose tail is bounded by a
geometric envelope with ratio ``q``; the truncation index is chosen so the
tail bound drops below the configured absolute tolerance.  Ratios of
infinite q-Pochhammer symbols are always formed as differences of log-sums,
never as quotients of tiny products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchError, ConvergenceError, DomainError, PoleError

__all__ = [
    "QSeriesConfig",
    "q_pochhammer_finite",
    "log_q_pochhammer_infinite",
    "q_gamma",
    "q_digamma",
    "q_digamma_limit",
    "q_binomial_theorem_check",
]


@dataclass(frozen=True)
class QSeriesConfig:
    """Evaluation policy: base ``q``, absolute tail tolerance, term cap."""

    q: float
    tol: float = 1e-13
    max_terms: int = 100_000

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise DomainError(f"q must lie in (0,1), got {self.q}")
        if not self.tol > 0.0:
            raise DomainError(f"tol must be positive, got {self.tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


def q_pochhammer_finite(a, q: float, n: int):
    """Finite product prod_{k=0}^{n-1} (1 - a q^k); the empty product is 1.

    Total function: accepts any complex ``a``.
    """
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0,1), got {q}")
    if n < 0:
        raise DomainError(f"n must be a nonnegative integer, got {n}")
    result = 1.0 + 0.0j if isinstance(a, complex) else 1.0
    x = a
    for _ in range(n):
        result *= 1.0 - x
        x *= q
    return result


def log_q_pochhammer_infinite(a, cfg: QSeriesConfig):
    """Sum_{k>=0} log(1 - a q^k), truncated with absolute tail below tol.

    Exponentiating gives the infinite symbol.  Factorwise principal
    logarithms are used, so the result is only meaningful when no factor
    crosses the closed negative real axis; such factors raise BranchError
    (PoleError if a factor vanishes exactly).
    """
    q, tol = cfg.q, cfg.tol
    if a == 0:
        return 0.0
    is_complex = isinstance(a, complex)
    total = 0.0j if is_complex else 0.0
    x = a
    for k in range(cfg.max_terms):
        # tail bound: |log(1 - a q^j)| <= 2 |a| q^j once |a q^j| <= 1/2
        if abs(x) <= 0.5 and 2.0 * abs(x) / (1.0 - q) < tol:
            return total
        f = 1.0 - x
        if f == 0:
            raise PoleError(f"factor 1 - a q^{k} vanishes for a={a}")
        if is_complex:
            if f.imag == 0.0 and f.real < 0.0:
                raise BranchError(
                    f"factor 1 - a q^{k} = {f} lies on the negative real axis"
                )
            total += complex(np.log(f))
        else:
            if f < 0.0:
                raise BranchError(
                    f"factor 1 - a q^{k} = {f} is negative; no real logarithm"
                )
            total += math.log1p(-x)
        x *= q
    raise ConvergenceError(
        f"log q-Pochhammer did not converge within {cfg.max_terms} terms"
    )


def _log_qpoch_inf_array(a, q: float, tol: float = 1e-14, max_terms: int = 100_000):
    """Vectorized sum_k log(1 - a q^k) with factorwise principal logs.

    Lenient branch policy (no BranchError): intended for callers that only
    consume exp() or the real part of the result, both of which are
    insensitive to the 2*pi*i branch ambiguity.  NaN/inf propagate from
    exact poles.
    """
    a = np.asarray(a)
    amax = np.max(np.abs(a)) if a.size else 0.0
    if amax == 0.0:
        return np.zeros(a.shape, dtype=a.dtype if a.dtype.kind == "c" else float)
    # smallest k with 2 amax q^k / (1-q) < tol
    kmax = int(math.log(tol * (1.0 - q) / (2.0 * amax)) / math.log(q)) + 2 if 2 * amax / (1 - q) >= tol else 1
    if kmax > max_terms:
        raise ConvergenceError("array log q-Pochhammer exceeds term cap")
    powers = q ** np.arange(max(kmax, 1))
    factors = 1.0 - np.multiply.outer(powers, a)
    if np.iscomplexobj(factors):
        logs = np.log(factors)
    else:
        logs = np.log1p(-np.multiply.outer(powers, a))
    return logs.sum(axis=0)


def q_gamma(z: float, cfg: QSeriesConfig) -> float:
    """(1-q)^(1-z) (q;q)_inf / (q^z;q)_inf for real z > 0."""
    if z <= 0.0:
        raise DomainError(f"q-gamma implemented for z > 0 only, got {z}")
    q = cfg.q
    log_num = log_q_pochhammer_infinite(q, cfg)
    log_den = log_q_pochhammer_infinite(q**z, cfg)
    return (1.0 - q) ** (1.0 - z) * math.exp(log_num - log_den)


# term(y) of the digamma-type series for each derivative order; y = q^(z+k)
_DIGAMMA_TERMS = {
    0: lambda y: y / (1.0 - y),
    1: lambda y: y / (1.0 - y) ** 2,
    2: lambda y: y * (1.0 + y) / (1.0 - y) ** 3,
    3: lambda y: y * (1.0 + 4.0 * y + y * y) / (1.0 - y) ** 4,
}


def q_digamma(z: float, order: int, cfg: QSeriesConfig) -> float:
    """q-digamma and its z-derivatives up to third order.

    order 0:  -log(1-q) + log q * sum_k q^(z+k) / (1 - q^(z+k))
    order m:  term-wise m-th derivative of the series, i.e. the sum of
              (log q)^(m+1) r_m(q^(z+k)) with r_m a rational function.
    """
    if z <= 0.0:
        raise DomainError(f"q-digamma implemented for z > 0 only, got {z}")
    if order not in _DIGAMMA_TERMS:
        raise DomainError(f"order must be one of 0,1,2,3, got {order}")
    q, tol = cfg.q, cfg.tol
    lq = math.log(q)
    prefactor = lq ** (order + 1)
    term_of = _DIGAMMA_TERMS[order]
    total = 0.0
    y = q**z
    for _ in range(cfg.max_terms):
        term = prefactor * term_of(y)
        total += term
        # geometric tail: remaining terms shrink at least like q^k
        if abs(term) < tol * (1.0 - q):
            value = total
            if order == 0:
                value += -math.log1p(-q)
            return value
        y *= q
    raise ConvergenceError(
        f"q-digamma series (order {order}) hit the cap of {cfg.max_terms} terms"
    )


def q_digamma_limit(order: int, cfg: QSeriesConfig) -> float:
    """z -> +infinity limit of q_digamma: -log(1-q) at order 0, else 0."""
    if order not in _DIGAMMA_TERMS:
        raise DomainError(f"order must be one of 0,1,2,3, got {order}")
    return -math.log1p(-cfg.q) if order == 0 else 0.0


def q_binomial_theorem_check(a: float, z: float, q: float, cfg: QSeriesConfig | None = None) -> float:
    """Residual of sum_n ((a;q)_n/(q;q)_n) z^n against (az;q)_inf/(z;q)_inf.

    Self-test utility; both sides are summed independently and the
    absolute difference is returned.
    """
    if not abs(z) < 1.0:
        raise DomainError(f"|z| < 1 required, got z={z}")
    cfg = cfg or QSeriesConfig(q=q)
    if cfg.q != q:
        cfg = QSeriesConfig(q=q, tol=cfg.tol, max_terms=cfg.max_terms)
    lhs = 0.0
    coeff = 1.0  # (a;q)_n / (q;q)_n
    aq = a
    qq = q
    zn = 1.0
    for _ in range(cfg.max_terms):
        term = coeff * zn
        lhs += term
        # remaining terms are bounded by |term| * r / (1 - r) once the
        # one-step growth ratio r stays below 1
        r = abs(z) * (1.0 + abs(aq)) / (1.0 - qq)
        if r < 1.0 and abs(term) * r / (1.0 - r) < cfg.tol:
            break
        coeff *= (1.0 - aq) / (1.0 - qq)
        aq *= q
        qq *= q
        zn *= z
    else:
        raise ConvergenceError("q-binomial series hit the term cap")
    rhs = math.exp(
        log_q_pochhammer_infinite(a * z, cfg) - log_q_pochhammer_infinite(z, cfg)
    )
    return abs(lhs - rhs)
