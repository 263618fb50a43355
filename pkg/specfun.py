"""
Special functions behind the BER formulas.

Gaussian Q, the zero-order modified Bessel function I0, the generalized Marcum
Q function, the Rician pair error probability and the closed-form integral of
x*exp(-p^2 x^2/2)*I0(cx)*Q1(beta, alpha x) together with its quadrature oracle.

All functions accept scalars or numpy arrays (broadcast against each other)
and return a Python float for scalar input.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate, special, stats

from config import Config, get_config
from errors import DomainError

logger = logging.getLogger(__name__)

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SpecFunConfig:
    """
    Tolerances used by the quadrature oracles.

    There is no series truncation tolerance: the correlation closed forms use
    sinc directly and Q1, I0 come from scipy. quad_rel_tol matters because the
    appendix integral grows like exp(c^2/(2p^2)), so closed form and quadrature
    are compared within 1e-6*max(1, |quad|) rather than 1e-6 absolute.
    """

    quad_abs_tol: float = 1e-10
    quad_rel_tol: float = 1e-10
    quad_max_subdiv: int = 200

    def __post_init__(self) -> None:
        if not (self.quad_abs_tol > 0 and self.quad_rel_tol > 0):
            raise DomainError("Quadrature tolerances must be positive")
        if self.quad_max_subdiv < 64:
            raise DomainError(f"quad_max_subdiv must be at least 64, got {self.quad_max_subdiv}")

    @classmethod
    def from_config(cls, cfg: Config | None = None) -> "SpecFunConfig":
        """Build tolerances from the application configuration."""
        cfg = cfg or get_config()
        return cls(
            quad_abs_tol=cfg.quad_abs_tol,
            quad_rel_tol=cfg.quad_rel_tol,
            quad_max_subdiv=cfg.quad_max_subdiv,
        )


def _as_output(values: np.ndarray) -> float | np.ndarray:
    if np.ndim(values) == 0:
        return float(values)
    return values


def _require_finite(name: str, values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise DomainError(f"{name} must be finite")


def _require_non_negative(name: str, values: np.ndarray) -> None:
    if np.any(np.isnan(values)) or np.any(values < 0):
        raise DomainError(f"{name} must be non-negative")


def gaussian_q(x: ArrayLike) -> float | np.ndarray:
    """
    Tail probability of the standard normal distribution.

    Args:
        x: Finite argument(s)

    Returns:
        Q(x) = P(Z > x), underflowing gracefully to 0.0 far in the tail

    Raises:
        DomainError: If any argument is not finite
    """
    x = np.asarray(x, dtype=float)
    _require_finite("x", x)
    return _as_output(0.5 * special.erfc(x / _SQRT2))


def bessel_i0(x: ArrayLike) -> float | np.ndarray:
    """
    Modified Bessel function of the first kind, order zero.

    Negative arguments are accepted through the even symmetry I0(-x) = I0(x).

    Raises:
        DomainError: If any argument is NaN
        OverflowError: If I0(x) is not representable as a float (|x| > ~713)
    """
    x = np.abs(np.asarray(x, dtype=float))
    if np.any(np.isnan(x)):
        raise DomainError("x must not be NaN")
    values = special.i0(x)
    if np.any(np.isinf(values)):
        raise OverflowError(
            f"I0 overflows for |x| = {float(np.max(x))}; use bessel_i0_log for large arguments"
        )
    return _as_output(values)


def bessel_i0_log(x: ArrayLike) -> float | np.ndarray:
    """Natural logarithm of I0(x), finite for every finite argument."""
    x = np.abs(np.asarray(x, dtype=float))
    if np.any(np.isnan(x)):
        raise DomainError("x must not be NaN")
    return _as_output(np.log(special.i0e(x)) + x)


def exp_bessel_i0(exponent: ArrayLike, z: ArrayLike) -> float | np.ndarray:
    """
    Evaluate exp(exponent) * I0(z) without forming I0(z) on its own.

    The exponentially scaled Bessel function keeps the product finite when
    exponent is large and negative and z is large and positive, which is the
    regime of every noncoherent BER term at high SNR.
    """
    exponent = np.asarray(exponent, dtype=float)
    z = np.abs(np.asarray(z, dtype=float))
    return _as_output(np.exp(exponent + z) * special.i0e(z))


def marcum_q(k: int, a: ArrayLike, b: ArrayLike) -> float | np.ndarray:
    """
    Generalized Marcum Q function Q_k(a, b).

    Q_k(a, b) is the survival function at b^2 of a noncentral chi-squared
    variable with 2k degrees of freedom and noncentrality a^2. For a = 0 it
    reduces to the central chi-squared tail, evaluated as gammaincc(k, b^2/2).

    Args:
        k: Integer order (>= 1)
        a: Noncentrality parameter(s) (>= 0)
        b: Threshold(s) (>= 0)

    Returns:
        Probability in [0, 1]

    Raises:
        DomainError: On non-integer or non-positive order, or negative arguments
    """
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise DomainError(f"Marcum Q order must be a positive integer, got {k}")
    k = int(k)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _require_non_negative("a", a)
    _require_non_negative("b", b)
    a, b = np.broadcast_arrays(a, b)

    central = special.gammaincc(k, 0.5 * b * b)
    # Dummy noncentrality where a == 0 so the noncentral branch stays well defined
    nc = np.where(a > 0, a * a, 1.0)
    noncentral = stats.ncx2.sf(b * b, 2 * k, nc)
    values = np.where(a > 0, noncentral, central)
    values = np.where(b > 0, values, 1.0)
    return _as_output(np.clip(values, 0.0, 1.0))


def marcum_q_quad(k: int, a: float, b: float, cfg: SpecFunConfig | None = None) -> float:
    """
    Marcum Q_k(a, b) by direct quadrature of its defining integral.

    Used as an independent oracle for marcum_q. The integrand is evaluated
    with the exponentially scaled Bessel function ive so that large a does
    not overflow.
    """
    cfg = cfg or SpecFunConfig()
    if k < 1 or a < 0 or b < 0:
        raise DomainError("marcum_q_quad requires k >= 1 and a, b >= 0")
    if b == 0:
        return 1.0
    upper = max(a, b) + 40.0

    if a == 0:
        norm = 1.0 / (2.0 ** (k - 1) * math.factorial(k - 1))

        def integrand(x: float) -> float:
            return norm * x ** (2 * k - 1) * math.exp(-0.5 * x * x)

    else:

        def integrand(x: float) -> float:
            return x * (x / a) ** (k - 1) * math.exp(-0.5 * (x - a) ** 2) * special.ive(k - 1, a * x)

    points = [a] if b < a < upper else None
    value, _ = integrate.quad(
        integrand,
        b,
        upper,
        epsabs=cfg.quad_abs_tol * 1e-3,
        epsrel=cfg.quad_rel_tol,
        limit=cfg.quad_max_subdiv,
        points=points,
    )
    return value


def rician_pair_error(X: ArrayLike, Y: ArrayLike, sigma: ArrayLike) -> float | np.ndarray:  # noqa: N803
    """
    Probability that a Rician envelope with noncentrality Y exceeds one with noncentrality X.

    Both envelopes share the per-dimension Gaussian scale sigma:

        P = Q1(Y / (sigma*sqrt2), X / (sigma*sqrt2))
            - 1/2 * exp(-(X^2 + Y^2) / (4 sigma^2)) * I0(X*Y / (2 sigma^2))

    Args:
        X: Noncentrality of the branch carrying the wanted symbol
        Y: Noncentrality of the competing branch
        sigma: Common Gaussian scale (> 0)

    Returns:
        Pairwise error probability; 1/2 when X == Y

    Raises:
        DomainError: If sigma <= 0 or X, Y are negative
    """
    X = np.asarray(X, dtype=float)  # noqa: N806
    Y = np.asarray(Y, dtype=float)  # noqa: N806
    sigma = np.asarray(sigma, dtype=float)
    if np.any(np.isnan(sigma)) or np.any(sigma <= 0):
        raise DomainError("sigma must be positive")
    _require_non_negative("X", X)
    _require_non_negative("Y", Y)

    scale = sigma * _SQRT2
    q1 = np.asarray(marcum_q(1, Y / scale, X / scale))
    two_var = 2.0 * sigma * sigma
    # exp(-(X^2+Y^2)/(4s^2)) * I0(XY/(2s^2)) = exp(-(X-Y)^2/(4s^2)) * i0e(XY/(2s^2))
    product = np.exp(-((X - Y) ** 2) / (2.0 * two_var)) * special.i0e(X * Y / two_var)
    return _as_output(np.clip(q1 - 0.5 * product, 0.0, 1.0))


def _check_appendix_args(p: float, c: float, beta: float, alpha: float) -> None:
    if not p > 0:
        raise DomainError(f"p must be positive, got {p}")
    for name, value in (("c", c), ("beta", beta), ("alpha", alpha)):
        if not value >= 0:
            raise DomainError(f"{name} must be non-negative, got {value}")


def appendix_integral_closed(p: float, c: float, beta: float, alpha: float) -> float:
    """
    Closed form of the integral of x*exp(-p^2 x^2/2)*I0(cx)*Q1(beta, alpha x) over [0, inf).

    With s^2 = p^2 + alpha^2:

        I = (1/p^2) * [exp(c^2/(2p^2)) * Q1(beta*p/s, alpha*c/(p*s))
                       - (alpha^2/s^2) * exp((c^2 - p^2 beta^2)/(2 s^2)) * I0(alpha*beta*c/s^2)]

    Agrees with appendix_integral_quad to 1e-6*max(1, |I|); the value itself
    can reach exp(c^2/(2p^2)), so an absolute bound is not meaningful for large c/p.

    Raises:
        DomainError: If p <= 0 or any other argument is negative
    """
    _check_appendix_args(p, c, beta, alpha)
    p2 = p * p
    s2 = p2 + alpha * alpha
    s = math.sqrt(s2)
    leading = math.exp(c * c / (2.0 * p2)) * marcum_q(1, beta * p / s, alpha * c / (p * s))
    trailing = (alpha * alpha / s2) * exp_bessel_i0(
        (c * c - p2 * beta * beta) / (2.0 * s2), alpha * beta * c / s2
    )
    return (leading - trailing) / p2


def appendix_integral_quad(
    p: float, c: float, beta: float, alpha: float, cfg: SpecFunConfig | None = None
) -> float:
    """
    Adaptive quadrature of the same integral, used as the closed form's oracle.

    The integrand concentrates around (c + alpha*beta)/(p^2 + alpha^2) when the
    Marcum factor decays, and around c/p^2 otherwise; both locations are passed
    to the integrator as break points on the finite interval [0, c/p^2 + 40/p].
    """
    _check_appendix_args(p, c, beta, alpha)
    cfg = cfg or SpecFunConfig()
    p2 = p * p
    centre = c / p2
    upper = centre + 40.0 / p
    points = sorted(
        {x for x in ((c + alpha * beta) / (p2 + alpha * alpha), centre) if 0.0 < x < upper}
    )

    def integrand(x: float) -> float:
        if x == 0.0:
            return 0.0
        tail = marcum_q(1, beta, alpha * x)
        if tail == 0.0:
            return 0.0
        return x * math.exp(-0.5 * p2 * x * x + c * x) * special.i0e(c * x) * tail

    value, error = integrate.quad(
        integrand,
        0.0,
        upper,
        epsabs=cfg.quad_abs_tol,
        epsrel=cfg.quad_rel_tol,
        limit=cfg.quad_max_subdiv,
        points=points or None,
    )
    logger.debug(f"Appendix quadrature p={p} c={c} beta={beta} alpha={alpha}: {value} (+/- {error})")
    return value
