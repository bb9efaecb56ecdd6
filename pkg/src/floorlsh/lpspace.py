"""l_p geometry and the special functions behind the hashing guarantees.

All hash families in this package floor a scaled scalar product.  The scale
factors, the norm-comparison constants relating l_p norms to the Euclidean
norm, and the family thresholds on the approximation factor ``c`` live here,
together with the regularized incomplete beta function needed for exact
spherical cap probabilities.

Exponents are plain floats; ``math.inf`` is the max norm.  Exponent
arithmetic (``1/p``, ``1 - 1/p``) is exact for the anchor values 1, 2 and
infinity because ``1/inf == 0.0`` in IEEE arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT3 = math.sqrt(3.0)

_BETA_MAX_ITER = 500
_BETA_EPS = 1e-15
_BETA_TINY = 1e-300


def check_exponent(p: float) -> float:
    """Validate a norm exponent: a float in [1, inf]. Returns it unchanged."""
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(f"norm exponent must be in [1, inf], got {p}")
    return p


def lp_norm(x: np.ndarray, p: float) -> float:
    """l_p norm of a vector, with p = inf meaning the max norm.

    Returns 0 exactly when x is the zero vector.  Raises on empty input.
    """
    p = check_exponent(p)
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("norm of an empty vector is undefined")
    if math.isinf(p):
        return float(np.max(np.abs(x)))
    if p == 1.0:
        return float(np.sum(np.abs(x)))
    if p == 2.0:
        return float(np.linalg.norm(x))
    # factor out the max to keep |x_i|^p in range for large p
    magnitudes = np.abs(x)
    peak = float(np.max(magnitudes))
    if peak == 0.0:
        return 0.0
    return peak * float(np.sum((magnitudes / peak) ** p) ** (1.0 / p))


def dual_exponent(p: float) -> float:
    """The conjugate exponent q with 1/p + 1/q = 1 (1 <-> inf, 2 <-> 2)."""
    p = check_exponent(p)
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def norm_sandwich_factor(s: float, d: int) -> float:
    """The constant d^{min(1/2 - 1/s, 0)} comparing an l_s norm with l_2.

    For any z in R^d, ||z||_s * factor(s, d) <= ||z||_2 when s <= 2 and
    ||z||_2 <= ||z||_s / factor(q, d) with q the dual exponent; see
    :func:`norm_sandwich`.
    """
    s = check_exponent(s)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    exponent = min(0.5 - 1.0 / s, 0.0)
    return float(d) ** exponent


def norm_sandwich(z: np.ndarray, p: float) -> tuple[float, float, float]:
    """Return (lower, ||z||_2, upper) with lower <= ||z||_2 <= upper.

    The bracketing uses the l_p norm of z and the comparison constants of p
    and its dual exponent:  ||z||_p * d^{min(1/2-1/p,0)}  and
    ||z||_p / d^{min(1/2-1/q,0)}.
    """
    z = np.asarray(z, dtype=np.float64)
    d = z.size
    p = check_exponent(p)
    q = dual_exponent(p)
    norm_p = lp_norm(z, p)
    norm_2 = lp_norm(z, 2.0)
    lower = norm_p * norm_sandwich_factor(p, d)
    upper = norm_p / norm_sandwich_factor(q, d)
    return lower, norm_2, upper


def norm_sandwich_holds(z: np.ndarray, p: float, rel_tol: float = 1e-9) -> bool:
    """Check the norm sandwich on a concrete nonzero vector.

    Raises on the zero vector, where the ratio of norms is undefined.
    """
    lower, mid, upper = norm_sandwich(z, p)
    if mid == 0.0:
        raise ValueError("norm sandwich is undefined for the zero vector")
    slack = rel_tol * mid
    return (lower <= mid + slack) and (mid <= upper + slack)


def cube_scale(p: float, d: int) -> float:
    """Pre-floor scale d^{1/p - 1} used with cube and sign hash vectors."""
    p = check_exponent(p)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return float(d) ** (1.0 / p - 1.0)


def sphere_scale(p: float, d: int) -> float:
    """Pre-floor scale for unit-sphere hash vectors: the dual comparison
    constant d^{min(1/2 - 1/q, 0)}."""
    return norm_sandwich_factor(dual_exponent(p), d)


def cube_c_threshold(p: float, d: int) -> float:
    """Minimum approximation factor for the uniform-cube family.

    Equals 4*sqrt(3) * d^{max(1 - 1/p, 1/2)}.  For c above this threshold
    the false-positive probability of far pairs is below threshold / c.
    """
    p = check_exponent(p)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return 4.0 * SQRT3 * float(d) ** max(1.0 - 1.0 / p, 0.5)


def sphere_c_threshold(p: float, d: int) -> float:
    """Minimum approximation factor for the unit-sphere family.

    Equals 2 * d^{1/2 + |1/2 - 1/p|}; below the cube threshold for p >= 2.
    """
    p = check_exponent(p)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return 2.0 * float(d) ** (0.5 + abs(0.5 - 1.0 / p))


def sign_c_threshold(p: float, d: int) -> float:
    """Minimum approximation factor for the legacy sign-vector family.

    Equals sqrt(8) * max(d^{1/2}, d^{1 - 1/p}).  The sign family's
    false-positive bound has the weaker form 1 - (1 - threshold/c)^2 / 2.
    """
    p = check_exponent(p)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return math.sqrt(8.0) * max(float(d) ** 0.5, float(d) ** (1.0 - 1.0 / p))


@dataclass(frozen=True)
class BoundConstants:
    """All scale and threshold constants for one (p, d) pair.

    Attributes:
        p: norm exponent in [1, inf].
        q: dual exponent of p.
        d: dimension.
        delta_p: d^{min(1/2 - 1/p, 0)}, lower norm-sandwich constant.
        delta_q: same constant for the dual exponent (upper sandwich side,
            and the unit-sphere hash scale).
        scale_cube: d^{1/p - 1}, hash scale for cube and sign vectors.
        scale_sphere: hash scale for unit-sphere vectors (= delta_q).
        tau_cube: minimum c for the uniform-cube false-positive bound.
        tau_sphere: minimum c for the unit-sphere false-positive bound.
        tau_sign: minimum c for the legacy sign-vector bound.
    """

    p: float
    q: float
    d: int
    delta_p: float
    delta_q: float
    scale_cube: float
    scale_sphere: float
    tau_cube: float
    tau_sphere: float
    tau_sign: float


def bound_constants(p: float, d: int) -> BoundConstants:
    """Assemble the :class:`BoundConstants` for (p, d)."""
    p = check_exponent(p)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    q = dual_exponent(p)
    return BoundConstants(
        p=p,
        q=q,
        d=d,
        delta_p=norm_sandwich_factor(p, d),
        delta_q=norm_sandwich_factor(q, d),
        scale_cube=cube_scale(p, d),
        scale_sphere=sphere_scale(p, d),
        tau_cube=cube_c_threshold(p, d),
        tau_sphere=sphere_c_threshold(p, d),
        tau_sign=sign_c_threshold(p, d),
    )


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, by the modified Lentz
    method.  Converges fast for x < (a + 1) / (a + b + 2)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETA_TINY:
        d = _BETA_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_TINY:
            d = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_TINY:
            d = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return h
    raise ArithmeticError(
        f"incomplete beta continued fraction failed to converge for "
        f"a={a}, b={b}, x={x}"
    )


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function I_x(a, b).

    Evaluated through the continued fraction, switching to the symmetric
    tail I_x(a, b) = 1 - I_{1-x}(b, a) when x exceeds the crossover point
    (a + 1) / (a + b + 2), so either branch converges quickly.  Absolute
    accuracy is around 1e-14 over the validated domain.

    Args:
        x: point in [0, 1].
        a: first shape parameter, > 0.
        b: second shape parameter, > 0.

    Returns:
        I_x(a, b) in [0, 1].
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    if a <= 0.0 or b <= 0.0:
        raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        value = front * _beta_continued_fraction(a, b, x) / a
    else:
        value = 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b
    return min(max(value, 0.0), 1.0)


def beta_function_half(d: int) -> float:
    """B(1/2, (d - 1)/2), computed through log-gamma for stability."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    a = 0.5
    b = (d - 1.0) / 2.0
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def cap_probability(alpha: float, d: int) -> float:
    """P(|<w, e>| < alpha) for w uniform on the unit sphere in R^d.

    The first coordinate of a uniform direction has |w_1|^2 ~ Beta(1/2,
    (d-1)/2), so the probability equals I_{alpha^2}(1/2, (d-1)/2).  Closed
    forms at the low dimensions: (2/pi) * arcsin(alpha) for d = 2 and
    exactly alpha for d = 3.  The value is bounded by alpha * sqrt(d).

    Args:
        alpha: magnitude threshold in [0, 1].
        d: dimension, >= 2.

    Returns:
        The two-sided cap probability in [0, 1].
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    return regularized_incomplete_beta(alpha * alpha, 0.5, (d - 1.0) / 2.0)


def beta_lower_bound_margin(d: int) -> float:
    """Margin of the product-form lower bound on B(1/2, (d - 1)/2).

    Returns B(1/2, (d-1)/2) * sqrt(d) / 2 - ((d-1)/d)^{(d-3)/2}.  A
    nonnegative margin certifies B(1/2, (d-1)/2) >= 2 * g(d) / sqrt(d) with
    g(d) = ((d-1)/d)^{(d-3)/2}; g is decreasing for d >= 3, equals 1 at
    d = 3 and tends to exp(-1/2), which is what makes the linear cap bound
    alpha * sqrt(d) valid in every dimension.
    """
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    g = math.exp((d - 3.0) / 2.0 * math.log((d - 1.0) / d))
    return beta_function_half(d) * math.sqrt(d) / 2.0 - g
