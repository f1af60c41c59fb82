"""Special functions behind the t and F tail probabilities."""
import math

from scipy import optimize, stats

EPSILON = 1e-15
TINY = 1e-300
MAX_ITERATIONS = 1000


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b).

    Continued fraction evaluated with the modified Lentz method; for x above (a + 1) / (a + b + 2) the
    symmetry I_x(a, b) = 1 - I_{1-x}(b, a) keeps the fraction in its fast-converging region.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if a <= 0 or b <= 0:
        raise ValueError(f"a and b must be positive, got {a=} {b=}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0

    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    if x < (a + 1) / (a + b + 2):
        return math.exp(log_front) * _beta_continued_fraction(x, a, b) / a
    return 1.0 - math.exp(log_front) * _beta_continued_fraction(1.0 - x, b, a) / b


def student_t_sf2(t: float, df: int) -> float:
    """Two-sided tail probability 2 * P(T >= |t|) for Student's t with `df` degrees of freedom."""
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if t == 0:
        return 1.0
    if math.isinf(t):
        return 0.0
    return reg_inc_beta(df / (df + t * t), df / 2, 0.5)


def f_sf(f: float, df1: int, df2: int) -> float:
    """Upper-tail probability P(F >= f) for the F distribution."""
    if f < 0:
        raise ValueError(f"f must be >= 0, got {f}")
    if df1 < 1 or df2 < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df1=} {df2=}")
    if f == 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return reg_inc_beta(df2 / (df2 + df1 * f), df2 / 2, df1 / 2)


def student_t_ppf(q: float, df: int) -> float:
    """Critical value t such that P(T <= t) = q, found by bracketing student_t_sf2."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    if q == 0.5:
        return 0.0

    tail = 2 * min(q, 1 - q)
    upper = 1.0
    while student_t_sf2(upper, df) > tail:
        upper *= 2
    root = optimize.brentq(lambda t: student_t_sf2(t, df) - tail, 0.0, upper, xtol=1e-14, rtol=1e-14)
    return root if q > 0.5 else -root


def normal_ppf(q: float) -> float:
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    return float(stats.norm.ppf(q))


def _beta_continued_fraction(x: float, a: float, b: float) -> float:
    qab = a + b
    qap = a + 1
    qam = a - 1
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < TINY:
        d = TINY
    d = 1.0 / d
    h = d
    for m in range(1, MAX_ITERATIONS + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPSILON:
            return h
    raise ArithmeticError(f"Incomplete beta continued fraction did not converge for {x=} {a=} {b=}")
