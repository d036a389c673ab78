"""Exact half-integer angular momentum bookkeeping and SU(2) matrix elements.

Labels (j, m, J, M) are carried as :class:`HalfInt` values storing twice the
physical value, so sector arithmetic is exact.  All Wigner small-d and
Clebsch-Gordan values are real, in the Condon-Shortley convention with
rotations generated by exp(-i*beta*Jy); only squared d-values and CG products
enter the estimation observables, so the generator sign is unobservable.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache


class DomainError(ValueError):
    """Invalid angular momentum labels (e.g. |m| > j or mismatched parity)."""


class HalfInt:
    """Half-integer stored as a doubled integer: HalfInt(1) is 1/2, HalfInt(2) is 1."""

    __slots__ = ("twice",)

    def __init__(self, twice):
        if isinstance(twice, HalfInt):
            twice = twice.twice
        if not isinstance(twice, int):
            raise TypeError(f"twice must be an int, got {type(twice).__name__}")
        object.__setattr__(self, "twice", twice)

    @classmethod
    def from_value(cls, value) -> "HalfInt":
        """Build from an int, Fraction, float or string that is (half-)integral."""
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        doubled = Fraction(value) * 2
        if doubled.denominator != 1:
            raise ValueError(f"{value!r} is not a half-integer")
        return cls(int(doubled))

    @classmethod
    def parse(cls, text: str) -> "HalfInt":
        """Parse '1/2', '-3/2' or '2' style labels."""
        frac = Fraction(text.strip())
        if (2 * frac).denominator != 1:
            raise ValueError(f"{text!r} is not a half-integer")
        return cls(int(2 * frac))

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __add__(self, other):
        return HalfInt(self.twice + HalfInt(other).twice)

    def __sub__(self, other):
        return HalfInt(self.twice - HalfInt(other).twice)

    def __neg__(self):
        return HalfInt(-self.twice)

    def __abs__(self):
        return HalfInt(abs(self.twice))

    def __eq__(self, other):
        if isinstance(other, HalfInt):
            return self.twice == other.twice
        if isinstance(other, int):
            return self.twice == 2 * other
        return NotImplemented

    def __lt__(self, other):
        return self.twice < HalfInt(other).twice

    def __le__(self, other):
        return self.twice <= HalfInt(other).twice

    def __gt__(self, other):
        return self.twice > HalfInt(other).twice

    def __ge__(self, other):
        return self.twice >= HalfInt(other).twice

    def __hash__(self):
        return hash(("HalfInt", self.twice))

    def __float__(self):
        return self.twice / 2.0

    def __str__(self):
        if self.twice % 2 == 0:
            return str(self.twice // 2)
        return f"{self.twice}/2"

    def __repr__(self):
        return f"HalfInt({self})"


def half(value) -> HalfInt:
    """Shorthand constructor: half(1) -> 1, half('3/2') -> 3/2."""
    return HalfInt.from_value(value)


def check_jm(j: HalfInt, m: HalfInt) -> None:
    """Raise DomainError unless (j, m) is a valid weight pair."""
    if j.twice < 0:
        raise DomainError(f"j = {j} must be nonnegative")
    if abs(m.twice) > j.twice:
        raise DomainError(f"|m| = |{m}| exceeds j = {j}")
    if (j.twice - m.twice) % 2 != 0:
        raise DomainError(f"j = {j} and m = {m} differ by a non-integer")


def m_range(j: HalfInt) -> list[HalfInt]:
    """All weights -j, -j+1, ..., j."""
    return [HalfInt(t) for t in range(-j.twice, j.twice + 1, 2)]


def couple_range(j1: HalfInt, j2: HalfInt) -> list[HalfInt]:
    """Total angular momenta |j1-j2|, ..., j1+j2 in increasing order."""
    j1, j2 = HalfInt(j1), HalfInt(j2)
    if j1.twice < 0 or j2.twice < 0:
        raise DomainError("coupling labels must be nonnegative")
    lo = abs(j1.twice - j2.twice)
    hi = j1.twice + j2.twice
    return [HalfInt(t) for t in range(lo, hi + 1, 2)]


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    if n < 0:
        raise ValueError("negative factorial")
    return math.factorial(n)


def _lfact(n: int) -> float:
    return math.lgamma(n + 1)


# Largest doubled-j handled through exact integer square roots inside
# wigner_d; beyond this the log-gamma path avoids float overflow.
_EXACT_TWICE_J_MAX = 30


def wigner_d(j: HalfInt, m_row: HalfInt, m_col: HalfInt, beta: float) -> float:
    """Real Wigner small-d element d^j_{m_row, m_col}(beta).

    Convention: d^j_{m'm}(beta) = <j m'| exp(-i*beta*Jy) |j m>, so that
    rotating the highest-weight state gives U(beta)|j j> = sum_m d^j_{m j}|j m>.
    """
    j, mr, mc = HalfInt(j), HalfInt(m_row), HalfInt(m_col)
    check_jm(j, mr)
    check_jm(j, mc)
    c = math.cos(beta / 2.0)
    s = math.sin(beta / 2.0)
    # all factorial arguments below are genuine integers (doubled values share parity)
    jpr = (j.twice + mr.twice) // 2
    jmr = (j.twice - mr.twice) // 2
    jpc = (j.twice + mc.twice) // 2
    jmc = (j.twice - mc.twice) // 2
    rmc = (mr.twice - mc.twice) // 2  # m' - m
    k_min = max(0, -rmc)
    k_max = min(jpc, jmr)
    terms = []
    if j.twice <= _EXACT_TWICE_J_MAX:
        pref = math.sqrt(_fact(jpr) * _fact(jmr) * _fact(jpc) * _fact(jmc))
        for k in range(k_min, k_max + 1):
            sign = -1.0 if (rmc + k) % 2 else 1.0
            denom = _fact(jpc - k) * _fact(k) * _fact(jmr - k) * _fact(rmc + k)
            terms.append(sign * pref / denom * c ** (jpc + jmr - 2 * k) * s ** (rmc + 2 * k))
    else:
        lpref = 0.5 * (_lfact(jpr) + _lfact(jmr) + _lfact(jpc) + _lfact(jmc))
        lc = math.log(abs(c)) if c != 0.0 else -math.inf
        ls = math.log(abs(s)) if s != 0.0 else -math.inf
        for k in range(k_min, k_max + 1):
            pc = jpc + jmr - 2 * k
            ps = rmc + 2 * k
            if (pc > 0 and c == 0.0) or (ps > 0 and s == 0.0):
                continue
            sign = -1.0 if (rmc + k) % 2 else 1.0
            if c < 0.0 and pc % 2:
                sign = -sign
            ldenom = _lfact(jpc - k) + _lfact(k) + _lfact(jmr - k) + _lfact(rmc + k)
            terms.append(sign * math.exp(lpref - ldenom + pc * lc + ps * ls))
    # summing smallest magnitude first limits cancellation at large j
    terms.sort(key=abs)
    return math.fsum(terms)


def wigner_d_highest(j: HalfInt, m: HalfInt, beta: float) -> float:
    """d^j_{m,j}(beta): amplitude of |j m> in the rotated highest-weight state.

    Closed form sqrt(binom(2j, j+m)) cos^{j+m}(beta/2) sin^{j-m}(beta/2);
    free of the alternating sum, so it stays accurate up to j ~ 100.
    """
    j, m = HalfInt(j), HalfInt(m)
    check_jm(j, m)
    a = (j.twice + m.twice) // 2
    b = (j.twice - m.twice) // 2
    c = math.cos(beta / 2.0)
    s = math.sin(beta / 2.0)
    if (a > 0 and c == 0.0) or (b > 0 and s == 0.0):
        return 0.0
    # assemble in log space to dodge overflow of binom(200, 100)
    lbinom = _lfact(a + b) - _lfact(a) - _lfact(b)
    log_mag = 0.5 * lbinom
    if a > 0:
        log_mag += a * math.log(abs(c))
    if b > 0:
        log_mag += b * math.log(abs(s))
    val = math.exp(log_mag)
    if c < 0.0 and a % 2:
        val = -val
    return val


@lru_cache(maxsize=None)
def clebsch_gordan(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt,
                   J: HalfInt, M: HalfInt) -> float:
    """Clebsch-Gordan coefficient C^{J M}_{j1 m1, j2 m2} (Racah sum, exact rationals).

    Returns 0 when M != m1 + m2.  Python's unbounded integers keep the Racah
    sum exact for any j, so no log-gamma fallback is needed here.
    """
    j1, m1, j2, m2 = HalfInt(j1), HalfInt(m1), HalfInt(j2), HalfInt(m2)
    J, M = HalfInt(J), HalfInt(M)
    check_jm(j1, m1)
    check_jm(j2, m2)
    check_jm(J, M)
    if J.twice not in [x.twice for x in couple_range(j1, j2)]:
        raise DomainError(f"J = {J} not in coupling range of ({j1}, {j2})")
    if M.twice != m1.twice + m2.twice:
        return 0.0

    def iv(x: HalfInt | int) -> int:
        t = x.twice if isinstance(x, HalfInt) else 2 * x
        if t % 2 != 0:
            raise DomainError("non-integer factorial argument")
        return t // 2

    # triangle coefficient and weight factorials, all exact integers
    pref2 = Fraction(J.twice + 1, 1)
    pref2 *= Fraction(
        _fact(iv(j1 + j2 - J)) * _fact(iv(j1 - j2 + J)) * _fact(iv(j2 - j1 + J)),
        _fact(iv(j1 + j2 + J) + 1),
    )
    pref2 *= (
        _fact(iv(J + M)) * _fact(iv(J - M))
        * _fact(iv(j1 - m1)) * _fact(iv(j1 + m1))
        * _fact(iv(j2 - m2)) * _fact(iv(j2 + m2))
    )

    k_min = max(0, iv(j2 - J - m1), iv(j1 + m2 - J))
    k_max = min(iv(j1 + j2 - J), iv(j1 - m1), iv(j2 + m2))
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denom = (
            _fact(k)
            * _fact(iv(j1 + j2 - J) - k)
            * _fact(iv(j1 - m1) - k)
            * _fact(iv(j2 + m2) - k)
            * _fact(iv(J - j2 + m1) + k)
            * _fact(iv(J - j1 - m2) + k)
        )
        term = Fraction((-1) ** k, denom)
        total += term
    if total == 0:
        return 0.0
    value2 = pref2 * total * total  # = C^2, a rational <= 1
    return math.copysign(math.sqrt(float(value2)), float(total))
