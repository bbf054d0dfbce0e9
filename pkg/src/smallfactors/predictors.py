"""Main-term predictors for N_k(x, y) and S_z(x, y).

Every predictor returns a :class:`Prediction` that carries the numeric value,
a validity flag for the range in which the asymptotic is stated, and the
derived shape parameters.  An invalid prediction still has its value.
Logarithms are natural throughout.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Union

from .primes import DomainError, primes_up_to
from .sieve import omega_k_stats, sum_sz
from .special import (
    buchstab_w,
    ell,
    m_z,
    m_z_grid,
    mertens_constant,
    reciprocal_gamma,
    selberg_g,
)

Number = Union[float, complex]

DEFAULT_C = 10.0  # alpha > C loglog x for the small-y count asymptotic
DEFAULT_K = 10.0  # alpha >= K loglog x for the small-y sum asymptotic
DEFAULT_KAPPA = 0.05
MAX_BETA = 10**6


class PredictorId(str, Enum):
    landau = "landau"
    selberg = "selberg"
    thm2 = "thm2"
    thm3 = "thm3"
    thm3star = "thm3star"
    cor2 = "cor2"
    thm10 = "thm10"
    thm11 = "thm11"
    thm12 = "thm12"
    sum_small_y = "sum_small_y"
    sum_large_y = "sum_large_y"
    selberg_sum = "selberg_sum"
    lemma4 = "lemma4"


@dataclass(frozen=True)
class Prediction:
    predictor: PredictorId
    value: Number
    valid: bool
    reason: str = ""
    x: float = 0.0
    y: float | None = None
    k: int | None = None
    alpha: float | None = None
    r: float | None = None
    beta: float | None = None
    terms: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value.real if isinstance(self.value, complex) else self.value)


def _loglog(v: float, name: str) -> float:
    if v <= math.e:
        raise DomainError(f"{name} must exceed e so that loglog {name} > 0")
    return math.log(math.log(v))


def _check_x(x) -> None:
    if x < 16:
        raise DomainError("x must be >= 16")


def _shape(x, y) -> tuple[float, float]:
    if not 2 <= y <= x:
        raise DomainError("need 2 <= y <= x")
    return math.log(x) / math.log(y), x / y


def _poisson(L: float, k: int) -> float:
    """L^k / k!, zero for negative k."""
    if k < 0:
        return 0.0
    return math.exp(k * math.log(L) - math.lgamma(k + 1)) if L > 0 else float(k == 0)


def _verdict(problems: list[str]) -> tuple[bool, str]:
    return (not problems, "; ".join(problems))


# --- classical counts --------------------------------------------------------


def predict_landau(x, k: int) -> Prediction:
    """x (loglog x)^(k-1) / ((k-1)! log x)."""
    _check_x(x)
    L = math.log(math.log(x))
    if k == 0:
        return Prediction(PredictorId.landau, 1.0, False, "k = 0: formula undefined, N_0(x, x) = 1 used",
                          x=x, y=x, k=0, alpha=1.0, beta=1.0)
    if k < 0:
        raise DomainError("k must be >= 0")
    value = x / math.log(x) * _poisson(L, k - 1)
    return Prediction(PredictorId.landau, value, True, x=x, y=x, k=k, alpha=1.0, beta=1.0)


def predict_selberg(x, k: int) -> Prediction:
    """(x/log x) g(1, rho)/Gamma(1 + rho) (loglog x)^(k-1)/(k-1)!, rho = (k-1)/loglog x."""
    _check_x(x)
    if k < 0:
        raise DomainError("k must be >= 0")
    L = math.log(math.log(x))
    rho = (k - 1) / L
    factor = (selberg_g(rho) * reciprocal_gamma(1 + rho)).real
    value = x / math.log(x) * factor * _poisson(L, k - 1)
    problems = []
    if not 1 <= k <= 10 * L:
        problems.append(f"k outside [1, 10 loglog x] = [1, {10 * L:.3g}]")
    ok, why = _verdict(problems)
    return Prediction(PredictorId.selberg, value, ok, why, x=x, y=x, k=k, alpha=1.0, r=rho, beta=1.0,
                      terms={"g_over_gamma": factor})


# --- y close to x ------------------------------------------------------------


def _prime_power_sum(beta: float, k: int, strict: bool) -> tuple[float, int]:
    """sum (1/P - 1/beta) over P <= beta (P < beta if strict), omega(P) = k."""
    limit = math.ceil(beta) - 1 if strict else math.floor(beta)
    count, recip = omega_k_stats(limit, k)
    return recip - count / beta, count


def predict_lemma4(x, y) -> Prediction:
    """N_1(x, y) ~ (x/log y) sum_{p^e < beta} (1/p^e - 1/beta) + x/(beta log y).

    The second term is the Landau term for primes near x.
    """
    alpha, beta = _shape(x, y)
    if beta <= 1 and y != x:
        raise DomainError("beta must be > 1")
    if beta > MAX_BETA:
        raise DomainError(f"beta must be <= {MAX_BETA}")
    s, count = _prime_power_sum(beta, 1, strict=True)
    ly = math.log(y)
    first = x / ly * s
    landau = x / (beta * ly)
    problems = [] if y * y > x else ["y <= sqrt(x)"]
    ok, why = _verdict(problems)
    return Prediction(PredictorId.lemma4, first + landau, ok, why, x=x, y=y, k=1, alpha=alpha, beta=beta,
                      terms={"prime_power_term": first, "landau_term": landau, "prime_powers": count})


def predict_thm2(x, y, k: int) -> Prediction:
    """(x/log y) sum_{P <= beta} (1/P - 1/beta) + x (loglog y)^(k-1)/((k-1)! log y).

    P runs over products of k prime powers with distinct primes.  For k = 1
    the second term would count all primes up to x, so the one-factor form
    with x/(beta log y) is used instead.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    if k == 1:
        p = predict_lemma4(x, y)
        return Prediction(PredictorId.thm2, p.value, p.valid, p.reason, x=x, y=y, k=1, alpha=p.alpha,
                          beta=p.beta, terms=dict(p.terms, form="one-factor"))
    alpha, beta = _shape(x, y)
    if beta <= 1:
        raise DomainError("beta must be > 1")
    if beta > MAX_BETA:
        raise DomainError(f"beta must be <= {MAX_BETA}")
    ly = math.log(y)
    s, count = _prime_power_sum(beta, k, strict=False)
    first = x / ly * s
    second = x / ly * _poisson(_loglog(y, "y"), k - 1)
    problems = [] if y * y > x else ["y <= sqrt(x)"]
    ok, why = _verdict(problems)
    return Prediction(PredictorId.thm2, first + second, ok, why, x=x, y=y, k=k, alpha=alpha, beta=beta,
                      terms={"prime_power_term": first, "landau_term": second, "products": count})


def predict_thm3(x, y, k: int) -> Prediction:
    """(x/log x)(loglog beta*)^k/k! + (x/log x)(loglog x)^(k-1)/(k-1)!, beta* = max(beta, 10).

    Since w(alpha) = 1/alpha for alpha < 2, the w(alpha) x/log y form of the
    first term is the same number.  For k = 0 the count is
    Phi(x, y) = 1 + pi(x) - pi(y), predicted as x/log x - y/log y.
    """
    _check_x(x)
    alpha, beta = _shape(x, y)
    lx = math.log(x)
    problems = [] if y * y > x else ["y <= sqrt(x)"]
    if k < 0:
        raise DomainError("k must be >= 0")
    if k == 0:
        value = x / lx - (y / math.log(y) if y > 2 else 0.0)
        problems.append("k = 0: Phi(x, y) = 1 + pi(x) - pi(y) main term used")
        return Prediction(PredictorId.thm3, value, False, "; ".join(problems), x=x, y=y, k=0, alpha=alpha,
                          beta=beta, terms={"phi_term": value})
    beta_star = max(beta, 10.0)
    first = x / lx * _poisson(math.log(math.log(beta_star)), k)
    second = x / lx * _poisson(math.log(lx), k - 1)
    ok, why = _verdict(problems)
    return Prediction(PredictorId.thm3, first + second, ok, why, x=x, y=y, k=k, alpha=alpha, beta=beta,
                      terms={"beta_term": first, "landau_term": second, "beta_star": beta_star})


def _w_main(x, y, k: int) -> tuple[float, float, float, float]:
    alpha, beta = _shape(x, y)
    w = buchstab_w(alpha)
    return w * x / math.log(y) * _poisson(_loglog(y, "y"), k), w, alpha, beta


def predict_thm3star(x, y, k: int) -> Prediction:
    """w(alpha) (x/log y) (loglog y)^k/k! for fixed k and alpha > 2."""
    if k < 0:
        raise DomainError("k must be >= 0")
    value, w, alpha, beta = _w_main(x, y, k)
    ok, why = _verdict([] if alpha > 2 else ["alpha <= 2"])
    return Prediction(PredictorId.thm3star, value, ok, why, x=x, y=y, k=k, alpha=alpha, beta=beta,
                      terms={"w": w})


def predict_cor2(x, y, k: int) -> Prediction:
    """Same main term as :func:`predict_thm3star`, valid for sqrt(x) < y below
    x exp(-e^(k^(1/k) (loglog x)^(1-1/k))) as well as for alpha > 2."""
    if k < 1:
        raise DomainError("k must be >= 1")
    _check_x(x)
    value, w, alpha, beta = _w_main(x, y, k)
    L = math.log(math.log(x))
    edge = math.log(x) - math.exp(k ** (1 / k) * L ** (1 - 1 / k))
    in_range = alpha > 2 or (y * y > x and math.log(y) < edge)
    ok, why = _verdict([] if in_range else ["y above the upper edge of the range"])
    return Prediction(PredictorId.cor2, value, ok, why, x=x, y=y, k=k, alpha=alpha, beta=beta,
                      terms={"w": w, "log_y_edge": edge})


# --- small and moderate y ----------------------------------------------------


def predict_thm10(x, y, k: int, C: float = DEFAULT_C) -> Prediction:
    """l(k/loglog y) (x/log y) (loglog y)^k / k!."""
    _check_x(x)
    alpha, beta = _shape(x, y)
    Ly = _loglog(y, "y")
    r = k / Ly
    lv = ell(r).real
    value = lv * x / math.log(y) * _poisson(Ly, k)
    problems = []
    if k < 1:
        problems.append("k < 1")
    need = C * math.log(math.log(x))
    if not alpha > need:
        problems.append(f"alpha = {alpha:.4g} not > C loglog x = {need:.4g}")
    ok, why = _verdict(problems)
    return Prediction(PredictorId.thm10, value, ok, why, x=x, y=y, k=k, alpha=alpha, r=r, beta=beta,
                      terms={"ell": lv})


SumEvaluator = Callable[[float], Number]


def _real_if_real(v: Number) -> Number:
    return v.real if isinstance(v, complex) and v.imag == 0 else v


def predict_thm11(x, y, k: int, s_r: SumEvaluator | Number | None = None,
                  kappa: float = DEFAULT_KAPPA) -> Prediction:
    """S_r (loglog y)^k / (k! e^k) with r = k/loglog y.

    The variant with loglog y + c1 in place of loglog y (and the matching r)
    is reported in ``terms``.  ``s_r`` is a callable r -> S_r(x, y) or a
    number for the first variant only; by default S_r is the exact sum.
    """
    _check_x(x)
    alpha, beta = _shape(x, y)
    if k < 0:
        raise DomainError("k must be >= 0")
    Ly = _loglog(y, "y")
    if s_r is None:
        s_r = lambda r: sum_sz(x, y, r)  # noqa: E731
    r = k / Ly
    evaluate = s_r if callable(s_r) else (lambda _r: s_r)
    S = evaluate(r)
    value = _real_if_real(S * _poisson(Ly, k) / math.exp(k))
    terms = {"S_r": S}
    if callable(s_r):
        Lc = Ly + mertens_constant()
        rc = k / Lc
        alt = _real_if_real(evaluate(rc) * _poisson(Lc, k) / math.exp(k))
        terms.update(mertens_variant=alt, r_mertens=rc)
    problems = []
    if k >= 1 and not kappa <= r <= 1 / kappa:
        problems.append(f"r = {r:.4g} outside [{kappa}, {1 / kappa:g}]")
    if not 1 <= alpha < math.log(math.log(x)) ** 2:
        problems.append("alpha outside [1, (loglog x)^2)")
    ok, why = _verdict(problems)
    return Prediction(PredictorId.thm11, value, ok, why, x=x, y=y, k=k, alpha=alpha, r=r, beta=beta,
                      terms=terms)


def predict_thm12(x, y, k: int, kappa: float = DEFAULT_KAPPA) -> Prediction:
    """m_r(alpha) x (loglog y)^k / (k! log y), r = k/loglog y.

    For k = 0 the limit m_0 = w is used.
    """
    _check_x(x)
    alpha, beta = _shape(x, y)
    if k < 0:
        raise DomainError("k must be >= 0")
    Ly = _loglog(y, "y")
    r = k / Ly
    problems = []
    if k == 0:
        m = buchstab_w(alpha)
        problems.append("k = 0: w(alpha) used for m_0")
    else:
        m = complex(m_z_grid(r, max(2.0, math.ceil(alpha)))(alpha)).real
        if not kappa <= r <= 1 / kappa:
            problems.append(f"r = {r:.4g} outside [{kappa}, {1 / kappa:g}]")
    if not 1 <= alpha <= math.log(math.log(x)) ** 2:
        problems.append("alpha outside [1, (loglog x)^2]")
    value = m * x / math.log(y) * _poisson(Ly, k)
    ok, why = _verdict(problems)
    return Prediction(PredictorId.thm12, value, ok, why, x=x, y=y, k=k, alpha=alpha, r=r, beta=beta,
                      terms={"m_r": m})


# --- sums --------------------------------------------------------------------


def predict_sum_small_y(x, y, z, K: float = DEFAULT_K) -> Prediction:
    """x prod_{p < y} (1 + (z - 1)/p)."""
    _check_x(x)
    alpha, beta = _shape(x, y)
    z = complex(z)
    ps = primes_up_to(math.ceil(y) - 1)
    factors = [1 + (z - 1) / int(p) for p in ps]
    if any(f == 0 for f in factors):
        value = 0j
    else:
        value = x * cmath.exp(math.fsum(cmath.log(f).real for f in factors)
                              + 1j * math.fsum(cmath.log(f).imag for f in factors))
    need = K * math.log(math.log(x))
    ok, why = _verdict([] if alpha >= need else [f"alpha = {alpha:.4g} < K loglog x = {need:.4g}"])
    return Prediction(PredictorId.sum_small_y, value, ok, why, x=x, y=y, alpha=alpha, beta=beta,
                      terms={"z": z})


def predict_sum_large_y(x, y, z) -> Prediction:
    """m_z(alpha) x / (log y)^(1 - z)."""
    _check_x(x)
    alpha, beta = _shape(x, y)
    z = complex(z)
    if z.real <= 0:
        raise DomainError("needs Re z > 0")
    m = complex(m_z(alpha, z))
    value = m * x * cmath.exp((z - 1) * math.log(math.log(y)))
    return Prediction(PredictorId.sum_large_y, value, True, x=x, y=y, alpha=alpha, beta=beta,
                      terms={"z": z, "m_z": m})


def predict_selberg_sum(x, z) -> Prediction:
    """g(1, z)/Gamma(z) x / (log x)^(1 - z)."""
    _check_x(x)
    z = complex(z)
    value = selberg_g(z) * reciprocal_gamma(z) * x * cmath.exp((z - 1) * math.log(math.log(x)))
    return Prediction(PredictorId.selberg_sum, value, True, x=x, y=x, alpha=1.0, beta=1.0,
                      terms={"z": z})


COUNT_PREDICTORS: dict[PredictorId, Callable[..., Prediction]] = {
    PredictorId.landau: lambda x, y, k: predict_landau(x, k),
    PredictorId.selberg: lambda x, y, k: predict_selberg(x, k),
    PredictorId.thm2: predict_thm2,
    PredictorId.thm3: predict_thm3,
    PredictorId.thm3star: predict_thm3star,
    PredictorId.cor2: predict_cor2,
    PredictorId.thm10: predict_thm10,
    PredictorId.thm11: predict_thm11,
    PredictorId.thm12: predict_thm12,
    PredictorId.lemma4: lambda x, y, k: predict_lemma4(x, y),
}

SUM_PREDICTORS: dict[PredictorId, Callable[..., Prediction]] = {
    PredictorId.sum_small_y: predict_sum_small_y,
    PredictorId.sum_large_y: predict_sum_large_y,
    PredictorId.selberg_sum: lambda x, y, z: predict_selberg_sum(x, z),
}


def predict_count(pid: PredictorId | str, x, y, k: int) -> Prediction:
    pid = PredictorId(pid)
    if pid not in COUNT_PREDICTORS:
        raise DomainError(f"{pid.value} predicts S_z, not N_k")
    return COUNT_PREDICTORS[pid](x, y, k)
