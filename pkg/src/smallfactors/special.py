"""Special functions: Buchstab w, generalized Dickman rho_r, m_z, Euler products, Gamma.

All three delay-equation families are solved by the piecewise-series engine
in :mod:`smallfactors.delay`; grids are sampled from that solution.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import integrate, special as sp

from .delay import DelaySolution, binomial_series
from .primes import DomainError, primes_up_to

EULER_GAMMA = 0.57721566490153286061
GRID_STEP = 2.0**-10
EULER_PRODUCT_BOUND = 10**6
MERTENS_BOUND = 10**7
MAX_ALPHA = 100.0


class GammaPole(DomainError):
    """Gamma evaluated at a non-positive integer."""


# --- Gamma -------------------------------------------------------------------

_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _is_pole(z: complex) -> bool:
    return z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real)


def complex_gamma(z) -> complex:
    """Gamma(z) for complex z (Lanczos, g = 7, with reflection for Re z < 1/2)."""
    z = complex(z)
    if _is_pole(z):
        raise GammaPole(f"Gamma has a pole at {z.real:g}")
    if z.real < 0.5:
        return cmath.pi / (cmath.sin(cmath.pi * z) * complex_gamma(1 - z))
    z -= 1
    acc = _LANCZOS[0]
    for i, c in enumerate(_LANCZOS[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return cmath.sqrt(2 * cmath.pi) * t ** (z + 0.5) * cmath.exp(-t) * acc


def reciprocal_gamma(z) -> complex:
    """1/Gamma(z), which is entire: 0 at the poles of Gamma."""
    z = complex(z)
    if _is_pole(z):
        return 0j
    return 1 / complex_gamma(z)


# --- Euler products ----------------------------------------------------------


def _prime_tail_sq(P: float) -> float:
    """sum_{p >= P} 1/p^2, from the prime number theorem density 1/log t."""
    return float(sp.exp1(math.log(P)))


def _euler_log_sum(z: complex, P: int, term) -> tuple[complex, float] | None:
    ps = primes_up_to(P - 1).astype(float)
    if z.imag == 0 and z.real <= 0 and (1 - z.real) in set(ps.tolist()):
        return None  # a factor 1 + (z-1)/p vanishes
    logs = term(z, ps)
    total = complex(math.fsum(logs.real), math.fsum(logs.imag))
    # every log-factor is z(1-z)/(2p^2) + O(p^-3)
    tail_sq = _prime_tail_sq(P)
    total += z * (1 - z) / 2 * tail_sq
    err = abs(z * (1 - z)) / 2 * tail_sq * 0.01 + (abs(z) + 1) ** 3 / (P * P * math.log(P))
    return total, err


def _selberg_factors(z, ps):
    return np.log1p(z / (ps - 1)) + z * np.log1p(-1 / ps)


def _ell_factors(z, ps):
    return np.log1p((z - 1) / ps) + (z - 1) * np.log1p(-1 / ps)


def euler_product(z, kind: str = "selberg", P: int = EULER_PRODUCT_BOUND) -> tuple[complex, float]:
    """(value, error estimate) of the truncated Euler product with tail correction.

    ``kind="selberg"``: prod (1 + z/(p-1)) (1 - 1/p)^z.
    ``kind="ell"``:     prod (1 + (z-1)/p) (1 - 1/p)^(z-1).
    """
    z = complex(z)
    if z == 1:
        return 1 + 0j, 0.0  # every factor is exactly 1
    term = _selberg_factors if kind == "selberg" else _ell_factors
    res = _euler_log_sum(z, P, term)
    if res is None:
        return 0j, 0.0
    total, err = res
    value = cmath.exp(total)
    return value, abs(value) * err


@lru_cache(maxsize=4096)
def selberg_g(z, P: int = EULER_PRODUCT_BOUND) -> complex:
    """g(1, z) = prod_p (1 + z/(p-1)) (1 - 1/p)^z."""
    return euler_product(z, "selberg", P)[0]


@lru_cache(maxsize=4096)
def ell(z, P: int = EULER_PRODUCT_BOUND) -> complex:
    """l(z) = e^((z-1) gamma) * prod_p (1 + (z-1)/p) (1 - 1/p)^(z-1), the limit of m_z.

    Factor by factor the product equals the one in g(1, z).
    """
    z = complex(z)
    value, _ = euler_product(z, "ell", P)
    return value * cmath.exp((z - 1) * EULER_GAMMA)


def ell_error(z, P: int = EULER_PRODUCT_BOUND) -> float:
    """Estimated absolute truncation error of :func:`ell` after tail correction."""
    z = complex(z)
    value, err = euler_product(z, "ell", P)
    return err * abs(cmath.exp((z - 1) * EULER_GAMMA))


def mertens_constant(P: int = MERTENS_BOUND, with_error: bool = False):
    """c1 = gamma + sum_p (log(1 - 1/p) + 1/p), about 0.2614972128.

    Truncated at P with the -(1/2) sum_{p >= P} 1/p^2 tail added back.
    """
    ps = primes_up_to(P - 1).astype(float)
    u = 1 / ps
    value = EULER_GAMMA + math.fsum(np.log1p(-u) + u) - _prime_tail_sq(P) / 2
    if with_error:
        return value, 1 / (2 * P * math.log(P))
    return value


def _seed_scale(z: complex) -> complex:
    """g(1, z) / Gamma(z), the value m_z(1)."""
    return selberg_g(z) * reciprocal_gamma(z)


# --- delay-equation solutions ------------------------------------------------


def _check_alpha(alpha, lo: float = 0.0, strict: bool = True) -> None:
    bad = np.any(np.asarray(alpha) <= lo) if strict else np.any(np.asarray(alpha) < lo)
    if bad:
        raise DomainError(f"alpha must be {'>' if strict else '>='} {lo}")
    if np.any(np.asarray(alpha) > MAX_ALPHA):
        raise DomainError(f"alpha must be <= {MAX_ALPHA}")


def _span(alpha) -> float:
    """Solve range to cover alpha, rounded up so caches are shared."""
    top = float(np.max(alpha))
    return max(16.0, 8.0 * math.ceil(top / 8.0))


@lru_cache(maxsize=8)
def _buchstab_solution(span: float) -> DelaySolution:
    return DelaySolution(0, 1, 1, "buchstab", span)


@lru_cache(maxsize=256)
def _rho_solution(r: float, span: float) -> DelaySolution:
    return DelaySolution(r, -r, reciprocal_gamma(r), "power", span)


@lru_cache(maxsize=256)
def _m_solution(z: complex, span: float) -> DelaySolution:
    return DelaySolution(z, 1 - z, _seed_scale(z), "power", span)


def buchstab_w(alpha):
    """Buchstab's function: w = 1/alpha on [1, 2], (alpha w)' = w(alpha - 1)."""
    _check_alpha(alpha, 1.0, strict=False)
    out = _buchstab_solution(_span(alpha))(alpha)
    return np.real(out) if np.ndim(out) else float(out.real)


def buchstab_w_derivative(alpha):
    a = np.asarray(alpha, dtype=float)
    _check_alpha(a, 2.0, strict=False)
    out = _buchstab_solution(_span(a)).derivative(a)
    return np.real(out) if np.ndim(out) else float(out.real)


def rho_r(u, r: float):
    """Generalized Dickman function: u^(r-1)/Gamma(r) on (0, 1], then
    u rho' + (1 - r) rho + r rho(u - 1) = 0."""
    if not r > 0:
        raise DomainError("r must be > 0")
    _check_alpha(u, 0.0)
    out = _rho_solution(float(r), _span(u))(u)
    return np.real(out) if np.ndim(out) else float(out.real)


def rho_r_integral(r: float, cutoff: float = 40.0) -> float:
    """int_0^cutoff rho_r(u) du; tends to e^(gamma r) as cutoff grows."""
    if not r > 0:
        raise DomainError("r must be > 0")
    if cutoff <= 0:
        raise DomainError("cutoff must be > 0")
    if cutoff > MAX_ALPHA:
        raise DomainError(f"cutoff must be <= {MAX_ALPHA}")
    return _rho_solution(float(r), _span(cutoff)).integral(cutoff).real


def m_z(alpha, z):
    """m_z(alpha) from the series solution (exact up to rounding)."""
    _check_alpha(alpha, 0.0)
    if z == 1:  # identically 1
        return np.ones(np.shape(alpha), dtype=complex) if np.ndim(alpha) else 1 + 0j
    return _m_solution(complex(z), _span(alpha))(alpha)


def m_z_derivative(alpha, z):
    _check_alpha(alpha, 1.0)
    return _m_solution(complex(z), _span(alpha)).derivative(alpha)


def m_z_closed(alpha: float, z) -> complex:
    """m_z on (0, 2] by quadrature of the first-step integral.

    On [1, 2] m = s alpha^(z-1) (1 + (1-z) int_0^(alpha-1) (1+t)^(-z) t^(z-1) dt)
    with s = g(1,z)/Gamma(z).  The integrable singularity at t = 0 is taken
    by its binomial series on [0, eps]; the rest is adaptive quadrature.
    """
    z = complex(z)
    if not 0 < alpha <= 2:
        raise DomainError("closed form needs 0 < alpha <= 2")
    s = _seed_scale(z)
    base = s * cmath.exp((z - 1) * math.log(alpha))
    if alpha <= 1 or z == 1:
        return base
    if z.real <= 0:
        raise DomainError("closed form needs Re z > 0 on (1, 2]")
    top = alpha - 1
    eps = min(0.1, top)
    coef = binomial_series(-z, 1.0, 80)
    j = np.arange(80)
    head = complex(np.sum(coef * np.exp((j + z) * math.log(eps)) / (j + z)))
    tail = 0j
    if top > eps:
        def f(t):
            return (1 + t) ** (-z) * cmath.exp((z - 1) * math.log(t))

        re = integrate.quad(lambda t: f(t).real, eps, top, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
        im = integrate.quad(lambda t: f(t).imag, eps, top, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
        tail = complex(re, im)
    return base * (1 + (1 - z) * (head + tail))


def m_z_seed_series(alpha: float, z, terms: int = 200) -> complex:
    """m_z on [1, 2] from the substitution w = 1/t, x = 1 - 1/alpha:

        m = s alpha^(z-1) (1 + (1-z) x^z sum_j x^j / (z + j)).
    """
    z = complex(z)
    if not 1 <= alpha <= 2:
        raise DomainError("series form needs 1 <= alpha <= 2")
    s = _seed_scale(z)
    x = 1 - 1 / alpha
    base = s * cmath.exp((z - 1) * math.log(alpha))
    if x == 0:
        return base
    j = np.arange(terms)
    tail = np.sum(x**j / (z + j))
    return base * (1 + (1 - z) * cmath.exp(z * math.log(x)) * tail)


@dataclass(frozen=True)
class GridFunction:
    """Samples f(start + i*step) with cubic (4-point Lagrange) interpolation."""

    start: float
    step: float
    values: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return self.start + self.step * np.arange(len(self.values))

    @property
    def end(self) -> float:
        return self.start + self.step * (len(self.values) - 1)

    def __call__(self, alpha):
        a = np.asarray(alpha, dtype=float)
        if np.any(a < self.start - 1e-12) or np.any(a > self.end + 1e-12):
            raise DomainError(f"alpha outside grid [{self.start}, {self.end}]")
        pos = (a - self.start) / self.step
        i = np.clip(np.floor(pos).astype(int) - 1, 0, len(self.values) - 4)
        u = pos - i
        v = self.values
        y0, y1, y2, y3 = v[i], v[i + 1], v[i + 2], v[i + 3]
        out = (
            -y0 * (u - 1) * (u - 2) * (u - 3) / 6
            + y1 * u * (u - 2) * (u - 3) / 2
            - y2 * u * (u - 1) * (u - 3) / 2
            + y3 * u * (u - 1) * (u - 2) / 6
        )
        return out if np.ndim(out) else out[()]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["alpha", "re", "im"])
            for a, v in zip(self.nodes, self.values):
                v = complex(v)
                w.writerow([format(a, ".17g"), format(v.real, ".17g"), format(v.imag, ".17g")])


@lru_cache(maxsize=64)
def _m_grid_cached(z: complex, alpha_max: float, step: float) -> GridFunction:
    n = int(round((alpha_max - 1) / step))
    nodes = 1.0 + step * np.arange(n + 1)
    if z == 1:
        values = np.ones(n + 1, dtype=complex)
    else:
        values = _m_solution(z, _span(alpha_max))(nodes)
    values.setflags(write=False)
    return GridFunction(1.0, step, values)


def m_z_grid(z, alpha_max: float = 40.0, step: float = GRID_STEP) -> GridFunction:
    """m_z on [1, alpha_max] sampled at spacing ``step``."""
    z = complex(z)
    if not 1 < alpha_max <= MAX_ALPHA:
        raise DomainError(f"alpha_max must be in (1, {MAX_ALPHA}]")
    if z.real <= 0:
        raise DomainError("m_z needs Re z > 0")
    return _m_grid_cached(z, float(alpha_max), float(step))


def _step_residual(sol: DelaySolution, nodes: np.ndarray, values: np.ndarray) -> float:
    """Largest residual of (a^(1-c) f)' = kappa a^(-c) f(a - 1) over grid steps.

    For each step [a, a + h] the finite difference of F = a^(1-c) f is
    compared with the step average of the right-hand side.  The averaged
    form is used because central differences of F are themselves inaccurate
    next to the integers, where F'' is unbounded.
    """
    c, kappa = sol.c, sol.kappa
    F = np.exp((1 - c) * np.log(nodes)) * values

    def G(u):
        return kappa * np.exp(-c * np.log(u)) * sol(np.asarray(u) - 1.0)

    step = nodes[1] - nodes[0]
    gx, gw = np.polynomial.legendre.leggauss(12)
    lo, hi = nodes[:-1], nodes[1:]
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    avg = sum(w * G(mid + half * x) for x, w in zip(gx, gw)) / 2
    # steps that start just past an integer: adaptive quadrature
    near = np.flatnonzero((lo - np.floor(lo + 1e-9)) < 2.5 * step)
    seed_prim = None
    if sol.seed == "power":
        # in the first cell the delayed term is the closed-form seed
        j = np.arange(80)
        coef = sol.kappa * sol.sigma * binomial_series(-c, 1.0, 80) / (j + c)

        def seed_prim(t):
            return np.exp((j + c) * np.log(t)) @ coef if t > 0 else 0j
    for i in near:
        if seed_prim is not None and hi[i] <= 2.0:
            avg[i] = (seed_prim(hi[i] - 1) - seed_prim(lo[i] - 1)) / step
            continue

        def part(u, which):
            return getattr(complex(G(u)), which)

        avg[i] = complex(
            integrate.quad(part, lo[i], hi[i], args=("real",), epsabs=1e-16, limit=200)[0],
            integrate.quad(part, lo[i], hi[i], args=("imag",), epsabs=1e-16, limit=200)[0],
        ) / step
    diff = (F[1:] - F[:-1]) / step
    return float(np.max(np.abs(diff - avg)))


def de_residual(z, alpha_max: float = 40.0, step: float = GRID_STEP) -> float:
    """Residual of the m_z equation on the m_z_grid nodes."""
    z = complex(z)
    grid = m_z_grid(z, alpha_max, step)
    return _step_residual(_m_solution(z, _span(alpha_max)), grid.nodes, grid.values)


def buchstab_residual(alpha_max: float = 40.0, step: float = GRID_STEP) -> float:
    """Residual of (alpha w)' = w(alpha - 1) on a grid over [2, alpha_max]."""
    sol = _buchstab_solution(_span(alpha_max))
    nodes = 2.0 + step * np.arange(int(round((alpha_max - 2) / step)) + 1)
    return _step_residual(sol, nodes, sol(nodes))


def rho_residual(r: float, u_max: float = 40.0, step: float = GRID_STEP) -> float:
    """Residual of the rho_r equation on a grid over [1, u_max]."""
    sol = _rho_solution(float(r), _span(u_max))
    nodes = 1.0 + step * np.arange(int(round((u_max - 1) / step)) + 1)
    return _step_residual(sol, nodes, sol(nodes))


def m_r_convolution(alpha: float, r: float) -> float:
    """m_r via g(1,r) (int_0^(alpha-1) w(alpha - t) rho_r(t) dt + rho_r(alpha)).

    Independent of the m_z solution: it only uses w and rho_r.
    """
    if not r > 0:
        raise DomainError("r must be > 0")
    if not 1 <= alpha <= MAX_ALPHA:
        raise DomainError(f"alpha must be in [1, {MAX_ALPHA}]")
    top = alpha - 1.0
    g = selberg_g(r).real
    if top <= 0:
        return g * rho_r(alpha, r)
    # kinks of w(alpha - t) and of rho_r(t)
    cuts = {0.0, top}
    cuts.update(float(k) for k in range(1, math.ceil(top)) if k < top)
    cuts.update(alpha - k for k in range(2, math.floor(alpha) + 1) if 0 < alpha - k < top)
    cuts = sorted(cuts)
    inv_gamma = reciprocal_gamma(r).real
    total = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        if hi - lo < 1e-15:
            continue
        if lo == 0.0:
            # rho_r(t) = t^(r-1)/Gamma(r) here; the algebraic weight takes t^(r-1)
            val = integrate.quad(
                lambda t: buchstab_w(alpha - t), 0.0, hi, weight="alg", wvar=(r - 1, 0.0),
                epsabs=1e-14, epsrel=1e-13, limit=200,
            )[0]
            total += inv_gamma * val
        else:
            total += integrate.quad(
                lambda t: buchstab_w(alpha - t) * rho_r(t, r), lo, hi,
                epsabs=1e-14, epsrel=1e-13, limit=200,
            )[0]
    return g * (total + rho_r(alpha, r))
