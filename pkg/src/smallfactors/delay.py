"""Piecewise-series solver for the linear delay equations

    (a^(1-c) f(a))' = kappa * a^(-c) * f(a - 1),   a > 1,

which covers the Buchstab function (c = 0, kappa = 1), the generalized
Dickman function rho_r (c = r, kappa = -r) and m_z (c = z, kappa = 1 - z).

On each unit cell [n, n+1] the solution is kept as two expansions:

* left, around a = n, valid for t = a - n in [0, 1/2]::

      f = sum_j A_j t^j + t^c sum_j B_j t^j

* right, around a = n + 1, valid for s = a - n - 1 in [-1/2, 0]::

      f = sum_j D_j s^j

The delayed term of cell n is the same-offset expansion of cell n - 1, so
each step is exact series algebra (multiply by binomial series, integrate
termwise).  The two halves are tied together at the cell midpoint.  Every
function of interest has a branch point of type (a - n)^(c + n - 2) at each
integer; the t^c family carries it exactly, which a fixed-step marcher
cannot do.
"""

from __future__ import annotations

import numpy as np

TERMS = 64


def binomial_series(power: complex, base: float, terms: int = TERMS) -> np.ndarray:
    """Taylor coefficients of (base + t)^power around t = 0, base > 0."""
    out = np.empty(terms, dtype=complex)
    out[0] = np.exp(power * np.log(base))
    for j in range(1, terms):
        out[j] = out[j - 1] * (power - j + 1) / (j * base)
    return out


def _mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: len(a)]


def _horner(coef: np.ndarray, t):
    acc = np.zeros(np.shape(t), dtype=complex)
    for c in coef[::-1]:
        acc = acc * t + c
    return acc


def _tpow(t, c: complex):
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=complex)
    pos = t > 0
    out[pos] = np.exp(c * np.log(t[pos]))
    if c == 0:
        out[~pos] = 1.0
    return out


class Cell:
    __slots__ = ("n", "A", "B", "D", "F_left", "F_right")

    def __init__(self, n, A, B, D, F_left, F_right):
        self.n = n
        self.A, self.B, self.D = A, B, D
        self.F_left, self.F_right = F_left, F_right


class DelaySolution:
    """Solution of the delay equation on (0, n_max + 1].

    ``seed`` is either ``"power"`` (f = sigma * a^(c-1) on (0, 1]) or
    ``"buchstab"`` (f = 0 on (0, 1) and a f(a) = 1 at a = 1).
    """

    def __init__(self, c: complex, kappa: complex, sigma: complex, seed: str, alpha_max: float,
                 terms: int = TERMS):
        if seed not in ("power", "buchstab"):
            raise ValueError(f"unknown seed {seed!r}")
        self.c = complex(c)
        self.kappa = complex(kappa)
        self.sigma = complex(sigma)
        self.seed = seed
        self.terms = terms
        self.alpha_max = float(alpha_max)
        self.cells: list[Cell] = []
        self._solve(int(np.floor(alpha_max)))

    def _solve(self, n_max: int) -> None:
        c, kappa, J = self.c, self.kappa, self.terms
        idx = np.arange(J)
        half = 0.5 ** idx
        neg_half = (-0.5) ** idx

        if self.seed == "power":
            F_n = self.sigma
            Fa = np.zeros(J, dtype=complex)
            Fa[0] = self.sigma
            Fb = kappa * self.sigma * binomial_series(-c, 1.0, J) / (idx + c)
            delayed_right = self.sigma * binomial_series(c - 1, 1.0, J)
        else:
            F_n = 1.0 + 0j
            Fa = np.zeros(J, dtype=complex)
            Fa[0] = 1.0
            Fb = np.zeros(J, dtype=complex)
            delayed_right = np.zeros(J, dtype=complex)

        delayed_A = delayed_B = None
        for n in range(1, n_max + 1):
            if n > 1:
                bn = binomial_series(-c, n, J)
                ga = kappa * _mul(bn, delayed_A)
                gb = kappa * _mul(bn, delayed_B)
                Fa = np.zeros(J, dtype=complex)
                Fb = np.zeros(J, dtype=complex)
                Fa[0] = F_n
                Fa[1:] = ga[:-1] / (idx[:-1] + 1)
                Fb[1:] = gb[:-1] / (idx[:-1] + 1 + c)
            pm = binomial_series(c - 1, n, J)
            A = _mul(pm, Fa)
            B = _mul(pm, Fb)
            F_mid = Fa @ half + (0.5 ** c) * (Fb @ half)

            bn1 = binomial_series(-c, n + 1, J)
            g = kappa * _mul(bn1, delayed_right)
            Fr = np.zeros(J, dtype=complex)
            Fr[1:] = g[:-1] / (idx[:-1] + 1)
            Fr[0] = F_mid - Fr[1:] @ neg_half[1:]
            D = _mul(binomial_series(c - 1, n + 1, J), Fr)

            self.cells.append(Cell(n, A, B, D, F_n, Fr[0]))
            F_n = Fr[0]
            delayed_A, delayed_B, delayed_right = A, B, D

    @property
    def upper(self) -> float:
        return float(len(self.cells) + 1)

    def __call__(self, alpha):
        """Evaluate f at alpha (scalar or array); complex result."""
        a = np.asarray(alpha, dtype=float)
        scalar = a.ndim == 0
        a = np.atleast_1d(a)
        out = np.empty(a.shape, dtype=complex)
        if np.any(a <= 0) or np.any(a > self.upper + 1e-12):
            raise ValueError(f"alpha outside (0, {self.upper}]")
        low = a < 1
        if low.any():
            if self.seed == "power":
                out[low] = self.sigma * np.exp((self.c - 1) * np.log(a[low]))
            else:
                out[low] = 0.0
        n = np.minimum(np.floor(a).astype(int), len(self.cells))
        for k in np.unique(n[~low]):
            sel = (n == k) & ~low
            cell = self.cells[k - 1]
            t = a[sel] - k
            res = np.empty(t.shape, dtype=complex)
            left = t <= 0.5
            if left.any():
                tl = t[left]
                res[left] = _horner(cell.A, tl) + _tpow(tl, self.c) * _horner(cell.B, tl)
            if (~left).any():
                res[~left] = _horner(cell.D, t[~left] - 1.0)
            out[sel] = res
        return out[0] if scalar else out

    def derivative(self, alpha):
        """f'(alpha) for alpha > 1, read off the delay equation itself."""
        a = np.asarray(alpha, dtype=float)
        return (self.kappa * self(a - 1.0) - (1 - self.c) * self(a)) / a

    def integral(self, upper: float) -> complex:
        """Integral of f over (0, upper], termwise on every half cell."""
        if upper <= 0:
            return 0j
        if upper > self.upper + 1e-12:
            raise ValueError(f"upper limit beyond {self.upper}")
        c = self.c
        if self.seed == "power":
            total = self.sigma * np.exp(c * np.log(min(upper, 1.0))) / c
        else:
            total = 0j
        idx = np.arange(self.terms)
        for cell in self.cells:
            n = cell.n
            if upper <= n:
                break
            tl = min(upper - n, 0.5)
            total += (cell.A / (idx + 1)) @ tl ** (idx + 1)
            total += np.exp((1 + c) * np.log(tl)) * ((cell.B / (idx + 1 + c)) @ tl ** idx)
            if upper > n + 0.5:
                s_hi = min(upper - n - 1, 0.0)
                prim = cell.D / (idx + 1)
                total += prim @ (s_hi ** (idx + 1)) - prim @ ((-0.5) ** (idx + 1))
        return complex(total)
