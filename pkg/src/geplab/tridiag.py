"""Arbitrary-precision eigenpairs of non-Hermitian tridiagonal matrices.

Strongly non-normal tridiagonal matrices (open chains with asymmetric
hopping) have eigenvectors whose components span many decades, far beyond
what double precision can resolve.  Eigenvalues are polished by Newton's
method on the continuant (three-term recurrence for the characteristic
polynomial) and eigenvectors follow from the same recurrence, both in
mpmath at a working precision sized from the band entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath as mp
import numpy as np

from .linalg import ConvergenceError


@dataclass(frozen=True)
class TridiagonalBands:
    diag: tuple[complex, ...]
    sub: tuple[complex, ...]
    sup: tuple[complex, ...]

    def __post_init__(self):
        n = len(self.diag)
        if n < 2 or len(self.sub) != n - 1 or len(self.sup) != n - 1:
            raise ValueError("bands must have lengths n, n-1, n-1 with n >= 2")

    @classmethod
    def from_matrix(cls, m, atol: float = 0.0) -> "TridiagonalBands":
        a = np.asarray(m, dtype=complex)
        n = a.shape[0]
        outside = a - np.diag(np.diag(a)) - np.diag(np.diag(a, 1), 1) - np.diag(np.diag(a, -1), -1)
        if np.any(np.abs(outside) > atol):
            raise ValueError("matrix is not tridiagonal")
        if n < 2:
            raise ValueError("need at least a 2x2 matrix")
        return cls(tuple(complex(x) for x in np.diag(a)), tuple(complex(x) for x in np.diag(a, -1)),
                   tuple(complex(x) for x in np.diag(a, 1)))

    @property
    def size(self) -> int:
        return len(self.diag)

    def transpose(self) -> "TridiagonalBands":
        return TridiagonalBands(self.diag, self.sup, self.sub)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)

    def is_irreducible(self) -> bool:
        return all(x != 0 for x in self.sub) and all(x != 0 for x in self.sup)


@dataclass(frozen=True)
class PrecisePair:
    value: mp.mpc
    right: list
    left: list
    dps: int

    def right_array(self) -> np.ndarray:
        return _to_array(self.right)

    def left_array(self) -> np.ndarray:
        return _to_array(self.left)


def _to_array(v: Sequence) -> np.ndarray:
    norm = mp.sqrt(mp.fsum(abs(x) ** 2 for x in v))
    return np.array([complex(x / norm) for x in v])


def working_digits(bands: TridiagonalBands, energy_scale: float = 0.0, margin: int = 30) -> int:
    """Decimal digits needed to resolve eigenvectors of ``bands``.

    The estimate adds the dynamic range implied by the hopping asymmetry to
    the worst-case growth of the forward recurrence, doubles it, and adds a
    safety margin.
    """
    if not bands.is_irreducible():
        raise ValueError("tridiagonal matrix is reducible (zero off-diagonal entry)")
    asym = sum(abs(math.log10(abs(s) / abs(p))) for s, p in zip(bands.sub, bands.sup))
    growth = 0.0
    for b in (bands, bands.transpose()):
        g = 0.0
        for k in range(1, b.size - 1):
            num = abs(b.sub[k - 1]) + abs(b.diag[k]) + energy_scale
            g += max(0.0, math.log10(num / abs(b.sup[k])))
        growth = max(growth, g)
    return int(margin + 2 * math.ceil(asym + growth))


def _mp_bands(bands: TridiagonalBands):
    return ([mp.mpc(x) for x in bands.diag], [mp.mpc(x) for x in bands.sub], [mp.mpc(x) for x in bands.sup])


def characteristic(d, sub, sup, e):
    """``det(T - e)`` and its derivative in e, by the continuant recurrence."""
    p0, dp0 = mp.mpc(1), mp.mpc(0)
    p1, dp1 = d[0] - e, mp.mpc(-1)
    for k in range(1, len(d)):
        c = sub[k - 1] * sup[k - 1]
        p0, p1 = p1, (d[k] - e) * p1 - c * p0
        dp0, dp1 = dp1, -p0 + (d[k] - e) * dp1 - c * dp0
    return p1, dp1


def _newton(d, sub, sup, guess, exclude, max_iter: int = 500):
    e = mp.mpc(guess)
    tol = mp.mpf(10) ** (-mp.mp.dps + 8)
    floor = mp.mpf(10) ** (-(mp.mp.dps // 2))
    for _ in range(max_iter):
        p, dp = characteristic(d, sub, sup, e)
        if p == 0:
            return e
        if dp == 0:
            break
        corr = p / dp
        if exclude:
            # Maehly deflation of roots already found
            corr = 1 / (1 / corr - mp.fsum(1 / (e - r) for r in exclude))
        e_new = e - corr
        if abs(e_new - e) <= tol * (abs(e_new) + floor):
            return e_new
        e = e_new
    raise ConvergenceError(-1, max_iter)


def _forward_vector(d, sub, sup, e) -> list:
    n = len(d)
    v = [mp.mpc(0)] * n
    v[0] = mp.mpc(1)
    v[1] = -(d[0] - e) * v[0] / sup[0]
    for k in range(1, n - 1):
        v[k + 1] = -(sub[k - 1] * v[k - 1] + (d[k] - e) * v[k]) / sup[k]
    return v


def refine_eigenpairs(bands: TridiagonalBands, guesses: Sequence[complex], dps: int | None = None) -> list[PrecisePair]:
    """Polish eigenvalues near ``guesses`` and build right/left eigenvectors.

    Each later guess is deflated against the roots already found, so nearby
    guesses converge to distinct eigenvalues.
    """
    scale = max((abs(g) for g in guesses), default=0.0)
    if dps is None:
        dps = working_digits(bands, scale)
    out = []
    with mp.workdps(dps):
        d, sub, sup = _mp_bands(bands)
        roots: list = []
        for g in guesses:
            e = _newton(d, sub, sup, g, tuple(roots))
            roots.append(e)
        for e in roots:
            right = _forward_vector(d, sub, sup, e)
            # left vector: (T^T y = e y) then L = conj(y), so that L^H T = e L^H
            y = _forward_vector(d, sup, sub, e)
            left = [mp.conj(x) for x in y]
            out.append(PrecisePair(e, right, left, dps))
    return out


def overlap_ratio(u: Sequence, v: Sequence, dps: int = 50) -> float:
    """``|<u|v>| / (||u|| ||v||)`` evaluated in extended precision."""
    with mp.workdps(dps):
        num = abs(mp.fsum(mp.conj(a) * b for a, b in zip(u, v)))
        nu = mp.sqrt(mp.fsum(abs(a) ** 2 for a in u))
        nv = mp.sqrt(mp.fsum(abs(b) ** 2 for b in v))
        return float(num / (nu * nv))


def relative_residual(bands: TridiagonalBands, pair: PrecisePair) -> float:
    """``||(T - e) r|| / (||T|| ||r||)`` evaluated at the pair's precision."""
    with mp.workdps(pair.dps):
        d, sub, sup = _mp_bands(bands)
        r, e, n = pair.right, pair.value, len(d)
        res = []
        for k in range(n):
            acc = (d[k] - e) * r[k]
            if k > 0:
                acc += sub[k - 1] * r[k - 1]
            if k < n - 1:
                acc += sup[k] * r[k + 1]
            res.append(acc)
        tnorm = mp.sqrt(mp.fsum(abs(x) ** 2 for x in d + sub + sup))
        num = mp.sqrt(mp.fsum(abs(x) ** 2 for x in res))
        den = tnorm * mp.sqrt(mp.fsum(abs(x) ** 2 for x in r))
        return float(num / den)
