"""Dense complex eigensolver with biorthogonal left/right eigenvectors.

Eigenvalues come from a Householder reduction to Hessenberg form followed
by single-shift complex QR sweeps with deflation.  Right vectors are found
by inverse iteration on the original matrix, left vectors by inverse
iteration on its adjoint at the conjugate eigenvalue, so every left vector
is matched to its right partner by construction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
import scipy.linalg

from .pauli import PauliVector

_EPS = np.finfo(float).eps

# eigenvalues closer than this (times ||H||) are matched as one cluster
CLUSTER_RTOL = 1e-8
# |<L|R>| <= NEAR_EP_RTOL * ||L|| ||R|| flags the pair instead of normalising
NEAR_EP_RTOL = 1e-10


class ConvergenceError(RuntimeError):
    def __init__(self, index: int, iterations: int):
        super().__init__(f"QR iteration did not converge for eigenvalue block ending at index {index} "
                         f"after {iterations} iterations")
        self.index = index


@dataclass(frozen=True)
class EigenPair:
    value: complex
    right: np.ndarray
    left: np.ndarray
    near_ep: bool = False


@dataclass(frozen=True)
class EffectiveHamiltonian:
    matrix: np.ndarray
    near_ep: bool = False

    def to_pauli(self) -> PauliVector:
        if self.matrix.shape != (2, 2):
            raise ValueError("only a 2x2 effective Hamiltonian has a Pauli form")
        return PauliVector.from_matrix(self.matrix)


def _as_square(m) -> np.ndarray:
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def hessenberg(m) -> np.ndarray:
    """Upper Hessenberg matrix unitarily similar to ``m`` (Householder)."""
    h = _as_square(m)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k]
        if not np.any(x[1:]):
            continue
        alpha = np.linalg.norm(x)
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        h[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h


def _wilkinson_shift(h: np.ndarray, hi: int) -> complex:
    a, b = h[hi - 1, hi - 1], h[hi - 1, hi]
    c, d = h[hi, hi - 1], h[hi, hi]
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    mu1 = 0.5 * (a + d) + disc
    mu2 = 0.5 * (a + d) - disc
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def hessenberg_eigenvalues(h: np.ndarray, max_iter: int = 40) -> np.ndarray:
    """Eigenvalues of an upper Hessenberg matrix by shifted QR with deflation."""
    h = np.array(h, dtype=complex)
    n = h.shape[0]
    vals = np.empty(n, dtype=complex)
    anorm = float(np.linalg.norm(h))
    if anorm == 0.0:
        return np.zeros(n, dtype=complex)
    hi = n - 1
    its = 0
    while hi >= 0:
        l = hi
        while l > 0:
            s = abs(h[l - 1, l - 1]) + abs(h[l, l])
            if s == 0.0:
                s = anorm
            if abs(h[l, l - 1]) <= _EPS * s:
                h[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            vals[hi] = h[hi, hi]
            hi -= 1
            its = 0
            continue
        if its >= max_iter:
            raise ConvergenceError(hi, its)
        its += 1
        if its % 10 == 0:
            # exceptional shift to break cycles
            mu = h[hi, hi] + 1.5 * abs(h[hi, hi - 1]) * np.exp(1j * its)
        else:
            mu = _wilkinson_shift(h, hi)
        idx = np.arange(l, hi + 1)
        h[idx, idx] -= mu
        rots = []
        for k in range(l, hi):
            x, y = h[k, k], h[k + 1, k]
            r = math.hypot(abs(x), abs(y))
            if r == 0.0:
                g = np.eye(2, dtype=complex)
            else:
                c, s = x / r, y / r
                g = np.array([[np.conj(c), np.conj(s)], [-s, c]])
            h[k:k + 2, k:hi + 1] = g @ h[k:k + 2, k:hi + 1]
            h[k + 1, k] = 0.0
            rots.append(g)
        for k, g in zip(range(l, hi), rots):
            top = min(k + 2, hi)
            h[l:top + 1, k:k + 2] = h[l:top + 1, k:k + 2] @ g.conj().T
        h[idx, idx] += mu
    return vals


def eigenvalues(m) -> np.ndarray:
    return hessenberg_eigenvalues(hessenberg(m))


def _clusters(vals: np.ndarray, tol: float) -> list[int]:
    labels = list(range(len(vals)))
    for i in range(len(vals)):
        for j in range(i):
            if abs(vals[i] - vals[j]) <= tol:
                labels[i] = labels[j]
                break
    return labels


def _start_vector(n: int) -> np.ndarray:
    rng = np.random.default_rng(20240611)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _inverse_iteration(a: np.ndarray, lam: complex, anorm: float, against: Sequence[np.ndarray],
                       steps: int = 3) -> np.ndarray:
    n = a.shape[0]
    delta = 16 * _EPS * anorm * (1 + 1j) / math.sqrt(2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu = scipy.linalg.lu_factor(a - (lam + delta) * np.eye(n), check_finite=False)
        x = _start_vector(n)
        for _ in range(steps):
            for q in against:
                x = x - (q.conj() @ x) * q
            y = scipy.linalg.lu_solve(lu, x, check_finite=False)
            norm = np.linalg.norm(y)
            if not np.isfinite(norm) or norm == 0.0:
                break
            x = y / norm
    return x


def _vectors(a: np.ndarray, vals: np.ndarray, anorm: float, labels: list[int]) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for i, lam in enumerate(vals):
        same = [out[j] for j in range(i) if labels[j] == labels[i]]
        basis = []
        for q in same:
            q = q.copy()
            for p in basis:
                q = q - (p.conj() @ q) * p
            nq = np.linalg.norm(q)
            if nq > 1e-6:
                basis.append(q / nq)
        x = _inverse_iteration(a, lam, anorm, basis)
        if basis and np.linalg.norm(a @ x - lam * x) > 1e-8 * anorm:
            # defective cluster: no independent vector exists, keep the coalesced one
            x = _inverse_iteration(a, lam, anorm, [])
        out.append(x)
    return out


def biorthonormalize(pairs: Sequence[EigenPair], cluster_rtol: float = CLUSTER_RTOL) -> list[EigenPair]:
    """Scale pairs so that ``<L_i|R_j> = delta_ij``.

    Right vectors are normalised to unit length.  A pair whose ``<L|R>`` is
    numerically zero (an exceptional point) is flagged ``near_ep`` and left
    unnormalised.  Clusters of (near-)degenerate eigenvalues are
    biorthogonalised jointly.
    """
    pairs = [replace(p, right=p.right / np.linalg.norm(p.right)) for p in pairs]
    if not pairs:
        return []
    vals = np.array([p.value for p in pairs])
    scale = max(1.0, float(np.max(np.abs(vals))))
    labels = _clusters(vals, cluster_rtol * scale)
    out = list(pairs)
    for label in sorted(set(labels)):
        members = [i for i, lab in enumerate(labels) if lab == label]
        r = np.column_stack([pairs[i].right for i in members])
        l = np.column_stack([pairs[i].left for i in members])
        m = l.conj().T @ r
        lnorms = np.linalg.norm(l, axis=0)
        svals = np.linalg.svd(m, compute_uv=False)
        if svals[-1] <= NEAR_EP_RTOL * float(np.max(lnorms)):
            for i in members:
                out[i] = replace(pairs[i], near_ep=True)
            continue
        l_new = l @ np.linalg.inv(m).conj().T
        for k, i in enumerate(members):
            out[i] = replace(pairs[i], left=l_new[:, k], near_ep=False)
    return out


def eig(m) -> list[EigenPair]:
    """All eigenpairs of a dense complex matrix, biorthonormalised.

    Pairs are ordered by ascending real part, then imaginary part.
    """
    a = _as_square(m)
    n = a.shape[0]
    anorm = float(np.linalg.norm(a))
    if n == 1:
        one = np.ones(1, dtype=complex)
        return [EigenPair(complex(a[0, 0]), one, one.copy())]
    vals = eigenvalues(a)
    order = np.lexsort((vals.imag, vals.real))
    vals = vals[order]
    if anorm == 0.0:
        eye = np.eye(n, dtype=complex)
        return [EigenPair(0j, eye[:, i].copy(), eye[:, i].copy()) for i in range(n)]
    labels = _clusters(vals, CLUSTER_RTOL * anorm)
    rights = _vectors(a, vals, anorm, labels)
    lefts = _vectors(a.conj().T, vals.conj(), anorm, labels)
    pairs = [EigenPair(complex(v), r, l) for v, r, l in zip(vals, rights, lefts)]
    return biorthonormalize(pairs)


def project_effective_hamiltonian(m, pairs: Sequence[EigenPair]) -> EffectiveHamiltonian:
    """``h_IJ = <L_I| H |R_J>`` over the selected biorthogonal pairs."""
    a = _as_square(m)
    r = np.column_stack([p.right for p in pairs])
    l = np.column_stack([p.left for p in pairs])
    near = any(p.near_ep for p in pairs)
    if near:
        warnings.warn("projection uses a pair flagged near an exceptional point", RuntimeWarning, stacklevel=2)
    return EffectiveHamiltonian(l.conj().T @ a @ r, near)


def residuals(m, pairs: Sequence[EigenPair]) -> tuple[float, float]:
    """Largest right and left residual norms."""
    a = _as_square(m)
    right = max(np.linalg.norm(a @ p.right - p.value * p.right) / np.linalg.norm(p.right) for p in pairs)
    left = max(np.linalg.norm(a.conj().T @ p.left - np.conj(p.value) * p.left) / np.linalg.norm(p.left)
               for p in pairs)
    return float(right), float(left)
