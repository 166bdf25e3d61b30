"""Exact algebra of complex 2x2 Hamiltonians written as ``h0 + h.sigma``.

Conventions
-----------
A :class:`SimilarityTransform` with axis ``n`` and exponent ``beta`` is the
operator ``exp(-(beta/2) n.sigma)``.  With this normalisation the matrix basis
built from the eigenbasis of ``n.sigma`` has squared norms whose ratio is
``exp(-2 beta)``, the reducing exponent of ``h_x sigma_x + i h_z sigma_z`` is
``|1/2 ln|(h_x + h_z)/(h_x - h_z)||`` and a basis exponent ``N q0`` reproduces
the ``exp(-+N q0)`` scaling of the transverse couplings of the SSH edge pair.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])
IDENTITY = np.eye(2, dtype=complex)

# beta^M is flagged divergent when |alpha -+ b| <= DIVERGENCE_RTOL * (|alpha| + b)
DIVERGENCE_RTOL = 1e-12
# |h.h| <= DEFECTIVE_RTOL * |h|^2 counts as a coalesced (Jordan) pair
DEFECTIVE_RTOL = 1e-14


class ScalarHamiltonianError(ValueError):
    """Raised when ``h`` vanishes, so no Pauli direction is defined."""


class NoRotationAxisError(ValueError):
    pass


class AtGEPError(ValueError):
    """The reducing transform diverges: the Hamiltonian sits on a GEP."""


def pauli_dot(v: Sequence[complex]) -> np.ndarray:
    """Return ``v.sigma`` for a (possibly complex) 3-vector."""
    return np.tensordot(np.asarray(v, dtype=complex), SIGMA, axes=1)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _perpendicular(n: np.ndarray) -> np.ndarray:
    # any real unit vector orthogonal to n
    trial = np.eye(3)[int(np.argmin(np.abs(n)))]
    return _unit(np.cross(n, trial))


@dataclass(frozen=True)
class PauliVector:
    """A 2x2 Hamiltonian ``h0 * I + h . sigma``."""

    h0: complex
    h: tuple[complex, complex, complex]

    def __post_init__(self):
        h0 = complex(self.h0)
        h = tuple(complex(c) for c in self.h)
        if len(h) != 3:
            raise ValueError("h must have three components")
        if not all(cmath.isfinite(c) for c in (h0, *h)):
            raise ValueError("PauliVector components must be finite")
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "h", h)

    @classmethod
    def from_components(cls, hx=0.0, hy=0.0, hz=0.0, h0=0.0) -> "PauliVector":
        return cls(h0, (hx, hy, hz))

    @classmethod
    def from_matrix(cls, m) -> "PauliVector":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        h0 = 0.5 * (m[0, 0] + m[1, 1])
        hx = 0.5 * (m[0, 1] + m[1, 0])
        hy = 0.5j * (m[0, 1] - m[1, 0])
        hz = 0.5 * (m[0, 0] - m[1, 1])
        return cls(h0, (hx, hy, hz))

    @property
    def vec(self) -> np.ndarray:
        return np.array(self.h, dtype=complex)

    def matrix(self) -> np.ndarray:
        return self.h0 * IDENTITY + pauli_dot(self.h)

    def dot_self(self) -> complex:
        """Bilinear square ``h.h`` (no complex conjugation)."""
        v = self.vec
        return complex(np.sum(v * v))

    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))

    def rotated(self, rot: np.ndarray) -> "PauliVector":
        """Apply a real 3x3 rotation to the Pauli vector (a unitary change of frame)."""
        return PauliVector(self.h0, tuple(np.asarray(rot, dtype=float) @ self.vec))


@dataclass(frozen=True)
class AxisDecomposition:
    re_part: np.ndarray
    im_part: np.ndarray
    im_commuting: np.ndarray
    im_anti: np.ndarray
    n_re: np.ndarray
    n_a: np.ndarray
    alpha: complex
    b: float


@dataclass(frozen=True)
class SimilarityTransform:
    """``exp(-(beta - i*angle)/2 * axis.sigma)``.

    ``beta`` is the non-Hermitian (boost) exponent and may be ``math.inf``.
    ``angle`` is an ordinary unitary rotation about the same axis; it only
    appears when the commuting imaginary part of ``h`` is non-zero and never
    changes norms.
    """

    axis: tuple[float, float, float]
    beta: float
    angle: float = 0.0

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        n = np.linalg.norm(axis)
        if axis.shape != (3,) or not np.isfinite(n) or n == 0:
            raise ValueError("axis must be a non-zero real 3-vector")
        if abs(n - 1.0) > 1e-12:
            axis = axis / n
        if math.isnan(self.beta) or self.beta < 0:
            raise ValueError("beta must be a non-negative real or inf")
        object.__setattr__(self, "axis", tuple(float(a) for a in axis))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "angle", float(self.angle))

    @classmethod
    def identity(cls, axis=(0.0, 0.0, 1.0)) -> "SimilarityTransform":
        return cls(tuple(axis), 0.0)

    @property
    def divergent(self) -> bool:
        return math.isinf(self.beta)

    def _exponent(self, sign: float) -> complex:
        return sign * 0.5 * complex(self.beta, -self.angle)

    def matrix(self) -> np.ndarray:
        if self.divergent:
            raise AtGEPError("transform with divergent exponent has no finite matrix")
        z = self._exponent(1.0)
        return cmath.cosh(z) * IDENTITY - cmath.sinh(z) * pauli_dot(self.axis)

    def inverse_matrix(self) -> np.ndarray:
        if self.divergent:
            raise AtGEPError("transform with divergent exponent has no finite inverse")
        z = self._exponent(-1.0)
        return cmath.cosh(z) * IDENTITY - cmath.sinh(z) * pauli_dot(self.axis)

    def apply(self, state) -> np.ndarray:
        return self.matrix() @ np.asarray(state, dtype=complex)

    def conjugate(self, h: PauliVector) -> PauliVector:
        """``S^-1 H S``."""
        return PauliVector.from_matrix(self.inverse_matrix() @ h.matrix() @ self.matrix())


@dataclass(frozen=True)
class MatrixBasisReport:
    norm1: float
    norm2: float
    overlap: complex
    defectiveness: float

    @property
    def fractions(self) -> tuple[float, float]:
        total = self.norm1 + self.norm2
        return self.norm1 / total, self.norm2 / total


@dataclass(frozen=True)
class PeachSample:
    theta: float
    phi: float
    radius: float


class Eigenvectors2(NamedTuple):
    plus: np.ndarray
    minus: np.ndarray
    defective: bool


def decompose(h: PauliVector, zero_tol: float = 1e-14) -> AxisDecomposition:
    """Split ``Im h`` into parts parallel and orthogonal to ``Re h``.

    Parallel Pauli axes commute and orthogonal ones anticommute, so the
    parallel piece can be folded into a complex magnitude ``alpha`` along
    ``n_re`` while the orthogonal piece has real magnitude ``b``.
    """
    v = h.vec
    scale = float(np.linalg.norm(v))
    if scale == 0.0:
        raise ScalarHamiltonianError("scalar Hamiltonian: h vanishes, no direction defined")
    re = v.real.copy()
    im = v.imag.copy()
    re_norm = float(np.linalg.norm(re))
    if re_norm <= zero_tol * scale:
        # already anti-Hermitian: the whole imaginary part plays the role of the axis
        n_re = _unit(im)
        return AxisDecomposition(
            re_part=re,
            im_part=im,
            im_commuting=im.copy(),
            im_anti=np.zeros(3),
            n_re=n_re,
            n_a=_perpendicular(n_re),
            alpha=1j * float(np.linalg.norm(im)),
            b=0.0,
        )
    n_re = re / re_norm
    along = float(im @ n_re)
    im_c = along * n_re
    im_a = im - im_c
    b = float(np.linalg.norm(im_a))
    if b <= zero_tol * scale:
        n_a = _perpendicular(n_re)
    else:
        n_a = im_a / b
    return AxisDecomposition(
        re_part=re,
        im_part=im,
        im_commuting=im_c,
        im_anti=im_a,
        n_re=n_re,
        n_a=n_a,
        alpha=complex(re_norm, along),
        b=b,
    )


def beta_m(d: AxisDecomposition) -> float:
    """Exponent of the Hermitian-reducing transform; ``math.inf`` on a GEP."""
    alpha, b = d.alpha, d.b
    if b == 0.0:
        return 0.0
    scale = abs(alpha) + b
    num = abs(alpha + b)
    den = abs(alpha - b)
    if den <= DIVERGENCE_RTOL * scale or num <= DIVERGENCE_RTOL * scale:
        return math.inf
    return abs(0.5 * math.log(num / den))


def sigma_m_axis(d: AxisDecomposition) -> np.ndarray:
    if d.b == 0.0 or not np.any(d.re_part):
        raise NoRotationAxisError("no rotation axis: Hamiltonian needs no transform")
    # (1/2i)[a.sigma, b.sigma] = (a x b).sigma
    return _unit(np.cross(d.n_a, d.n_re))


def _reduced_magnitude(alpha: complex, b: float) -> complex:
    # sqrt(alpha^2 - b^2) on the branch that tends to alpha as b -> 0
    return alpha * cmath.sqrt(1.0 - (b / alpha) ** 2)


def reduce_to_hermitian(h: PauliVector) -> tuple[PauliVector, SimilarityTransform]:
    """Find ``S`` with ``S^-1 H S = h0 + c n_re.sigma`` where ``c^2 = h.h``.

    ``c`` is real (Hermitian result) when ``b < alpha`` and imaginary
    (anti-Hermitian result) when ``b > alpha``.
    """
    d = decompose(h)
    target = PauliVector(h.h0, tuple(_reduced_magnitude(d.alpha, d.b) * d.n_re))
    if beta_m(d) == 0.0:
        return target, SimilarityTransform.identity(tuple(d.n_re))
    if math.isinf(beta_m(d)):
        raise AtGEPError("at GEP: no finite reduction exists")
    axis = sigma_m_axis(d)
    # complex rotation angle about the axis; Re(w) >= 0 because Re(alpha) >= 0
    # (for b > alpha on the real line both sides of the atanh branch cut are tried)
    w = cmath.atanh(d.b / d.alpha)
    candidates = []
    for sign in (1.0, -1.0):
        for im_w in {w.imag, -w.imag}:
            s = SimilarityTransform(tuple(sign * axis), abs(w.real), -im_w)
            got = s.conjugate(h)
            residual = np.linalg.norm(got.matrix() - target.matrix())
            candidates.append((residual, s))
    residual, s = min(candidates, key=lambda c: c[0])
    return target, s


def energies(h: PauliVector) -> tuple[complex, complex]:
    root = cmath.sqrt(h.dot_self())
    return h.h0 + root, h.h0 - root


def _phase_fix(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def _eigvec(hv: np.ndarray, lam: complex) -> np.ndarray:
    hx, hy, hz = hv
    a = np.array([hx - 1j * hy, lam - hz])
    b = np.array([lam + hz, hx + 1j * hy])
    return _phase_fix(a if np.linalg.norm(a) >= np.linalg.norm(b) else b)


def eigenvectors_2x2(h: PauliVector) -> Eigenvectors2:
    """Self-normalised right eigenvectors for ``E_+`` and ``E_-``.

    When ``h.h`` vanishes with ``h != 0`` the matrix is a Jordan block; the
    single eigenvector is returned twice and ``defective`` is set.
    """
    hv = h.vec
    scale2 = float(np.sum(np.abs(hv) ** 2))
    if scale2 == 0.0:
        return Eigenvectors2(np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex), False)
    hh = complex(np.sum(hv * hv))
    if abs(hh) <= DEFECTIVE_RTOL * scale2:
        v = _eigvec(hv, 0.0)
        return Eigenvectors2(v, v.copy(), True)
    root = cmath.sqrt(hh)
    return Eigenvectors2(_eigvec(hv, root), _eigvec(hv, -root), False)


def basis_gram(axis, beta: float) -> np.ndarray:
    """Gram matrix ``S_B^dag S_B`` of the initial basis, rescaled to unit trace scale.

    For ``beta = inf`` the rank-one limit (projector on the surviving
    direction) is returned.
    """
    n = pauli_dot(_unit(np.asarray(axis, dtype=float)))
    p_plus = 0.5 * (IDENTITY + n)
    p_minus = 0.5 * (IDENTITY - n)
    if math.isinf(beta):
        return p_minus
    # exp(-beta n.sigma) / exp(beta), overflow-safe
    return p_minus + math.exp(-2.0 * beta) * p_plus


def basis_factor(axis, beta: float) -> np.ndarray:
    """``S_B`` rescaled by ``exp(-beta/2)`` so its largest singular value is 1.

    The Gram matrix is ``F^dag F``; working with ``F`` itself keeps overlaps
    resolvable when ``exp(-2 beta)`` is far below machine epsilon.
    """
    n = pauli_dot(_unit(np.asarray(axis, dtype=float)))
    p_minus = 0.5 * (IDENTITY - n)
    if math.isinf(beta):
        return p_minus
    return p_minus + math.exp(-beta) * 0.5 * (IDENTITY + n)


def state_similarity(h: PauliVector, basis=None, *, with_flag: bool = False):
    """``|<psi+|psi->|`` for self-normalised eigenvectors of ``h``.

    ``basis`` is an ``(axis, beta)`` pair selecting the initial basis; the
    overlap is then taken between ``S_B |psi+->``.  When ``beta`` is infinite
    the basis is a limit: if both eigenvectors survive the projection they
    become parallel (1), if exactly one is annihilated the overlap vanishes (0).
    The returned flag marks that limit rule.
    """
    vecs = eigenvectors_2x2(h)
    if vecs.defective:
        return (1.0, False) if with_flag else 1.0
    cp, cm = vecs.plus, vecs.minus
    tiny = 0.0
    if basis is not None:
        axis, beta = basis
        f = basis_factor(axis, beta)
        if math.isinf(beta) or math.exp(-beta) == 0.0:
            tiny = 1e-14
        cp, cm = f @ cp, f @ cm
    np_, nm = float(np.linalg.norm(cp)), float(np.linalg.norm(cm))
    zp, zm = np_ <= tiny, nm <= tiny
    if zp or zm:
        value = 1.0 if (zp and zm) else 0.0
        return (value, True) if with_flag else value
    value = min(1.0, float(abs(np.vdot(cp, cm)) / (np_ * nm)))
    return (value, False) if with_flag else value


def matrix_basis_report(s_m: SimilarityTransform, s_b: SimilarityTransform) -> MatrixBasisReport:
    """Norms of ``S_M S_B |psi0>`` over the orthonormal basis natural to ``S_M S_B``.

    The natural basis is the right singular basis of the composed operator, so
    the images stay orthogonal and their squared norms are the squared
    singular values.  Norms are scaled so the dominant vector has norm 1.
    """
    if s_m.divergent or s_b.divergent:
        return MatrixBasisReport(1.0, 0.0, 0j, 0.0)
    c = s_m.matrix() @ s_b.matrix()
    _, sv, vh = np.linalg.svd(c)
    images = c @ vh.conj().T
    scale = sv[0] ** 2
    norm1 = 1.0
    norm2 = float(sv[1] ** 2 / scale)
    overlap = complex(images[:, 0].conj() @ images[:, 1] / scale)
    return MatrixBasisReport(norm1, norm2, overlap, norm2 / (norm1 + norm2))


def peach_radius(theta, beta_m: float, beta_b: float = 0.0):
    """Norm of a transformed Bloch state as a function of polar angle.

    ``beta_b == 0`` uses ``cos^2 + exp(-2 beta_m) sin^2``; otherwise the
    hybrid form with the ``1/sqrt(2)`` prefactor and outer square root, taken
    literally.  The two are not normalised consistently with each other.
    """
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    em = math.exp(-2.0 * beta_m) if not math.isinf(beta_m) else 0.0
    if beta_b == 0.0:
        return c**2 + em * s**2
    eb = math.exp(-beta_b) if not math.isinf(beta_b) else 0.0
    return np.sqrt((c + eb * s) ** 2 + em * (c - eb * s) ** 2) / math.sqrt(2.0)


def bloch_peach(beta_m: float, beta_b: float, thetas, phis) -> list[PeachSample]:
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    if thetas.size == 0 or phis.size == 0:
        raise ValueError("peach grid must be non-empty")
    radii = peach_radius(thetas, beta_m, beta_b)
    return [
        PeachSample(float(t), float(p), float(r))
        for t, r in zip(thetas, radii)
        for p in phis
    ]
