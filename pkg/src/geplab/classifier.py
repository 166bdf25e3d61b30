"""Classification of two-level systems into GEP types.

A system is a Pauli-form Hamiltonian together with the basis it is written
in.  The Hermitian-reducing exponent beta_M comes from the Hamiltonian, the
basis exponent beta_B from the basis; which of them diverges decides
between M, B and H types.  B-type points split into IB (basis axis commutes
with H, eigenstates stay distinct) and IIB (a transverse element of the
transformed Hamiltonian diverges and the eigenstates merge).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import pauli
from .pauli import PauliVector, SimilarityTransform

COMMUTATOR_RTOL = 1e-10
DEGENERACY_RTOL = 1e-8

CATEGORIES = ("NoGEP", "M", "IB", "IIB", "H")


@dataclass(frozen=True)
class BasisSpec:
    """Initial basis ``S_B |psi0>`` with ``S_B`` along ``axis``.

    ``beta`` is the exponent at the size actually considered; it may be
    ``inf``.  ``divergent`` marks a basis whose exponent grows without bound
    along the family it belongs to (e.g. with system size), even when a
    finite ``beta`` is supplied for that member.
    """

    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    beta: float = 0.0
    divergent: bool = False

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        n = float(np.linalg.norm(axis)) if axis.shape == (3,) else 0.0
        if not np.isfinite(n) or n == 0.0:
            raise ValueError("basis axis must be a non-zero real 3-vector")
        beta = float(self.beta)
        if math.isnan(beta) or beta < 0:
            raise ValueError("beta must be non-negative")
        object.__setattr__(self, "axis", tuple(float(a) for a in axis / n))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "divergent", bool(self.divergent) or math.isinf(beta))

    @property
    def finite_beta(self) -> float | None:
        """The finite exponent at this member, if one was given."""
        return None if math.isinf(self.beta) else self.beta

    def gram(self) -> np.ndarray:
        return pauli.basis_gram(self.axis, self.beta)

    def factor(self) -> np.ndarray:
        return pauli.basis_factor(self.axis, self.beta)

    def rotated(self, rot: np.ndarray) -> "BasisSpec":
        return BasisSpec(tuple(np.asarray(rot) @ np.asarray(self.axis)), self.beta, self.divergent)


@dataclass(frozen=True)
class SystemSpec:
    hamiltonian: PauliVector
    basis: BasisSpec = field(default_factory=BasisSpec)


@dataclass(frozen=True)
class GEPClassification:
    category: str
    beta_m: float
    beta_b: float
    lam: float
    defectiveness: float
    degenerate_energies: bool
    energies: tuple[complex, complex] = (0j, 0j)
    note: str = ""

    def as_dict(self) -> dict:
        e_plus, e_minus = self.energies
        return {
            "category": self.category,
            "beta_m": self.beta_m,
            "beta_b": self.beta_b,
            "lambda": self.lam,
            "defectiveness": self.defectiveness,
            "degenerate_energies": self.degenerate_energies,
            "E_plus": e_plus,
            "E_minus": e_minus,
        }


@dataclass(frozen=True)
class AxisComponents:
    """``h`` split relative to a basis axis: longitudinal plus raising/lowering."""

    longitudinal: complex
    raising: complex
    lowering: complex


@dataclass(frozen=True)
class DivergenceEvidence:
    raising_divergent: bool
    lowering_divergent: bool
    raising_log_growth: float
    lowering_log_growth: float

    @property
    def subclass(self) -> str:
        return "IIB" if (self.raising_divergent or self.lowering_divergent) else "IB"


def _frame(axis: Sequence[float]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = np.asarray(axis, dtype=float)
    trial = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = trial - (trial @ n) * n
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return e1, e2, n


def axis_components(h: PauliVector, axis: Sequence[float]) -> AxisComponents:
    """``h.sigma = h_n (n.sigma) + h_up sigma_up + h_down sigma_down`` in the axis frame."""
    e1, e2, n = _frame(axis)
    hv = h.vec
    a, b = complex(hv @ e1), complex(hv @ e2)
    return AxisComponents(complex(hv @ n), a - 1j * b, a + 1j * b)


def commutator_norm(h: PauliVector, axis: Sequence[float]) -> float:
    m = h.matrix()
    s = pauli.pauli_dot(np.asarray(axis, dtype=float))
    return float(np.linalg.norm(m @ s - s @ m))


def transformed_hamiltonian(spec: SystemSpec) -> PauliVector:
    """``S_B H S_B^-1`` for a finite basis exponent.

    Along the axis frame the raising amplitude is scaled by ``exp(-beta)``
    and the lowering amplitude by ``exp(+beta)``.
    """
    beta = spec.basis.beta
    if math.isinf(beta):
        raise pauli.AtGEPError("basis exponent is divergent; use divergence_test for the limit")
    s = SimilarityTransform(spec.basis.axis, beta)
    return PauliVector.from_matrix(s.matrix() @ spec.hamiltonian.matrix() @ s.inverse_matrix())


def _log_abs(z: complex) -> float:
    return math.log(abs(z)) if z != 0 else -math.inf


def divergence_test(spec: SystemSpec | Callable[[int], SystemSpec],
                    sizes: Iterable[int] | None = None, rtol: float = COMMUTATOR_RTOL) -> DivergenceEvidence:
    """Which transformed transverse element diverges as the basis exponent grows.

    For a single spec the exponent is sent to infinity with the Hamiltonian
    held fixed: only the lowering element can diverge, and does so whenever
    it is non-zero.  For a family ``size -> spec`` the log-magnitudes of the
    transformed elements are tracked over ``sizes`` and a positive growth
    rate counts as divergence.
    """
    if callable(spec):
        ns = sorted(set(sizes or (10, 20, 40, 80)))
        if len(ns) < 2:
            raise ValueError("need at least two sizes to measure growth")
        ups, downs = [], []
        for n in ns[-2:]:
            member = spec(n)
            c = axis_components(member.hamiltonian, member.basis.axis)
            ups.append(_log_abs(c.raising) - member.basis.beta)
            downs.append(_log_abs(c.lowering) + member.basis.beta)
        step = ns[-1] - ns[-2]
        g_up = (ups[1] - ups[0]) / step if math.isfinite(ups[1]) else -math.inf
        g_down = (downs[1] - downs[0]) / step if math.isfinite(downs[1]) else -math.inf
        return DivergenceEvidence(g_up > 0, g_down > 0, g_up, g_down)
    c = axis_components(spec.hamiltonian, spec.basis.axis)
    down = abs(c.lowering) > rtol * max(spec.hamiltonian.norm(), 1e-300)
    return DivergenceEvidence(False, down, -math.inf, math.inf if down else -math.inf)


def _transform_m(h: PauliVector) -> tuple[float, SimilarityTransform]:
    d = pauli.decompose(h)
    bm = pauli.beta_m(d)
    if bm == 0.0 or d.b == 0.0:
        return 0.0, SimilarityTransform.identity()
    axis = pauli.sigma_m_axis(d)
    return bm, SimilarityTransform(tuple(axis), bm)


def classify(spec: SystemSpec, commute_rtol: float = COMMUTATOR_RTOL,
             degeneracy_rtol: float = DEGENERACY_RTOL) -> GEPClassification:
    h, basis = spec.hamiltonian, spec.basis
    e_plus, e_minus = pauli.energies(h)
    if h.norm() == 0.0:
        warnings.warn("scalar Hamiltonian: no direction defined, reported as NoGEP", RuntimeWarning, stacklevel=2)
        return GEPClassification("NoGEP", 0.0, basis.beta, 0.0, 0.5, True, (e_plus, e_minus),
                                 "scalar Hamiltonian")

    bm, s_m = _transform_m(h)
    m_div = math.isinf(bm)
    b_div = basis.divergent
    gap = abs(e_plus - e_minus)
    degenerate = m_div or gap <= degeneracy_rtol * (abs(e_plus) + abs(e_minus) + degeneracy_rtol)

    # exp(-2*600) already underflows, so larger exponents change nothing
    s_b = SimilarityTransform(basis.axis, min(basis.beta, 600.0))
    defectiveness = pauli.matrix_basis_report(s_m, s_b).defectiveness
    note = ""

    if m_div and b_div:
        category, lam = "H", 1.0
    elif m_div:
        category, lam = "M", 1.0
    elif not b_div:
        category, lam = "NoGEP", pauli.state_similarity(h, (basis.axis, basis.beta))
    else:
        finite = basis.finite_beta
        if finite is None:
            if commutator_norm(h, basis.axis) <= commute_rtol * h.norm():
                category = "IB"
                note = "Hamiltonian commutes with the basis axis"
            else:
                category = "IIB"
                note = "transverse element diverges in the limit"
        else:
            # finite member of a divergent family: the larger of the scaled
            # transverse element and the longitudinal term wins
            c = axis_components(h, basis.axis)
            transverse = max(abs(c.raising) * math.exp(-finite), abs(c.lowering) * math.exp(finite))
            category = "IIB" if transverse > abs(c.longitudinal) else "IB"
            note = "finite-size dominance of the transformed transverse element"
        if finite is None:
            lam = 0.0 if category == "IB" else 1.0
        else:
            lam = pauli.state_similarity(h, (basis.axis, basis.beta))
    return GEPClassification(category, bm, basis.beta, float(lam), float(defectiveness), bool(degenerate),
                             (e_plus, e_minus), note)


def finite_size_lambda_curve(family: Callable[[int], SystemSpec], sizes: Iterable[int]) -> list[tuple[int, float]]:
    """State similarity at each size, using the Gram matrix of that size's basis."""
    out = []
    for n in sizes:
        member = family(n)
        out.append((int(n), float(pauli.state_similarity(member.hamiltonian, (member.basis.axis, member.basis.beta)))))
    return out
