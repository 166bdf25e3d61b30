"""Nonreciprocal SSH chain: lattice matrices, barred parameters, edge states and loci.

Conventions: sites ordered A1, B1, A2, B2, ...; intracell hopping t1+gamma
from B to A and t1-gamma from A to B; intercell hopping t2; on-site +i*eps
on A and -i*eps on B; open ends.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import linalg, tridiag
from .classifier import BasisSpec, SystemSpec
from .errors import (EdgeSelectionError, ExceptionalLineError, GaplessError, MonotonicityError, NoEdgePairError,
                     NoRootError, UnderflowGuardError)
from .pauli import PauliVector

GAPLESS_TOL = 1e-9
UNDERFLOW_LIMIT = 600.0
EDGE_GAP_FACTOR = 5.0


@dataclass(frozen=True)
class SSHParams:
    t1: float
    t2: float = 1.0
    gamma: float = 0.0
    eps: float = 0.0
    N: int = 20

    def __post_init__(self):
        for name in ("t1", "t2", "gamma", "eps"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.t2 == 0.0:
            raise ValueError("t2 must be non-zero")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError("N must be an integer >= 2")
        object.__setattr__(self, "N", int(self.N))


@dataclass(frozen=True)
class BarParams:
    t1_bar_sq: float
    t1_bar_abs: float
    q0: complex
    q0_divergent: bool
    delta_bar: complex
    log_abs_delta_bar: float
    delta0: float

    @property
    def t1_bar(self) -> complex:
        """sqrt(t1^2 - gamma^2): real, or i times real when negative."""
        return complex(self.t1_bar_abs) if self.t1_bar_sq >= 0 else 1j * self.t1_bar_abs


@dataclass(frozen=True)
class WindingResult:
    value: int
    criterion_branch: bool = False

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True)
class EdgeStates:
    e_plus: complex
    e_minus: complex
    lam: float
    plus: linalg.EigenPair
    minus: linalg.EigenPair
    third_abs: float
    dps: int


@dataclass(frozen=True)
class HiddenTransition:
    t1_numeric: float
    t1_competition: float
    t1_asymptotic: float
    samples: tuple[tuple[float, float], ...]


def bar_parameters(p: SSHParams) -> BarParams:
    t1, g, t2, n = p.t1, p.gamma, p.t2, p.N
    tb_sq = t1 * t1 - g * g
    tb_abs = math.sqrt(abs(tb_sq))
    up, down = t1 + g, t1 - g
    if up == 0.0 and down == 0.0:
        q0, divergent = 0j, False
    elif up == 0.0 or down == 0.0:
        q0, divergent = complex(math.inf if up == 0.0 else -math.inf), True
    else:
        ratio = down / up
        q0 = complex(0.5 * math.log(abs(ratio)), 0.5 * math.pi if ratio < 0 else 0.0)
        divergent = False

    # Delta_bar = (t2^2 - tb^2)/t2 * (tb/t2)^N in log-magnitude / phase form
    pref = (t2 * t2 - tb_sq) / t2
    if tb_abs == 0.0 or pref == 0.0:
        log_abs, delta = -math.inf, 0j
    else:
        log_abs = math.log(abs(pref)) + n * math.log(tb_abs / abs(t2))
        phase = cmath.phase(pref) + n * cmath.phase(complex(tb_abs if tb_sq >= 0 else 0.0,
                                                            0.0 if tb_sq >= 0 else tb_abs) / t2)
        delta = cmath.rect(math.exp(log_abs), phase) if log_abs > -745 else 0j
        if abs(delta.imag) <= 1e-15 * abs(delta):
            delta = complex(delta.real, 0.0)
        elif abs(delta.real) <= 1e-15 * abs(delta):
            delta = complex(0.0, delta.imag)
    delta0 = (t2 * t2 - t1 * t1) / t2 * (-t1 / t2) ** n
    return BarParams(tb_sq, tb_abs, q0, divergent, delta, log_abs, delta0)


def obc_bands(p: SSHParams) -> tridiag.TridiagonalBands:
    n = 2 * p.N
    diag = tuple(1j * p.eps if k % 2 == 0 else -1j * p.eps for k in range(n))
    sup = tuple(complex(p.t1 + p.gamma if k % 2 == 0 else p.t2) for k in range(n - 1))
    sub = tuple(complex(p.t1 - p.gamma if k % 2 == 0 else p.t2) for k in range(n - 1))
    return tridiag.TridiagonalBands(diag, sub, sup)


def build_obc_hamiltonian(p: SSHParams) -> np.ndarray:
    return obc_bands(p).dense()


def build_pbc_hamiltonian(p: SSHParams) -> np.ndarray:
    """Real-space ring: the open chain plus the B_N -> A_1 intercell bond."""
    h = build_obc_hamiltonian(p)
    n = 2 * p.N
    h[n - 1, 0] += p.t2
    h[0, n - 1] += p.t2
    return h


def build_pbc_bloch(p: SSHParams, k: float) -> PauliVector:
    return PauliVector.from_components(p.t1 + p.t2 * math.cos(k), p.t2 * math.sin(k) + 1j * p.gamma, 1j * p.eps)


def skin_gauge(p: SSHParams) -> np.ndarray:
    """Diagonal of D with D^-1 H D symmetric: e^{q0 (n-1)} on A_n, e^{q0 n} on B_n."""
    bar = bar_parameters(p)
    if bar.q0_divergent:
        raise ExceptionalLineError("t1 = +-gamma: the skin gauge is singular")
    cells = np.arange(p.N)
    d = np.empty(2 * p.N, dtype=complex)
    d[0::2] = np.exp(bar.q0 * cells)
    d[1::2] = np.exp(bar.q0 * (cells + 1))
    return d


def build_gauged_hamiltonian(p: SSHParams) -> np.ndarray:
    """Similarity-transformed OBC matrix with symmetric hoppings t1_bar, t2.

    Built directly from the barred hoppings (rather than by multiplying with
    the gauge), so no exponentially large intermediate numbers appear.
    """
    bar = bar_parameters(p)
    if bar.q0_divergent:
        raise ExceptionalLineError("t1 = +-gamma: the skin gauge is singular")
    # (t1 + gamma) e^{q0}, which equals (t1 - gamma) e^{-q0}
    tb = (p.t1 + p.gamma) * cmath.exp(bar.q0)
    n = 2 * p.N
    h = np.zeros((n, n), dtype=complex)
    h[np.arange(0, n, 2), np.arange(0, n, 2)] = 1j * p.eps
    h[np.arange(1, n, 2), np.arange(1, n, 2)] = -1j * p.eps
    for k in range(n - 1):
        val = tb if k % 2 == 0 else p.t2
        h[k, k + 1] = val
        h[k + 1, k] = val
    return h


def _topology_check(p: SSHParams, bar: BarParams) -> None:
    if abs(bar.t1_bar_abs - abs(p.t2)) <= GAPLESS_TOL:
        raise GaplessError(f"|t1_bar| = |t2| within {GAPLESS_TOL:g}: gapless point")
    if bar.t1_bar_abs > abs(p.t2):
        raise NoEdgePairError("|t1_bar| > |t2|: trivial phase has no protected edge pair")


def winding_number(p: SSHParams, k_points: int = 256) -> WindingResult:
    if k_points < 64:
        raise ValueError("k_points must be at least 64")
    bar = bar_parameters(p)
    if abs(bar.t1_bar_abs - abs(p.t2)) <= GAPLESS_TOL:
        raise GaplessError(f"|t1_bar| = |t2| within {GAPLESS_TOL:g}: gapless point")
    if bar.t1_bar_sq < 0:
        return WindingResult(1 if bar.t1_bar_abs < abs(p.t2) else 0, True)
    ks = np.linspace(-math.pi, math.pi, k_points, endpoint=False)
    z = bar.t1_bar_abs + p.t2 * np.exp(1j * ks)
    steps = np.angle(np.roll(z, -1) / z)
    return WindingResult(int(round(float(np.sum(steps)) / (2 * math.pi))), False)


def effective_edge_hamiltonian(p: SSHParams) -> SystemSpec:
    """Two-level edge model Delta_bar sigma_x + i eps sigma_z and its initial basis."""
    bar = bar_parameters(p)
    _topology_check(p, bar)
    h = PauliVector.from_components(bar.delta_bar, 0.0, 1j * p.eps)
    re_q = bar.q0.real
    if re_q == 0.0:
        basis = BasisSpec((0.0, 0.0, 1.0), 0.0, False)
    else:
        basis = BasisSpec((0.0, 0.0, math.copysign(1.0, re_q)), p.N * abs(re_q), True)
    return SystemSpec(h, basis)


def _order_pair(a: complex, b: complex) -> tuple[int, int]:
    scale = max(abs(a), abs(b), 1e-300)
    if abs(a.real - b.real) > 1e-9 * scale:
        return (0, 1) if a.real > b.real else (1, 0)
    return (0, 1) if a.imag >= b.imag else (1, 0)


def _midgap_guesses(p: SSHParams) -> tuple[np.ndarray, float]:
    vals = linalg.eigenvalues(build_gauged_hamiltonian(p))
    order = np.argsort(np.abs(vals))
    vals = vals[order]
    if len(vals) > 2 and abs(vals[2]) < EDGE_GAP_FACTOR * abs(vals[1]):
        raise EdgeSelectionError(
            "midgap pair not separated from the bulk "
            f"(|E3| = {abs(vals[2]):.3g} < {EDGE_GAP_FACTOR:g} |E2| = {abs(vals[1]):.3g})",
            candidates=[complex(v) for v in vals[:4]],
        )
    third = float(abs(vals[2])) if len(vals) > 2 else math.inf
    return vals[:2], third


def midgap_energies(p: SSHParams) -> tuple[complex, complex, float]:
    """(E_plus, E_minus, |E| of the nearest bulk level) in double precision."""
    _topology_check(p, bar_parameters(p))
    guesses, third = _midgap_guesses(p)
    i, j = _order_pair(complex(guesses[0]), complex(guesses[1]))
    return complex(guesses[i]), complex(guesses[j]), third


def edge_states_numeric(p: SSHParams, dps: int | None = None) -> EdgeStates:
    """Midgap pair of the open chain and its state similarity.

    The pair is located on the gauge-symmetrised matrix (same spectrum) and
    then polished on the raw open chain in extended precision, because the
    raw eigenvectors span more decades than double precision holds.
    """
    bar = bar_parameters(p)
    _topology_check(p, bar)
    if bar.q0_divergent:
        raise ExceptionalLineError("t1 = +-gamma: open chain is defective (exceptional line)")
    if bar.t1_bar_abs > 0 and p.N * abs(math.log(bar.t1_bar_abs / abs(p.t2))) > UNDERFLOW_LIMIT:
        raise UnderflowGuardError("N |ln|t1_bar/t2|| exceeds the underflow guard")
    guesses, third = _midgap_guesses(p)
    if p.t1 == 0.0 and p.gamma == 0.0:
        # decoupled dimers: the edge states are the isolated end sites A_1 and B_N
        n = 2 * p.N
        a1, bn = np.zeros(n, dtype=complex), np.zeros(n, dtype=complex)
        a1[0], bn[-1] = 1.0, 1.0
        pa = linalg.EigenPair(1j * p.eps, a1, a1.copy())
        pb = linalg.EigenPair(-1j * p.eps, bn, bn.copy())
        first, second = (pa, pb) if _order_pair(pa.value, pb.value) == (0, 1) else (pb, pa)
        return EdgeStates(first.value, second.value, 0.0, first, second, third, 0)
    bands = obc_bands(p)
    pairs = tridiag.refine_eigenpairs(bands, [complex(g) for g in guesses], dps=dps)
    lam = tridiag.overlap_ratio(pairs[0].right, pairs[1].right, dps=pairs[0].dps)

    eig_pairs = []
    for pr in pairs:
        r = pr.right_array()
        l = pr.left_array()
        s = np.vdot(l, r)
        if abs(s) > linalg.NEAR_EP_RTOL * np.linalg.norm(l):
            eig_pairs.append(linalg.EigenPair(complex(pr.value), r, l / np.conj(s), False))
        else:
            eig_pairs.append(linalg.EigenPair(complex(pr.value), r, l, True))
    i, j = _order_pair(eig_pairs[0].value, eig_pairs[1].value)
    return EdgeStates(eig_pairs[i].value, eig_pairs[j].value, lam, eig_pairs[i], eig_pairs[j], third,
                      pairs[0].dps)


def edge_projection(p: SSHParams) -> linalg.EffectiveHamiltonian:
    """Projected 2x2 edge Hamiltonian in the sublattice-polarised basis.

    Uses the gauge-symmetrised matrix.  Inside the midgap subspace the basis
    is rotated to the eigenvectors of the sublattice operator (A-polarised
    first) and rescaled so the two off-diagonal elements are equal.
    """
    bar = bar_parameters(p)
    _topology_check(p, bar)
    h = build_gauged_hamiltonian(p)
    pairs = linalg.eig(h)
    pairs = sorted(pairs, key=lambda q: abs(q.value))[:2]
    r = np.column_stack([q.right for q in pairs])
    l = np.column_stack([q.left for q in pairs])
    gamma_op = np.where(np.arange(h.shape[0]) % 2 == 0, 1.0, -1.0)
    g_eff = l.conj().T @ (gamma_op[:, None] * r)
    w, u = np.linalg.eig(g_eff)
    u = u[:, np.argsort(-w.real)]
    r2 = r @ u
    l2 = l @ np.linalg.inv(u).conj().T
    m = l2.conj().T @ h @ r2
    if m[0, 1] != 0 and m[1, 0] != 0:
        ratio = np.sqrt(m[1, 0] / m[0, 1])
        r2[:, 1] *= ratio
        l2[:, 1] /= np.conj(ratio)
    basis = [linalg.EigenPair(complex(m[k, k]), r2[:, k], l2[:, k], pairs[k].near_ep) for k in range(2)]
    return linalg.project_effective_hamiltonian(h, basis)


# ---------------------------------------------------------------- loci

def _log_delta_t1_zero(gamma: float, n: int, t2: float) -> float:
    g, t2 = abs(gamma), abs(t2)
    return math.log((t2 * t2 + g * g) / t2) + n * math.log(g / t2)


def solve_m_gep_gamma(N: int, eps: float, t2: float = 1.0) -> float:
    """gamma > 0 on the t1 = 0 line where |Delta_bar| = eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    target = math.log(eps)
    f = lambda g: _log_delta_t1_zero(g, N, t2) - target
    lo, hi = 1e-300, abs(t2) * (1 - 1e-15)
    if f(hi) <= 0:
        raise NoRootError(f"|Delta_bar| < eps on the whole interval (0, |t2|) for N={N}, eps={eps:g}")
    lo = max(lo, abs(t2) * math.exp((target - math.log(2 * abs(t2))) / N) * 1e-3)
    while f(lo) > 0:
        lo *= 1e-3
    return float(brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def _log_delta_real(x: float, n: int, t2: float) -> float:
    t2 = abs(t2)
    return math.log((t2 * t2 - x * x) / t2) + n * math.log(x / t2)


def h_gep_roots(gamma: float, N: int, eps: float, t2: float = 1.0) -> tuple[float, float]:
    """Both t1 > |gamma| with |Delta_bar| = eps (t1_bar real), lower first."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    a2 = abs(t2)
    x_peak = a2 * math.sqrt(N / (N + 2.0))
    target = math.log(eps)
    f = lambda x: _log_delta_real(x, N, t2) - target
    if f(x_peak) <= 0:
        raise NoRootError(f"maximum of |Delta_bar| is below eps (N={N}, eps={eps:g})")
    x_small = 0.5 * x_peak
    while f(x_small) > 0:
        x_small *= 0.5
    x_lo = brentq(f, x_small, x_peak, xtol=1e-15)
    x_hi = brentq(f, x_peak, a2 * (1 - 1e-16), xtol=1e-15)
    g2 = gamma * gamma
    return math.sqrt(x_lo * x_lo + g2), math.sqrt(x_hi * x_hi + g2)


def solve_h_gep_t1(gamma: float, N: int, eps: float, t2: float = 1.0) -> float:
    """Lower t1 root of |Delta_bar(t1)| = eps with real t1_bar."""
    if gamma == 0:
        raise ValueError("gamma must be non-zero")
    return h_gep_roots(gamma, N, eps, t2)[0]


def competition_estimate(gamma: float, N: int, eps: float, t2: float = 1.0) -> float:
    """t1 in (0, |t2| - |gamma|) where max |Delta_bar e^{+-N q0}| = eps.

    That amplitude is |t2^2 - t1_bar^2|/|t2| * ((|t1|+|gamma|)/|t2|)^N.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if gamma == 0:
        raise ValueError("gamma must be non-zero")
    a2, g = abs(t2), abs(gamma)
    if g >= a2:
        raise NoRootError("|gamma| >= |t2|: no topological interval on the t1 > 0 side")
    target = math.log(eps)

    def f(t1: float) -> float:
        pref = abs(a2 * a2 - (t1 * t1 - g * g)) / a2
        return math.log(pref) + N * math.log((abs(t1) + g) / a2) - target

    hi = a2 - g
    if f(0.0) > 0:
        raise NoRootError("transverse term dominates already at t1 = 0")
    return float(brentq(f, 0.0, hi, xtol=1e-14))


def edge_lambda(p: SSHParams) -> float:
    return edge_states_numeric(p).lam


def locate_hidden_transition(gamma: float, N: int, eps: float, t2: float = 1.0,
                             tol: float = 1e-4, half_width: float = 0.1) -> HiddenTransition:
    """Lambda = 1/2 crossing in t1 by bisection, plus the two analytic estimates."""
    if gamma == 0:
        raise ValueError("gamma must be non-zero")
    estimate = competition_estimate(gamma, N, eps, t2)
    asymptotic = abs(t2) - abs(gamma)
    lam = lambda t1: edge_lambda(SSHParams(t1, t2, gamma, eps, N))
    lo = max(estimate - half_width, 1e-6)
    hi = min(estimate + half_width, asymptotic - 1e-6)
    lam_lo, lam_hi = lam(lo), lam(hi)
    samples = [(lo, lam_lo), (hi, lam_hi)]
    if not (lam_lo < 0.5 < lam_hi):
        raise MonotonicityError("Lambda does not cross 1/2 on the bracket", samples)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        value = lam(mid)
        samples.append((mid, value))
        if not (lam_lo <= value <= lam_hi):
            raise MonotonicityError("Lambda not monotone on the bracket", samples)
        if value < 0.5:
            lo, lam_lo = mid, value
        else:
            hi, lam_hi = mid, value
    return HiddenTransition(0.5 * (lo + hi), estimate, asymptotic, tuple(samples))
