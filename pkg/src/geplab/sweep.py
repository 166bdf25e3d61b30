"""Deterministic parameter sweeps over SSH edge-state quantities."""

from __future__ import annotations

import itertools
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import classifier, linalg, pauli, ssh
from .errors import ModelError, reason_code

SSH_KEYS = ("t1", "t2", "gamma", "eps", "N")
DEFAULT_BASE = {"t1": 0.0, "t2": 1.0, "gamma": 0.0, "eps": 0.0, "N": 20}


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    count: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("axis name must be non-empty")
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise ValueError("axis bounds must be finite")
        if self.count < 1:
            raise ValueError("axis count must be positive")
        if self.count == 1 and self.min != self.max:
            raise ValueError("a single-point axis needs min == max")
        if self.count >= 2 and not self.min < self.max:
            raise ValueError("axis needs min < max")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.min)])
        return np.linspace(self.min, self.max, self.count)

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """``NAME:MIN:MAX:COUNT``."""
        parts = text.split(":")
        if len(parts) != 4:
            raise ValueError(f"grid axis must look like NAME:MIN:MAX:COUNT, got {text!r}")
        name, lo, hi, count = parts
        return cls(name, float(lo), float(hi), int(count))


@dataclass(frozen=True)
class Grid:
    axes: tuple[Axis, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise ValueError("grid has no axes")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate axis names")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.count for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def points(self) -> list[dict[str, float]]:
        """Row-major: the first axis varies slowest."""
        names = [a.name for a in self.axes]
        return [dict(zip(names, (float(v) for v in combo)))
                for combo in itertools.product(*(a.values() for a in self.axes))]


@dataclass(frozen=True)
class SweepRecord:
    index: int
    params: dict
    outputs: dict = field(default_factory=dict)
    error: str | None = None
    reason: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


# ------------------------------------------------------------ evaluators

def _ssh_params(params: Mapping) -> ssh.SSHParams:
    merged = {**DEFAULT_BASE, **{k: params[k] for k in SSH_KEYS if k in params}}
    merged["N"] = int(round(merged["N"]))
    return ssh.SSHParams(**merged)


def eval_edge_spectrum(params: Mapping) -> dict:
    e_plus, e_minus, third = ssh.midgap_energies(_ssh_params(params))
    return {"E_plus": e_plus, "E_minus": e_minus, "E_bulk_min": third}


def eval_edge_lambda(params: Mapping) -> dict:
    e = ssh.edge_states_numeric(_ssh_params(params))
    return {"E_plus": e.e_plus, "E_minus": e.e_minus, "lambda": e.lam}


def eval_classify(params: Mapping) -> dict:
    p = _ssh_params(params)
    spec = ssh.effective_edge_hamiltonian(p)
    c = classifier.classify(spec)
    return {
        "category": c.category,
        "E_plus": c.energies[0],
        "E_minus": c.energies[1],
        "lambda": c.lam,
        "beta_m": c.beta_m,
        "beta_b": c.beta_b,
        "defectiveness": c.defectiveness,
    }


def eval_winding(params: Mapping) -> dict:
    w = ssh.winding_number(_ssh_params(params))
    return {"winding": w.value, "criterion_branch": int(w.criterion_branch)}


EVALUATORS: dict[str, Callable[[Mapping], dict]] = {
    "edge-spectrum": eval_edge_spectrum,
    "edge-lambda": eval_edge_lambda,
    "classify": eval_classify,
    "winding": eval_winding,
}

_RECOVERABLE = (ModelError, pauli.ScalarHamiltonianError, pauli.AtGEPError, linalg.ConvergenceError,
                ValueError, ArithmeticError)


def evaluate_point(evaluator: str, index: int, params: dict) -> SweepRecord:
    fn = EVALUATORS[evaluator]
    try:
        return SweepRecord(index, params, fn(params))
    except _RECOVERABLE as exc:
        return SweepRecord(index, params, {}, str(exc), reason_code(exc))


def _evaluate_chunk(args: tuple[str, list[tuple[int, dict]]]) -> list[SweepRecord]:
    evaluator, items = args
    return [evaluate_point(evaluator, i, p) for i, p in items]


def sweep(grid: Grid, evaluator: str, base: Mapping | None = None, workers: int = 1,
          shuffle_seed: int | None = None, chunk_size: int = 16) -> list[SweepRecord]:
    """Evaluate every grid point; records come back in row-major order.

    ``base`` supplies values for parameters that are not grid axes.
    ``shuffle_seed`` randomises execution order (output order is unaffected).
    """
    if evaluator not in EVALUATORS:
        raise ValueError(f"unknown evaluator {evaluator!r}; choose from {sorted(EVALUATORS)}")
    if grid.size == 0:
        raise ValueError("empty grid")
    base = dict(base or {})
    # axis values first so dataset columns lead with the grid coordinates
    items = [(i, {**pt, **{k: v for k, v in base.items() if k not in pt}}) for i, pt in enumerate(grid.points())]
    order = list(items)
    if shuffle_seed is not None:
        random.Random(shuffle_seed).shuffle(order)
    chunks = [(evaluator, order[k:k + chunk_size]) for k in range(0, len(order), chunk_size)]
    results: list[SweepRecord | None] = [None] * len(items)
    if workers <= 1 or len(chunks) == 1:
        done = map(_evaluate_chunk, chunks)
        for batch in done:
            for rec in batch:
                results[rec.index] = rec
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for batch in pool.map(_evaluate_chunk, chunks):
                for rec in batch:
                    results[rec.index] = rec
    return [r for r in results if r is not None]


# ------------------------------------------------------------ phase diagram

@dataclass(frozen=True)
class PhaseDiagram:
    records: list[SweepRecord]
    boundaries: list[dict]


def locus_rows(gammas: Sequence[float], N: int, eps: float, t2: float = 1.0, hidden_numeric: bool = False) -> list[dict]:
    """Per-gamma boundary curves: H-GEP roots, competition and asymptotic transitions."""
    rows = []
    for g in gammas:
        row: dict = {"gamma": float(g)}
        if g == 0:
            rows.append(row)
            continue
        try:
            lo, hi = ssh.h_gep_roots(g, N, eps, t2)
            row.update(h_gep_t1=lo, h_gep_t1_upper=hi)
        except ModelError:
            pass
        try:
            row["hidden_t1_competition"] = ssh.competition_estimate(g, N, eps, t2)
        except ModelError:
            pass
        if abs(g) < abs(t2):
            row["hidden_t1_asymptotic"] = abs(t2) - abs(g)
        if hidden_numeric and "hidden_t1_competition" in row:
            try:
                row["hidden_t1_numeric"] = ssh.locate_hidden_transition(g, N, eps, t2).t1_numeric
            except (ModelError, ValueError):
                pass
        rows.append(row)
    return rows


def phase_diagram(gamma_axis: Axis, t1_axis: Axis, N: int, eps: float, t2: float = 1.0, workers: int = 1,
                  evaluator: str = "classify", hidden_numeric: bool = False) -> PhaseDiagram:
    grid = Grid((gamma_axis, t1_axis))
    records = sweep(grid, evaluator, {"N": N, "eps": eps, "t2": t2}, workers=workers)
    return PhaseDiagram(records, locus_rows(gamma_axis.values(), N, eps, t2, hidden_numeric))


# ------------------------------------------------------------ peach

@dataclass(frozen=True)
class PeachMesh:
    samples: list[pauli.PeachSample]
    symmetry_axis: tuple[float, float, float]
    n_theta: int
    n_phi: int


def peach_mesh(beta_m: float, beta_b: float, n_theta: int = 33, n_phi: int = 65) -> PeachMesh:
    if n_theta < 8 or n_phi < 8:
        raise ValueError("n_theta and n_phi must be at least 8")
    thetas = np.linspace(0.0, math.pi, n_theta)
    phis = np.linspace(0.0, 2 * math.pi, n_phi)
    axis = (0.0, 1.0, 0.0) if beta_b == 0 else (0.0, 0.0, 1.0)
    return PeachMesh(pauli.bloch_peach(beta_m, beta_b, thetas, phis), axis, n_theta, n_phi)
