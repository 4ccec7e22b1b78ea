"""Mode weighting, reconstruction error and leading-mode selection.

Each mode gets a nonnegative weight, the time-quadrature of its
contribution magnitude: w_j = dt * sum_{i=1..Nt} |a_j| |lambda_j|^(i-1).
Modes are then admitted greedily in descending weight order (conjugate
partners together, so reconstructions stay real) until the aggregate
relative reconstruction error drops below the requested threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dmd import DmdDecomposition, conjugate_groups
from .errors import ZeroNormData
from .snapshots import SnapshotMatrix


@dataclass(frozen=True)
class ModeWeight:
    mode_index: int
    weight: float


@dataclass(frozen=True)
class RomModel:
    """A leading-mode subset and the error it achieves.

    ``selected`` is ordered by descending weight (conjugate partners
    adjacent); ``converged`` is False when no prefix reached epsilon, in
    which case all modes are selected and achieved_error is the best
    (full-set) error.
    """

    selected: tuple[int, ...]
    lambdas: np.ndarray
    modes: np.ndarray
    amplitudes: np.ndarray
    n_dmd: int
    achieved_error: float
    epsilon: float
    full_rank: int
    converged: bool


def mode_weights(dec: DmdDecomposition, n_steps: int, dt: float) -> list[ModeWeight]:
    """Weight of every mode over an n_steps reconstruction horizon."""
    if dec.amplitudes is None:
        raise ValueError("amplitudes not computed; call compute_amplitudes first")
    powers = np.abs(dec.lambdas)[None, :] ** np.arange(n_steps)[:, None]
    w = dt * (np.abs(dec.amplitudes)[None, :] * powers).sum(axis=0)
    return [ModeWeight(mode_index=j, weight=float(w[j])) for j in range(w.shape[0])]


def _reconstruction_span(matrix: SnapshotMatrix) -> np.ndarray:
    # snapshots i = 1..Nt (1-based), i.e. all columns but the last: the
    # final snapshot is the fit target and lies outside the expansion
    return matrix.data[:, :-1]


def _vandermonde(lambdas: np.ndarray, n_steps: int) -> np.ndarray:
    return lambdas[:, None] ** np.arange(n_steps)[None, :]


def relative_error(matrix: SnapshotMatrix, dec: DmdDecomposition,
                   subset) -> float:
    """Frobenius-aggregate relative error of the subset reconstruction
    over every reconstructible snapshot."""
    if dec.amplitudes is None:
        raise ValueError("amplitudes not computed; call compute_amplitudes first")
    target = _reconstruction_span(matrix)
    ref = np.linalg.norm(target)
    if ref == 0.0:
        raise ZeroNormData("reference snapshots have zero norm")
    idx = np.asarray(list(subset), dtype=int)
    vand = _vandermonde(dec.lambdas[idx], target.shape[1])
    rec = (dec.modes[:, idx] @ (dec.amplitudes[idx, None] * vand)).real
    return float(np.linalg.norm(target - rec) / ref)


def per_time_errors(matrix: SnapshotMatrix, dec: DmdDecomposition,
                    subset) -> np.ndarray:
    """Relative error of each reconstructed snapshot separately.

    Entry k corresponds to snapshot index i = k + 1 (source column k).
    """
    if dec.amplitudes is None:
        raise ValueError("amplitudes not computed; call compute_amplitudes first")
    target = _reconstruction_span(matrix)
    idx = np.asarray(list(subset), dtype=int)
    vand = _vandermonde(dec.lambdas[idx], target.shape[1])
    rec = (dec.modes[:, idx] @ (dec.amplitudes[idx, None] * vand)).real
    num = np.linalg.norm(target - rec, axis=0)
    den = np.linalg.norm(target, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0.0, num / den, np.inf)
    return out


def _selection_order(dec: DmdDecomposition, weights: np.ndarray) -> list[list[int]]:
    """Conjugate groups sorted by descending weight.

    Ties break toward the lower |frequency|, then the lower index, so
    the ordering is deterministic.
    """
    groups = conjugate_groups(dec.lambdas)
    freq = np.abs(dec.exponents.imag)

    def key(group):
        j = min(group, key=lambda k: (freq[k], k))
        return (-weights[group[0]], freq[j], j)

    return sorted(groups, key=key)


def select_leading_modes(matrix: SnapshotMatrix, dec: DmdDecomposition,
                         epsilon: float) -> RomModel:
    """Admit whole conjugate groups in descending weight order until the
    aggregate relative error reaches epsilon.

    Returns the first (smallest) selection that achieves the threshold;
    if none does, returns all modes flagged as not converged with the
    best error achieved.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if dec.amplitudes is None:
        raise ValueError("amplitudes not computed; call compute_amplitudes first")

    weights = np.array([mw.weight for mw in
                        mode_weights(dec, matrix.n_snapshots - 1, dec.dt)])
    order = _selection_order(dec, weights)

    target = _reconstruction_span(matrix)
    ref = np.linalg.norm(target)
    if ref == 0.0:
        raise ZeroNormData("reference snapshots have zero norm")
    n_steps = target.shape[1]

    selected: list[int] = []
    acc = np.zeros(target.shape, dtype=complex)
    chosen = None
    for group in order:
        idx = np.asarray(group, dtype=int)
        vand = _vandermonde(dec.lambdas[idx], n_steps)
        acc = acc + dec.modes[:, idx] @ (dec.amplitudes[idx, None] * vand)
        selected.extend(group)
        if np.linalg.norm(target - acc.real) / ref <= epsilon:
            # confirm with the batch evaluation the error op reports
            achieved = relative_error(matrix, dec, selected)
            if achieved <= epsilon:
                chosen = (list(selected), achieved, True)
                break
    if chosen is None:
        achieved = relative_error(matrix, dec, selected)
        chosen = (list(selected), achieved, False)

    sel, achieved, converged = chosen
    sel_arr = np.asarray(sel, dtype=int)
    return RomModel(
        selected=tuple(sel),
        lambdas=dec.lambdas[sel_arr],
        modes=dec.modes[:, sel_arr],
        amplitudes=dec.amplitudes[sel_arr],
        n_dmd=len(sel),
        achieved_error=achieved,
        epsilon=epsilon,
        full_rank=dec.lambdas.shape[0],
        converged=converged,
    )


def reduction_percentage(rom: RomModel) -> float:
    """Percentage of modes dropped, truncated to two decimals."""
    if rom.full_rank <= 0:
        raise ValueError("full_rank must be positive")
    pct = 100.0 * (rom.full_rank - rom.n_dmd) / rom.full_rank
    return math.floor(pct * 100.0) / 100.0


__all__ = [
    "ModeWeight", "RomModel",
    "mode_weights", "relative_error", "per_time_errors",
    "select_leading_modes", "reduction_percentage",
]
