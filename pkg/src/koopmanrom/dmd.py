"""Companion-matrix dynamic mode decomposition.

The last snapshot of the shifted pair is fit as a linear combination of
its predecessors (least squares via QR; the normal equations would
squander precision on these notoriously ill-conditioned bases).  The
combination coefficients fill the last column of a companion matrix
whose eigenvalues approximate the spectrum of the underlying evolution
operator; modes are the snapshot-basis images of its eigenvectors.

Reconstruction indexing: with amplitudes fit to the first snapshot,
``reconstruct(dec, subset, i)`` approximates the i-th snapshot (1-based,
so i = 1 is the first column of the source matrix).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import EigenFailure, IndexOutOfRange, RankDeficient
from .snapshots import ShiftedPair, SnapshotMatrix

_RANK_RTOL = 1e-12


@dataclass(frozen=True)
class CompanionFit:
    """Least-squares combination coefficients and their companion matrix."""

    coefficients: np.ndarray    # c, shape (Nt,)
    companion: np.ndarray       # S, shape (Nt, Nt)
    residual_norm: float


@dataclass
class DmdDecomposition:
    """Eigenvalues, continuous exponents, unit modes and amplitudes.

    exponents[j] = log(lambdas[j]) / dt on the principal branch, so the
    imaginary part (the frequency) lies in (-pi/dt, pi/dt].
    """

    lambdas: np.ndarray         # complex, shape (m,)
    exponents: np.ndarray       # complex, shape (m,)
    modes: np.ndarray           # complex, shape (Nx, m), unit 2-norm columns
    dt: float
    amplitudes: Optional[np.ndarray] = field(default=None)


def _qr_solve(basis: np.ndarray, target: np.ndarray, what: str) -> np.ndarray:
    """Least-squares solve via economic QR with a hard rank gate."""
    q, r = np.linalg.qr(basis)
    sv = np.linalg.svd(r, compute_uv=False)
    rank = int(np.sum(sv > _RANK_RTOL * sv[0])) if sv.size else 0
    if rank < basis.shape[1]:
        raise RankDeficient(rank, basis.shape[1], what=what)
    return scipy.linalg.solve_triangular(r, q.conj().T @ target)


def fit_companion(pair: ShiftedPair) -> CompanionFit:
    """Fit the last snapshot as a combination of all previous ones.

    Minimizes ||u_Nt - V0 c||_2, which makes the residual orthogonal to
    the span of the previous snapshots.  Raises RankDeficient when V0
    does not have full column rank at relative tolerance 1e-12.
    """
    v0 = pair.v0
    if v0.shape[0] < v0.shape[1]:
        raise ValueError(
            f"V0 is underdetermined: {v0.shape[0]} rows < {v0.shape[1]} columns")
    u_last = pair.v1[:, -1]
    c = _qr_solve(v0, u_last, what="V0")
    nt = v0.shape[1]
    companion = np.zeros((nt, nt))
    if nt > 1:
        companion[np.arange(1, nt), np.arange(nt - 1)] = 1.0
    companion[:, -1] = c
    residual = float(np.linalg.norm(u_last - v0 @ c))
    return CompanionFit(coefficients=c, companion=companion, residual_norm=residual)


def eigendecompose(fit: CompanionFit, pair: ShiftedPair, dt: float) -> DmdDecomposition:
    """Eigen-decompose the companion matrix and map eigenvectors to modes.

    Mode j is V0 z_j normalized to unit 2-norm with its largest-magnitude
    entry rotated to the positive real axis, which pins the phase and
    keeps conjugate eigenvector pairs exactly conjugate.
    """
    try:
        lambdas, z = np.linalg.eig(fit.companion)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    modes = pair.v0 @ z
    norms = np.linalg.norm(modes, axis=0)
    if np.any(norms == 0.0):
        raise EigenFailure("eigenvector mapped to a zero mode")
    modes = modes / norms
    lead = modes[np.argmax(np.abs(modes), axis=0), np.arange(modes.shape[1])]
    modes = modes * (np.abs(lead) / lead)
    with np.errstate(divide="ignore", invalid="ignore"):
        exponents = np.log(lambdas) / dt
    return DmdDecomposition(lambdas=lambdas, exponents=exponents, modes=modes, dt=dt)


def compute_amplitudes(dec: DmdDecomposition, matrix: SnapshotMatrix) -> np.ndarray:
    """Least-squares projection of the first snapshot onto the modes.

    Stores the result on ``dec`` and returns it.
    """
    a = _qr_solve(dec.modes, matrix.data[:, 0].astype(complex), what="mode matrix")
    dec.amplitudes = a
    return a


def reconstruct(dec: DmdDecomposition, subset: Sequence[int], i: int) -> np.ndarray:
    """Real part of sum_j a_j lambda_j^(i-1) phi_j over the subset.

    For a conjugate-closed subset the imaginary residue is roundoff.
    ``i`` is the 1-based snapshot index; i = 1 applies no eigenvalue
    power and targets the snapshot the amplitudes were fit to.
    """
    if dec.amplitudes is None:
        raise ValueError("amplitudes not computed; call compute_amplitudes first")
    idx = np.asarray(list(subset), dtype=int)
    if idx.size == 0:
        raise IndexOutOfRange("empty mode subset")
    if i < 1:
        raise IndexOutOfRange(f"snapshot index {i} < 1")
    m = dec.lambdas.shape[0]
    if np.any(idx < 0) or np.any(idx >= m):
        raise IndexOutOfRange(f"mode index outside [0, {m})")
    coef = dec.amplitudes[idx] * dec.lambdas[idx] ** (i - 1)
    return (dec.modes[:, idx] @ coef).real


def conjugate_groups(lambdas: np.ndarray, rtol: float = 1e-10) -> list[list[int]]:
    """Partition mode indices into conjugate pairs and real singletons.

    A pair is two unused indices whose eigenvalues are mutual conjugates
    within ``rtol`` (relative to the eigenvalue magnitude); eigenvalues
    with negligible imaginary part stand alone.
    """
    n = lambdas.shape[0]
    used = np.zeros(n, dtype=bool)
    groups: list[list[int]] = []
    for j in range(n):
        if used[j]:
            continue
        lam = lambdas[j]
        scale = max(abs(lam), 1.0)
        if abs(lam.imag) <= rtol * scale:
            groups.append([j])
            used[j] = True
            continue
        partner = -1
        best = rtol * scale
        for k in range(n):
            if k == j or used[k]:
                continue
            d = abs(lambdas[k] - np.conj(lam))
            if d <= best:
                partner = k
                best = d
        if partner >= 0:
            groups.append([j, partner])
            used[j] = True
            used[partner] = True
        else:
            groups.append([j])
            used[j] = True
    return groups


__all__ = [
    "CompanionFit", "DmdDecomposition",
    "fit_companion", "eigendecompose", "compute_amplitudes", "reconstruct",
    "conjugate_groups",
]
