"""Gauge-fixed spectra, the counterdiabatic auxiliary term, and exact
unitary propagation for dense Hermitian families.

Internal units: hbar = 1.

The auxiliary term is assembled from the gauge-invariant matrix-element
form

    <m|H1|n> = i <m| dH0/dt |n> / (eps_n - eps_m)      (m != n),

with zero diagonal.  This corresponds to the parallel-transport gauge
<n|d/dt n> = 0 and avoids differentiating eigenvectors numerically.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateGaugeWarning, DegeneracyError,
                     NonHermitianInput, StepNotConverged)


def assert_hermitian(h: np.ndarray, tol: float = 1e-12, what: str = "operator") -> None:
    """Raise NonHermitianInput unless h equals its conjugate transpose
    within ``tol`` in relative Frobenius norm."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NonHermitianInput(f"{what} is not a square matrix")
    scale = np.linalg.norm(h)
    dev = np.linalg.norm(h - h.conj().T)
    if dev > tol * max(scale, 1e-300):
        raise NonHermitianInput(
            f"{what} deviates from Hermiticity by {dev:.3g} (scale {scale:.3g})")


def gauge_fix(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column's phase so its largest-magnitude entry is real
    and positive.  Deterministic: ties resolve to the lowest index."""
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    phases = pivots / np.abs(pivots)
    return vectors / phases[None, :]


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition with ascending eigenvalues and a fixed phase
    gauge on the eigenvector columns."""

    energies: np.ndarray
    states: np.ndarray
    gauge: str = "largest-entry-real-positive"

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    def min_gap(self) -> float:
        return float(np.diff(self.energies).min()) if self.dim > 1 else np.inf


def spectrum(h: np.ndarray, *, check: bool = True,
             degeneracy_tol: float = 1e-9) -> Spectrum:
    """Diagonalize a Hermitian matrix with the fixed phase gauge.

    Emits DegenerateGaugeWarning when two eigenvalues are closer than
    degeneracy_tol times the spectral scale; the gauge is still applied
    deterministically.
    """
    if check:
        assert_hermitian(h)
    energies, vectors = np.linalg.eigh(h)
    scale = max(abs(energies[0]), abs(energies[-1]), 1e-300)
    if energies.shape[0] > 1 and np.diff(energies).min() < degeneracy_tol * scale:
        warnings.warn("near-degenerate eigenvalues: phase gauge fixed but "
                      "unstable under perturbation", DegenerateGaugeWarning,
                      stacklevel=2)
    return Spectrum(energies, gauge_fix(vectors))


def cd_coupling(spec: Spectrum, dh0_dt: np.ndarray, *,
                degeneracy_tol: float = 1e-9,
                coupling_tol: float = 1e-12) -> np.ndarray:
    """Counterdiabatic term from a spectrum and the Hamiltonian velocity.

    Returns H1 in the original basis.  Raises DegeneracyError when a
    near-degenerate pair (gap below degeneracy_tol * spectral scale) is
    coupled by dh0_dt above coupling_tol * ||dh0_dt||; uncoupled
    degenerate pairs contribute zero.
    """
    e, v = spec.energies, spec.states
    m = v.conj().T @ dh0_dt @ v
    gaps = e[None, :] - e[:, None]
    scale = max(abs(e[0]), abs(e[-1]), 1e-300)
    drive_scale = max(np.abs(m).max(), 1e-300)
    tiny = np.abs(gaps) < degeneracy_tol * scale
    np.fill_diagonal(tiny, False)
    if np.any(tiny & (np.abs(m) > coupling_tol * drive_scale)):
        i, j = np.argwhere(tiny & (np.abs(m) > coupling_tol * drive_scale))[0]
        raise DegeneracyError(
            f"drive couples near-degenerate levels {i} and {j} "
            f"(gap {gaps[i, j]:.3g})")
    safe = np.where(np.abs(gaps) < degeneracy_tol * scale, 1.0, gaps)
    h1_eig = 1j * m / safe
    h1_eig[tiny] = 0.0
    np.fill_diagonal(h1_eig, 0.0)
    return v @ h1_eig @ v.conj().T


def cd_auxiliary(h0_at, dh0_dt_at, t: float, **kwargs) -> np.ndarray:
    """H1(t) for the family ``h0_at`` with velocity ``dh0_dt_at``."""
    return cd_coupling(spectrum(h0_at(t)), dh0_dt_at(t), **kwargs)


@dataclass(frozen=True)
class StateTrajectory:
    """States on a time grid; shape (len(times), dim) or
    (len(times), dim, n_columns) for block propagation."""

    times: np.ndarray
    states: np.ndarray
    norm_drift: float
    substeps: int


def _step_block(h_at, psi, t0, t1, substeps, eigh):
    h = (t1 - t0) / substeps
    for j in range(substeps):
        tm = t0 + (j + 0.5) * h
        e, v = eigh(h_at(tm))
        psi = (v * np.exp(-1j * e * h)) @ (v.conj().T @ psi)
    return psi


def _run_grid(h_at, psi0, grid, substeps, eigh):
    states = np.empty((len(grid),) + psi0.shape, dtype=complex)
    states[0] = psi0
    psi = psi0
    for k in range(len(grid) - 1):
        psi = _step_block(h_at, psi, grid[k], grid[k + 1], substeps, eigh)
        states[k + 1] = psi
    return states


def propagate(h_at, psi0, grid, *, tol: float = 1e-8,
              max_refinements: int = 8, eigh=None) -> StateTrajectory:
    """Propagate a state (or a block of column states) through the grid.

    Each substep applies the exact exponential of the midpoint
    Hamiltonian via its spectrum, so every step is exactly unitary.  The
    substep count per grid interval is refined until halving it changes
    the final state by less than ``tol``.  A probe pair (1 and 2
    substeps) fixes the second-order error constant, from which the
    required count is predicted directly instead of doubling all the
    way up.

    ``eigh`` may supply a structure-aware eigensolver (same contract as
    numpy.linalg.eigh; eigenvalue order is irrelevant here).
    """
    grid = np.asarray(grid, dtype=float)
    if grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing and start at 0")
    psi0 = np.asarray(psi0, dtype=complex)
    norms = np.linalg.norm(psi0, axis=0)
    if np.abs(norms - 1.0).max() > 1e-10:
        raise ValueError("initial state must be normalized")
    if eigh is None:
        eigh = np.linalg.eigh

    def state_diff(a, b):
        # halving contract applies to each propagated state separately
        return float(np.linalg.norm(a - b, axis=0).max())

    final_coarse = _run_grid(h_at, psi0, grid, 1, eigh)[-1]
    states = _run_grid(h_at, psi0, grid, 2, eigh)
    diff = state_diff(states[-1], final_coarse)
    substeps = 2
    if diff < tol:
        drift = float(np.abs(np.linalg.norm(states, axis=1) - 1.0).max())
        return StateTrajectory(grid, states, drift, substeps)
    # err(r) ~ c / r^2, so diff(r, 2r) = 0.75 c / r^2; sizing r from the
    # probe keeps the halving contract while skipping the doubling ladder
    error_const = diff / 0.75
    for _ in range(max_refinements):
        predicted = int(np.ceil(np.sqrt(0.75 * error_const / tol)))
        # cap the jump so max_refinements bounds the total work even
        # when the tolerance is unreachable
        target = int(np.clip(predicted, substeps + 1, 64 * substeps))
        final_ref = _run_grid(h_at, psi0, grid, target, eigh)[-1]
        states = _run_grid(h_at, psi0, grid, 2 * target, eigh)
        diff = state_diff(states[-1], final_ref)
        substeps = 2 * target
        if diff < tol:
            drift = float(np.abs(np.linalg.norm(states, axis=1) - 1.0).max())
            return StateTrajectory(grid, states, drift, substeps)
        error_const = diff * target * target / 0.75
    raise StepNotConverged(
        f"final state still moves by {diff:.3g} after {substeps} substeps "
        f"per interval (tol {tol:g})")


@dataclass(frozen=True)
class CertificateReport:
    """Adiabaticity certificate for a set of eigenlevels."""

    levels: np.ndarray
    min_overlap: np.ndarray
    final_fidelity: np.ndarray
    threshold: float
    with_cd: bool
    passed: bool

    def worst(self) -> float:
        return float(min(self.min_overlap.min(), self.final_fidelity.min()))


def transitionless_certificate(model, levels, grid, *, include_cd: bool = True,
                               threshold: float = 1e-6, h1_scale: float = 1.0,
                               tol: float = 1e-8) -> CertificateReport:
    """Propagate eigenlevels of H0(0) and track overlap with the
    instantaneous eigenstates of H0(t).

    PASS requires both the minimum overlap along the grid and the final
    fidelity to reach 1 - threshold for every requested level.  With
    ``include_cd=False`` the bare H0 generates the dynamics (the
    discriminating control).  ``h1_scale`` rescales the auxiliary term,
    which exists solely so that verification can demonstrate that a
    wrong prefactor is caught.
    """
    levels = np.atleast_1d(np.asarray(levels, dtype=int))
    grid = np.asarray(grid, dtype=float)
    spec0 = model.spectrum0_at(0.0)
    psi0 = spec0.states[:, levels]

    if include_cd:
        def h_at(t):
            return model.h0_at(t) + h1_scale * model.h1_at(t)
    else:
        h_at = model.h0_at

    traj = propagate(h_at, psi0, grid, tol=tol,
                     eigh=getattr(model, "fast_eigh", None))
    min_overlap = np.ones(len(levels))
    for i, t in enumerate(grid):
        basis = model.spectrum0_at(t).states[:, levels]
        overlap = np.abs(np.einsum("dn,dn->n", basis.conj(), traj.states[i]))
        min_overlap = np.minimum(min_overlap, overlap)
    final = model.spectrum0_at(grid[-1]).states[:, levels]
    fidelity = np.abs(np.einsum("dn,dn->n", final.conj(), traj.states[-1]))
    passed = bool(min_overlap.min() >= 1.0 - threshold
                  and fidelity.min() >= 1.0 - threshold)
    return CertificateReport(levels, min_overlap, fidelity, threshold,
                             include_cd, passed)
