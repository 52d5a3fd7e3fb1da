"""Reproduction pipelines for the two study figures.

These functions compute plain arrays; the CLI handles serialization.
The oscillator study sweeps protocol durations and assembles, per
duration, the work-moment series, the time-averaged excess fluctuation
and the pieces of the speed-limit chain.  The Ising study produces the
excess-fluctuation trajectories across the critical point and the
finite-size scaling fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from . import ising
from .fitting import FitResult, fit_power_law
from .geometry import bures_length, evolved_density, path_lengths
from .oscillator import HOConfig, HarmonicOscillator
from .workstats import (ensemble_energy_variance, excess_variance_direct,
                        excess_variance_geometric, mean_work, model_ensemble,
                        variance_work, work_distribution)


@dataclass(frozen=True)
class TauSummary:
    """Speed-limit quantities for one protocol duration."""

    tau: float
    avg_excess_dev: float
    avg_energy_dev: float
    bound_from_excess: float
    bound_from_energy: float
    equality_residual: float
    ordering_ok: bool


@dataclass(frozen=True)
class HoFigure1Data:
    mean_series: dict[str, np.ndarray]
    variance_series: dict[str, np.ndarray]
    excess_series: dict[str, np.ndarray]
    tau_table: list[TauSummary]
    fit: FitResult | None
    ell: float
    eta_len: float
    bures_len: float
    passed: bool

    def summary(self) -> dict:
        return {
            "ell": self.ell,
            "eta_length": self.eta_len,
            "bures_length": self.bures_len,
            "fit": self.fit.as_dict() if self.fit is not None else None,
            "max_equality_residual": max(
                (row.equality_residual for row in self.tau_table), default=0.0),
            "ordering_ok": all(row.ordering_ok for row in self.tau_table),
            "per_tau": [
                {
                    "tau": row.tau,
                    "avg_excess_dev": row.avg_excess_dev,
                    "avg_energy_dev": row.avg_energy_dev,
                    "bound_from_excess": row.bound_from_excess,
                    "bound_from_energy": row.bound_from_energy,
                    "equality_residual": row.equality_residual,
                    "ordering_ok": row.ordering_ok,
                }
                for row in self.tau_table
            ],
            "passed": self.passed,
        }


def _moments_along_grid(model, ensemble, grid, *, want_geometric):
    rows = {
        "t": grid,
        "mean_cd": np.empty_like(grid),
        "mean_ad": np.empty_like(grid),
        "var_cd": np.empty_like(grid),
        "var_ad": np.empty_like(grid),
        "excess_direct": np.empty_like(grid),
        "excess_geometric": np.full_like(grid, np.nan),
        "energy_variance_cd": np.empty_like(grid),
    }
    for i, t in enumerate(grid):
        cd = work_distribution(model, ensemble, t, "cd")
        ad = work_distribution(model, ensemble, t, "adiabatic")
        rows["mean_cd"][i] = mean_work(cd)
        rows["mean_ad"][i] = mean_work(ad)
        rows["var_cd"][i] = variance_work(cd)
        rows["var_ad"][i] = variance_work(ad)
        rows["excess_direct"][i] = rows["var_cd"][i] - rows["var_ad"][i]
        if want_geometric:
            rows["excess_geometric"][i] = excess_variance_geometric(
                model, ensemble, t)
        rows["energy_variance_cd"][i] = ensemble_energy_variance(
            model, ensemble, t).variance_cd
    return rows


def ho_figure1_data(*, omega_i: float = 1.0, omega_f: float = 3.0,
                    beta: float = 1.0, tau: float = 0.8,
                    tau_list=None, dim: int = 120, grid_points: int = 401,
                    equality_tol: float = 1e-6) -> HoFigure1Data:
    """Oscillator study: work moments, excess fluctuations and the
    duration bound chain across a list of protocol durations."""
    if tau_list is None:
        tau_list = [round(0.2 * k, 10) for k in range(1, 16)]
    tau_list = sorted(set(float(x) for x in tau_list) | {float(tau)})

    mean_series = variance_rows = excess_series = None
    var_blocks = {"tau": [], "t": [], "var_cd": [], "var_ad": []}
    tau_table = []
    ell = eta = bures = None
    trivial = omega_f == omega_i

    for tau_k in tau_list:
        config = HOConfig(omega_i, omega_f, tau_k, dim=dim)
        model = HarmonicOscillator(config)
        ensemble = model_ensemble(model, beta)
        grid = np.linspace(0.0, tau_k, grid_points)
        is_panel = math.isclose(tau_k, tau)
        rows = _moments_along_grid(model, ensemble, grid,
                                   want_geometric=is_panel)
        var_blocks["tau"].append(np.full_like(grid, tau_k))
        var_blocks["t"].append(grid)
        var_blocks["var_cd"].append(rows["var_cd"])
        var_blocks["var_ad"].append(rows["var_ad"])
        if is_panel:
            mean_series = {k: rows[k] for k in ("t", "mean_cd", "mean_ad")}
            excess_series = {k: rows[k] for k in
                             ("t", "var_cd", "var_ad", "excess_direct",
                              "excess_geometric")}
        if ell is None:
            eta, ell = path_lengths(model, ensemble)
            bures = bures_length(evolved_density(model, ensemble, 0.0),
                                 evolved_density(model, ensemble, tau_k))
        avg_excess = float(simpson(np.sqrt(np.clip(rows["excess_direct"], 0, None)),
                                   x=grid)) / tau_k
        avg_energy = float(simpson(np.sqrt(np.clip(rows["energy_variance_cd"], 0, None)),
                                   x=grid)) / tau_k
        if trivial:
            tau_table.append(TauSummary(tau_k, avg_excess, avg_energy,
                                        0.0, 0.0, 0.0, True))
            continue
        bound_excess = bures / avg_excess
        bound_energy = bures / avg_energy
        residual = abs(tau_k * avg_excess - ell) / ell
        ordering = (tau_k >= bound_excess * (1 - 1e-12)
                    and bound_excess >= bound_energy * (1 - 1e-12))
        tau_table.append(TauSummary(tau_k, avg_excess, avg_energy,
                                    bound_excess, bound_energy, residual,
                                    ordering))

    variance_rows = {k: np.concatenate(v) for k, v in var_blocks.items()}
    fit = None
    if not trivial and len(tau_table) >= 3:
        fit = fit_power_law(np.array([r.tau for r in tau_table]),
                            np.array([r.avg_excess_dev for r in tau_table]))
    passed = all(r.ordering_ok for r in tau_table) and all(
        r.equality_residual <= equality_tol for r in tau_table)
    return HoFigure1Data(mean_series, variance_rows, excess_series,
                         tau_table, fit, ell, eta, bures, passed)


@dataclass(frozen=True)
class IsingFigure2Data:
    trajectories: dict[str, np.ndarray]
    scaling: ising.CriticalScaling | None
    trajectory_sites: int

    def summary(self) -> dict:
        out = {"trajectory_sites": self.trajectory_sites}
        if self.scaling is None:
            out["scaling"] = None
        else:
            out["scaling"] = {
                "alpha": self.scaling.alpha,
                "alpha_stderr": self.scaling.alpha_stderr,
                "residual_rms": self.scaling.residual_rms,
                "n_values": [int(n) for n in self.scaling.n_values],
                "integrals": list(self.scaling.integrals),
                "passed": self.scaling.residual_rms
                < ising.CriticalScaling.MAX_RESIDUAL,
            }
        return out


def ising_figure2_data(*, n_list=None, delta: float = 1.0, tau_list=None,
                       grid_points: int = 401,
                       trajectory_sites: int = 64) -> IsingFigure2Data:
    """Ising study: excess-fluctuation trajectories across the critical
    point and the finite-size scaling of the time-integrated cost."""
    if n_list is None:
        n_list = [32, 64, 128, 256, 512, 1024]
    if tau_list is None:
        tau_list = [0.5, 1.0, 2.0]
    blocks = {"tau": [], "t": [], "lam": [], "excess_variance": [],
              "excess_dev": []}
    for tau_k in sorted(set(float(x) for x in tau_list)):
        config = ising.IsingConfig(trajectory_sites, delta, tau_k)
        grid = np.linspace(0.0, tau_k, grid_points)
        traj = ising.cd_excess_trajectory(config, grid)
        blocks["tau"].append(np.full_like(grid, tau_k))
        blocks["t"].append(grid)
        blocks["lam"].append(traj.lam)
        blocks["excess_variance"].append(traj.excess_variance)
        blocks["excess_dev"].append(traj.excess_dev)
    trajectories = {k: np.concatenate(v) for k, v in blocks.items()}
    scaling = None
    if len(set(int(n) for n in n_list)) >= 5:
        scaling = ising.scaling_fit(n_list, delta)
    return IsingFigure2Data(trajectories, scaling, trajectory_sites)
