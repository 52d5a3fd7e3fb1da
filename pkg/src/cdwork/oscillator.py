"""Frequency-ramped harmonic oscillator backend.

The oscillator is represented on a truncated Fock basis built at a fixed
reference frequency, so the basis is time independent and all time
dependence lives in the matrix entries:

    H0(t) = p^2 / 2m + m omega(t)^2 q^2 / 2,
    H1(t) = -(omegadot / 4 omega) (q p + p q).

The reference frequency defaults to sqrt(omega_i * omega_f).  That
choice splits the squeezing between the two ends of the ramp (factor
sqrt(omega_f/omega_i) each way instead of omega_f/omega_i at one end),
which roughly doubles the number of trustworthy levels for a given
truncation.

Also provided: the closed-form eigensystem of the driven oscillator,
the closed-form per-level metric, and the map from a frequency ramp to
effective two-photon Raman drive waveforms for a trapped ion.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial.hermite import hermval
from scipy.linalg import eigh_tridiagonal

from .errors import ConfigError, InvalidDetuning, SupercriticalDrive, ValidityWarning
from .models import ParametrizedModel
from .protocols import Protocol, log_ramp, quintic_ramp
from .spectral import Spectrum, gauge_fix


def ramp(omega_i: float, omega_f: float, tau: float) -> Protocol:
    """Quintic frequency ramp omega_i + delta (10 s^3 - 15 s^4 + 6 s^5)."""
    return quintic_ramp([omega_i], [omega_f], tau)


@dataclass(frozen=True)
class HOConfig:
    """Frequency-ramp parameters and the Fock-space truncation."""

    omega_i: float
    omega_f: float
    tau: float
    dim: int = 120
    mass: float = 1.0
    ramp_kind: str = "quintic"
    reference_frequency: float | None = None

    @property
    def omega_ref(self) -> float:
        if self.reference_frequency is not None:
            return self.reference_frequency
        return math.sqrt(self.omega_i * self.omega_f)

    def protocol(self) -> Protocol:
        if self.ramp_kind == "quintic":
            return ramp(self.omega_i, self.omega_f, self.tau)
        if self.ramp_kind == "log":
            return log_ramp(self.omega_i, self.omega_f, self.tau)
        raise ConfigError(f"unknown ramp kind {self.ramp_kind!r}")

    def max_drive_ratio(self, n_nodes: int = 201) -> float:
        """Largest omegadot^2 / (4 omega^4) along the ramp.  Below one
        the driven oscillator has the closed-form discrete spectrum; at
        or above one the closed-form eigensystem does not exist and the
        truncated basis acts as a regularization of the work statistics.
        """
        proto = self.protocol()
        worst = 0.0
        for t in np.linspace(0.0, self.tau, n_nodes):
            w = proto.value(t)[0]
            wd = proto.derivative(t)[0]
            if w <= 0:
                raise ConfigError(f"omega(t) must stay positive, got {w:g}")
            worst = max(worst, wd * wd / (4.0 * w**4))
        return worst

    def validate(self, n_nodes: int = 201, *, check_drive: bool = True) -> None:
        if self.dim < 40:
            raise ConfigError("Fock dimension must be at least 40")
        if self.omega_i <= 0 or self.omega_f <= 0 or self.tau <= 0:
            raise ConfigError("frequencies and duration must be positive")
        if self.mass <= 0:
            raise ConfigError("mass must be positive")
        ratio = self.max_drive_ratio(n_nodes)
        if check_drive and ratio >= 1.0:
            raise SupercriticalDrive(
                f"drive ratio reaches {ratio:.3g}; the adiabatic "
                "eigensystem does not exist along this ramp")


class HarmonicOscillator(ParametrizedModel):
    """Truncated-Fock engine for the ramped oscillator."""

    truncated = True

    def __init__(self, config: HOConfig):
        # fast ramps are legitimate models (only the closed-form
        # eigensystem needs the subcritical drive), so no drive check here
        config.validate(check_drive=False)
        self.config = config
        d, m, w_ref = config.dim, config.mass, config.omega_ref
        # exact projections of q^2, p^2 and qp+pq onto the truncated
        # space (not products of truncated ladders, whose corner entries
        # are corrupted): diagonal 2n+1, skew coupling sqrt((n+1)(n+2))
        n = np.arange(d, dtype=float)
        skew = np.sqrt((n[:-2] + 1.0) * (n[:-2] + 2.0))
        diag = np.diag(2.0 * n + 1.0)
        cross = np.diag(skew, 2) + np.diag(skew, -2)
        self._q2 = (diag + cross) / (2.0 * m * w_ref)
        self._p2 = (diag - cross) * (m * w_ref / 2.0)
        # q p + p q = i (raise^2 - ladder^2): purely imaginary entries
        self._qp_sym = 1j * (np.diag(skew, -2) - np.diag(skew, 2))
        self._sectors = (np.arange(0, d, 2), np.arange(1, d, 2))
        proto = config.protocol()
        super().__init__(
            proto,
            h0_of=self._h0_of,
            dh0_of=lambda lam: [m * lam[0] * self._q2],
            h1_of=self._h1_at_time,
        )

    def _h0_of(self, lam):
        w = lam[0]
        return self._p2 / (2.0 * self.config.mass) \
            + 0.5 * self.config.mass * w * w * self._q2

    def _h1_at_time(self, t):
        w = self.protocol.value(t)[0]
        wd = self.protocol.derivative(t)[0]
        return self.h1_matrix(w, wd)

    def omega(self, t: float) -> float:
        return float(self.protocol.value(t)[0])

    def omega_dot(self, t: float) -> float:
        return float(self.protocol.derivative(t)[0])

    def h0_matrix(self, omega: float) -> np.ndarray:
        """H0 at an arbitrary frequency, in the fixed reference basis."""
        return self._h0_of(np.array([omega]))

    def h1_matrix(self, omega: float, omega_dot: float) -> np.ndarray:
        """Auxiliary term -(omegadot/4 omega)(q p + p q); couples only
        levels two apart in the reference basis."""
        if omega_dot == 0.0:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return (-omega_dot / (4.0 * omega)) * self._qp_sym

    def fast_eigh(self, h: np.ndarray):
        """Eigendecomposition exploiting the quadratic-Hamiltonian
        structure: h couples only levels two apart, so each parity
        sector is Hermitian tridiagonal, and a diagonal phase rotation
        makes it real.  Eigenvalues are unsorted across sectors.
        """
        d = self.dim
        energies = np.empty(d)
        vectors = np.zeros((d, d), dtype=complex)
        col = 0
        for ix in self._sectors:
            diag = h[ix, ix].real
            off = h[ix[:-1], ix[1:]]
            mags = np.abs(off)
            args = np.where(mags > 0, np.angle(off), 0.0)
            phases = np.exp(-1j * np.concatenate(([0.0], np.cumsum(args))))
            vals, vecs = eigh_tridiagonal(diag, mags)
            block = vecs * phases[:, None] if np.any(args) else vecs
            energies[col:col + len(ix)] = vals
            vectors[np.ix_(ix, np.arange(col, col + len(ix)))] = block
            col += len(ix)
        return energies, vectors

    def _diagonalize(self, h: np.ndarray) -> Spectrum:
        energies, vectors = self.fast_eigh(h)
        order = np.argsort(energies, kind="stable")
        return Spectrum(energies[order], gauge_fix(vectors[:, order]))


def ho_metric(omega: float, n) -> np.ndarray | float:
    """Closed-form per-level metric (n^2 + n + 1) / (8 omega^2) for the
    frequency parameter."""
    n = np.asarray(n, dtype=float)
    out = (n * n + n + 1.0) / (8.0 * omega * omega)
    return out if out.ndim else float(out)


def cd_exact_eigensystem(omega: float, omega_dot: float, n: int,
                         mass: float = 1.0):
    """Closed-form eigenpair of the driven oscillator H0 + H1.

    Returns (E_n, psi_n) where psi_n(q) evaluates the position-space
    eigenfunction: a Hermite polynomial times a Gaussian of effective
    frequency omega sqrt(1 - omegadot^2/4 omega^4), carrying the chirp
    phase exp(i m omegadot q^2 / 4 omega).
    """
    ratio = omega_dot * omega_dot / (4.0 * omega**4)
    if ratio >= 1.0:
        raise SupercriticalDrive(f"drive ratio {ratio:.3g} >= 1")
    root = math.sqrt(1.0 - ratio)
    energy = omega * root * (n + 0.5)
    w_eff = mass * omega * root  # hbar = 1
    norm = (w_eff / math.pi) ** 0.25 / math.sqrt(2.0**n * math.factorial(n))
    coeff = np.zeros(n + 1)
    coeff[n] = 1.0

    def wavefunction(q):
        q = np.asarray(q, dtype=float)
        gauss = np.exp(-0.5 * w_eff * q * q)
        chirp = np.exp(1j * mass * omega_dot * q * q / (4.0 * omega))
        return norm * hermval(np.sqrt(w_eff) * q, coeff) * gauss * chirp

    return energy, wavefunction


@dataclass(frozen=True)
class IonConfig:
    """Trapped-ion parameters for the Raman realization of the ramp.

    The two-photon processes are characterized by the sideband detuning
    nu; delta_raman and delta_spin are the detunings to the excited and
    spin states whose adiabatic elimination produces the effective
    quadratic Hamiltonian, valid while
    delta_spin >> lamb_dicke * Omega1 * Omega2 / delta_raman.
    """

    nu: float
    trap_frequency: float | None = None
    mass: float = 1.0
    lamb_dicke: float = 0.1
    delta_raman: float = 1e5
    delta_spin: float = 1e3
    omega_hyperfine: float = 0.0  # bookkeeping only
    omega_excited: float = 0.0    # bookkeeping only
    validity_min: float = 10.0

    @property
    def omega_0(self) -> float:
        return self.nu if self.trap_frequency is None else self.trap_frequency

    @property
    def effective_mass(self) -> float:
        return self.mass * self.omega_0 / self.nu


@dataclass(frozen=True)
class WaveformTable:
    """Time series of the laser drive realizing a frequency ramp."""

    times: np.ndarray
    omega: np.ndarray
    omega_dot: np.ndarray
    potential: np.ndarray       # Omega(t) >= 0, the squeezing drive
    omega_eff1: np.ndarray      # complex: -Omega + i omegadot / 2 omega
    omega_eff2: np.ndarray
    phi3: np.ndarray            # phase of the third Raman beam
    rabi_1: np.ndarray
    rabi_2: np.ndarray
    rabi_3: np.ndarray
    validity_ratio: np.ndarray
    ion: IonConfig = field(compare=False)

    def min_validity(self) -> float:
        return float(self.validity_ratio.min())

    def columns(self) -> dict[str, np.ndarray]:
        return {
            "t": self.times,
            "omega": self.omega,
            "omega_dot": self.omega_dot,
            "Omega": self.potential,
            "re_Omega_eff1": self.omega_eff1.real,
            "im_Omega_eff1": self.omega_eff1.imag,
            "Omega_eff2": self.omega_eff2,
            "validity_ratio": self.validity_ratio,
        }


def ion_waveforms(config: HOConfig, nu: float, *, ion: IonConfig | None = None,
                  grid_points: int = 401) -> WaveformTable:
    """Map a frequency ramp to effective Raman drive waveforms.

    Uses omega = sqrt(nu (nu - 2 Omega)), i.e. Omega = (nu^2 - omega^2)
    / (2 nu), and emits Omega_eff1 = -Omega + i omegadot/(2 omega),
    Omega_eff2 = Omega.  Raises InvalidDetuning when omega(t) exceeds nu
    anywhere (the laser-induced potential would have to flip sign) and
    warns when the adiabatic-elimination validity ratio drops below the
    configured minimum.
    """
    if nu <= 0:
        raise InvalidDetuning("nu must be positive")
    ion = replace(ion, nu=nu) if ion is not None else IonConfig(nu=nu)
    proto = config.protocol()
    times = np.linspace(0.0, config.tau, grid_points)
    omega = np.array([proto.value(t)[0] for t in times])
    omega_dot = np.array([proto.derivative(t)[0] for t in times])
    if np.any(omega * omega > nu * nu):
        raise InvalidDetuning(
            f"omega(t) reaches {omega.max():g} > nu = {nu:g}; the ramp is "
            "not reachable at this sideband detuning")
    potential = (nu * nu - omega * omega) / (2.0 * nu)
    eff1 = -potential + 0.5j * omega_dot / omega
    phi3 = np.arctan2(0.5 * omega_dot / omega, -potential)

    # Raw beam amplitudes: symmetric choice Omega1 = Omega3 fixes the
    # remaining gauge freedom of the two Raman processes.
    eta, delta_r, delta_s = ion.lamb_dicke, ion.delta_raman, ion.delta_spin
    rabi_1 = np.sqrt(np.abs(eff1) * delta_r) / eta
    rabi_3 = rabi_1.copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        rabi_2 = np.where(
            rabi_1 > 0,
            2.0 * delta_r * np.sqrt((nu + delta_s) * np.abs(potential))
            / (eta * np.where(rabi_1 > 0, rabi_1, 1.0)),
            0.0)
    coupling = eta * rabi_1 * rabi_2 / delta_r
    ratio = np.where(coupling > 0, delta_s / np.where(coupling > 0, coupling, 1.0),
                     np.inf)
    if ratio.min() < ion.validity_min:
        warnings.warn(
            f"adiabatic-elimination ratio {ratio.min():.3g} below "
            f"{ion.validity_min:g}", ValidityWarning, stacklevel=2)

    # Round trip: the emitted potential must reproduce omega exactly.
    back = np.sqrt(nu * (nu - 2.0 * potential))
    if np.abs(back - omega).max() > 1e-12 * max(1.0, omega.max()):
        raise AssertionError("waveform round trip failed")
    return WaveformTable(times, omega, omega_dot, potential, eff1,
                         potential.copy(), phi3, rabi_1, rabi_2, rabi_3,
                         ratio, ion)
