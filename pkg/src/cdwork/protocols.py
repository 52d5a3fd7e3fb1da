"""Smooth parameter paths with analytic derivatives.

A protocol is a map t -> lambda(t) on [0, tau] together with its time
derivative.  All driving paths used by the models switch the drive off
at both ends (zero derivative there), which is what makes the
counterdiabatic auxiliary term vanish at t = 0 and t = tau.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ProtocolError


def _vec(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Protocol:
    """Parameter path lambda(t) in R^P over a fixed duration.

    ``value`` and ``derivative`` accept a scalar time and return an
    array of shape (P,).  Use :meth:`validate` to certify the endpoint
    and consistency contracts numerically.
    """

    value: Callable[[float], np.ndarray]
    derivative: Callable[[float], np.ndarray]
    duration: float
    label: str = field(default="protocol", compare=False)

    @property
    def dimension(self) -> int:
        return self.value(0.0).shape[0]

    @property
    def initial(self) -> np.ndarray:
        return self.value(0.0)

    @property
    def final(self) -> np.ndarray:
        return self.value(self.duration)

    def validate(self, n_nodes: int = 33) -> None:
        """Check endpoint-derivative and value/derivative consistency.

        Raises ProtocolError on violation.  Consistency is checked with
        centered differences at step h = tau * 1e-6; the tolerance leaves
        room for the O(h^2) truncation and the ~eps/h rounding floor.
        """
        tau = self.duration
        if not tau > 0:
            raise ProtocolError("duration must be positive")
        scale = max(np.abs(self.initial).max(), np.abs(self.final).max(), 1.0)
        for t_end in (0.0, tau):
            if np.abs(self.derivative(t_end)).max() > 1e-12 * scale / tau * max(tau, 1.0):
                raise ProtocolError(
                    f"derivative must vanish at t={t_end:g}, got "
                    f"{self.derivative(t_end)}")
        h = tau * 1e-6
        worst = 0.0
        for t in np.linspace(h, tau - h, n_nodes):
            fd = (self.value(t + h) - self.value(t - h)) / (2.0 * h)
            worst = max(worst, np.abs(fd - self.derivative(t)).max())
        if worst > 1e-7 * scale / min(tau, 1.0):
            raise ProtocolError(
                f"value/derivative inconsistency: centered differences "
                f"deviate by {worst:.3g}")


def _smoothstep_protocol(lam_i, lam_f, tau, sigma, dsigma, label) -> Protocol:
    lam_i, lam_f = _vec(lam_i), _vec(lam_f)
    if lam_i.shape != lam_f.shape:
        raise ProtocolError("endpoint shapes differ")
    if not tau > 0:
        raise ProtocolError("duration must be positive")
    span = lam_f - lam_i

    def value(t):
        s = t / tau
        return lam_i + span * sigma(s)

    def derivative(t):
        s = t / tau
        return span * dsigma(s) / tau

    return Protocol(value, derivative, float(tau), label)


def quintic_ramp(lam_i, lam_f, tau) -> Protocol:
    """Fifth-order smoothstep: lam_i + span*(10 s^3 - 15 s^4 + 6 s^5).

    Both the first and second derivatives vanish at the endpoints.
    """
    return _smoothstep_protocol(
        lam_i, lam_f, tau,
        lambda s: s**3 * (10.0 - 15.0 * s + 6.0 * s * s),
        lambda s: 30.0 * s * s * (1.0 - s) ** 2,
        "quintic")


def cubic_ramp(lam_i, lam_f, tau) -> Protocol:
    """Third-order smoothstep: lam_i + span*(3 s^2 - 2 s^3)."""
    return _smoothstep_protocol(
        lam_i, lam_f, tau,
        lambda s: s * s * (3.0 - 2.0 * s),
        lambda s: 6.0 * s * (1.0 - s),
        "cubic")


def log_ramp(omega_i: float, omega_f: float, tau: float) -> Protocol:
    """Quintic-smoothed ramp that is uniform in log-frequency.

    For a frequency-ramped oscillator the per-level metric scales as
    1/omega^2, so constant speed in log(omega) traverses the parameter
    path at constant metric speed away from the smoothed endpoints.
    """
    if omega_i <= 0 or omega_f <= 0:
        raise ProtocolError("frequencies must be positive")
    r = np.log(omega_f / omega_i)

    def value(t):
        s = t / tau
        return _vec(omega_i * np.exp(r * s**3 * (10.0 - 15.0 * s + 6.0 * s * s)))

    def derivative(t):
        s = t / tau
        return value(t) * r * 30.0 * s * s * (1.0 - s) ** 2 / tau

    if not tau > 0:
        raise ProtocolError("duration must be positive")
    return Protocol(value, derivative, float(tau), "log")


def constant_protocol(lam, tau) -> Protocol:
    lam = _vec(lam)
    zero = np.zeros_like(lam)
    return Protocol(lambda t: lam.copy(), lambda t: zero.copy(), float(tau),
                    "constant")
