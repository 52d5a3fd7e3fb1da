"""Parametrized Hermitian families: the model interface consumed by the
work-statistics and geometry machinery.

A model bundles a protocol with matrix builders:

    h0_of(lam)  -> H0 at parameter point lam            (required)
    dh0_of(lam) -> [dH0/dlam_mu for each parameter]     (analytic, or a
                   centered-difference fallback is used)
    h1_of(t)    -> closed-form auxiliary term, if the backend has one;
                   otherwise H1 is assembled from the spectrum.

Spectra along the protocol are memoized per time point since every
downstream quantity (transition probabilities, metric tensors, work
moments) reuses them.
"""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from .protocols import Protocol
from .spectral import Spectrum, cd_coupling, spectrum


class ParametrizedModel:
    """Hermitian family H0(lambda(t)) driven along a protocol.

    ``truncated`` marks backends whose matrices are finite sections of
    an infinite operator; work statistics then track how much weight
    strays into the polluted top of the basis.
    """

    truncated = False

    def __init__(self, protocol: Protocol, h0_of, dh0_of=None, h1_of=None,
                 fd_step_scale: float = 1e-5, cache_size: int = 192):
        self.protocol = protocol
        self._h0_of = h0_of
        self._dh0_of = dh0_of
        self._h1_of = h1_of
        self._fd_step = fd_step_scale * protocol.duration
        self._cache: OrderedDict = OrderedDict()
        self._cache_size = cache_size
        self._dim = int(h0_of(protocol.initial).shape[0])

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def tau(self) -> float:
        return self.protocol.duration

    # -- matrix builders ------------------------------------------------
    def h0_at(self, t: float) -> np.ndarray:
        return self._h0_of(self.protocol.value(t))

    def dh0_dlambda_at(self, t: float) -> list[np.ndarray]:
        lam = self.protocol.value(t)
        if self._dh0_of is not None:
            return self._dh0_of(lam)
        out = []
        for mu in range(lam.shape[0]):
            h = max(self._fd_step, 1e-8 * max(abs(lam[mu]), 1.0))
            dlam = np.zeros_like(lam)
            dlam[mu] = h
            out.append((self._h0_of(lam + dlam) - self._h0_of(lam - dlam))
                       / (2.0 * h))
        return out

    def dh0_dt_at(self, t: float) -> np.ndarray:
        lamdot = self.protocol.derivative(t)
        parts = self.dh0_dlambda_at(t)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for mu, part in enumerate(parts):
            if lamdot[mu] != 0.0:
                out += lamdot[mu] * part
        return out

    def h1_at(self, t: float) -> np.ndarray:
        if self._h1_of is not None:
            return self._h1_of(t)
        return cd_coupling(self.spectrum0_at(t), self.dh0_dt_at(t))

    def h_cd_at(self, t: float) -> np.ndarray:
        return self.h0_at(t) + self.h1_at(t)

    # -- cached spectra --------------------------------------------------
    def _diagonalize(self, h: np.ndarray) -> Spectrum:
        """Diagonalization used for cached spectra; backends with known
        structure (banded, sector-split) override this."""
        return spectrum(h, check=False, degeneracy_tol=0.0)

    def _cached(self, kind: str, t: float, builder) -> Spectrum:
        key = (kind, float(t))
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        spec = self._diagonalize(builder(t))
        self._cache[key] = spec
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return spec

    def spectrum0_at(self, t: float) -> Spectrum:
        return self._cached("h0", t, self.h0_at)

    def spectrum_cd_at(self, t: float) -> Spectrum:
        return self._cached("cd", t, self.h_cd_at)


def two_level_model(protocol: Protocol, field=None) -> ParametrizedModel:
    """Avoided-crossing two-level family H0 = lam * sigma_z + sigma_x.

    A closed-form testbed: eigenvalues -+sqrt(1 + lam^2) and auxiliary
    term H1 = -(lamdot / (2 (1 + lam^2))) sigma_y.
    """
    sz = np.diag([1.0, -1.0]).astype(complex)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    if field is None:
        field = sx

    def h0_of(lam):
        return lam[0] * sz + field

    return ParametrizedModel(protocol, h0_of, dh0_of=lambda lam: [sz])
