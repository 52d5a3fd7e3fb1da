"""Counterdiabatic-driving work statistics, geometric tensors and
speed-limit verification for parametrized quantum systems.

Internal units: hbar = 1, mass defaults to 1.
"""

__version__ = "0.1.0"

from .errors import (CdworkError, ConfigError, DegenerateGaugeWarning,
                     DegeneracyError, InvalidDetuning, NonHermitianInput,
                     NotAState, ProtocolError, QuadratureNotConverged,
                     StepNotConverged, SupercriticalDrive, TruncationError,
                     ValidityWarning)
from .fitting import FitResult, fit_power_law
from .geometry import (GeometricTensor, SpeedLimitReport, bures_fidelity,
                       bures_length, eta_length, evolved_density,
                       fidelity_decay_check, metric_length, path_lengths,
                       qgt, speed_limit_report)
from .models import ParametrizedModel, two_level_model
from .oscillator import (HOConfig, HarmonicOscillator, IonConfig,
                         WaveformTable, cd_exact_eigensystem, ho_metric,
                         ion_waveforms, ramp)
from .protocols import (Protocol, constant_protocol, cubic_ramp, log_ramp,
                        quintic_ramp)
from .quadrature import adaptive_simpson, adaptive_simpson_multi
from .spectral import (CertificateReport, Spectrum, StateTrajectory,
                       assert_hermitian, cd_auxiliary, cd_coupling,
                       propagate, spectrum, transitionless_certificate)
from .workstats import (EnergyFluctuations, ThermalEnsemble, TransitionMatrix,
                        WorkDistribution, ensemble_energy_variance,
                        excess_variance_direct, excess_variance_geometric,
                        identity_check_rowsum, mean_work, model_ensemble,
                        thermal_ensemble, transition_matrix, variance_work,
                        work_distribution)

__all__ = [name for name in dir() if not name.startswith("_")]
