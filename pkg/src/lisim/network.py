"""Multiport impedance assembly, channel matrix and power bookkeeping.

Two current conventions coexist, mirroring the circuit and the MIMO views:
raw currents j are peak phasors and every power carries a 1/2; beamformer
columns are RMS phasors (unit-covariance symbols) and the precoded powers
carry no 1/2.  The two paths are kept in separate functions and never mixed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .dipole import Geometry, PhysicalConfig, mutual_impedance, self_impedance_real
from .errors import ConfigError, NumericalError

# small negative powers from roundoff are clamped; anything below this raises
_POWER_CLAMP = -1e-12


@dataclass(frozen=True)
class ImpedanceSystem:
    """The three coupling blocks plus the per-element self and loss resistances.

    z0 is treated as purely real: with conjugate-matched loads the divergent
    imaginary part of the dipole self-impedance cancels everywhere it would
    appear, so only Re{z0} is ever stored.
    """

    Z_tt: np.ndarray  # (N, N) complex, LIS <-> LIS
    Z_rt: np.ndarray  # (M, N) complex, LIS -> UE
    Z_rr: np.ndarray  # (M, M) complex, UE <-> UE
    z0: float
    r_l: float

    @property
    def n_lis(self) -> int:
        return self.Z_tt.shape[0]

    @property
    def n_ue(self) -> int:
        return self.Z_rr.shape[0]

    def without_ue_coupling(self) -> "ImpedanceSystem":
        """Replace Z_rr by z0*I, i.e. neglect inter-UE coupling."""
        return replace(self, Z_rr=self.z0 * np.eye(self.n_ue, dtype=complex))


@dataclass(frozen=True)
class Constraints:
    """Radiated-power budget, ohmic-loss budget and per-UE noise variance."""

    P_R: float
    P_L: float
    sigma2: float

    def __post_init__(self):
        for name in ("P_R", "P_L", "sigma2"):
            v = getattr(self, name)
            if not v > 0:
                raise ConfigError(f"constraint {name} must be strictly positive, got {v}")


@dataclass(frozen=True)
class ChannelModel:
    """Channel matrix and radiated-resistance matrix derived from an ImpedanceSystem."""

    H: np.ndarray  # (M, N) complex
    R_P: np.ndarray  # (N, N) real symmetric
    scattering_included: bool


def loss_resistance_from_efficiency(e_r: float, z0: float = 1.0) -> float:
    """Per-element loss resistance giving isolated-antenna efficiency e_r = z0/(z0+r_l)."""
    if not (0.0 < e_r <= 1.0):
        raise ConfigError(f"efficiency must be in (0, 1], got {e_r}")
    return z0 * (1.0 - e_r) / e_r


def assemble(geometry: Geometry, phys: PhysicalConfig, r_l: float = 0.0) -> ImpedanceSystem:
    """Build the three impedance blocks from pairwise mutual impedances."""
    if r_l < 0:
        raise ConfigError(f"loss resistance must be non-negative, got {r_l}")
    z0 = self_impedance_real(phys)
    lis = geometry.lis_positions
    ue = geometry.ue_positions

    def block(a, b, diag_self):
        d = a[:, None, :] - b[None, :, :]
        if diag_self:
            out = np.empty((a.shape[0], b.shape[0]), dtype=complex)
            off = ~np.eye(a.shape[0], dtype=bool)
            out[off] = mutual_impedance(d[off], phys)
            out[~off] = z0
            return out
        return mutual_impedance(d, phys)

    Z_tt = block(lis, lis, diag_self=True)
    Z_rr = block(ue, ue, diag_self=True)
    Z_rt = block(ue, lis, diag_self=False)
    return ImpedanceSystem(Z_tt=Z_tt, Z_rt=Z_rt, Z_rr=Z_rr, z0=z0, r_l=r_l)


def _receiver_solve(sys: ImpedanceSystem, rhs: np.ndarray) -> np.ndarray:
    """Solve (Z_rr + z0*I) x = rhs with an ill-conditioning check."""
    A = sys.Z_rr + sys.z0 * np.eye(sys.n_ue)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond):
        raise NumericalError(f"receiver system singular (condition estimate {cond:.3e})")
    if cond > 1e12:
        warnings.warn(
            f"superdirective regime ill-conditioning: receiver condition {cond:.3e}",
            RuntimeWarning,
            stacklevel=3,
        )
    return np.linalg.solve(A, rhs)


def channel_matrix(sys: ImpedanceSystem) -> np.ndarray:
    """H = -(Z_rr + z0*I)^-1 Z_rt, computed by linear solve."""
    return -_receiver_solve(sys, sys.Z_rt)


def radiated_resistance_matrix(sys: ImpedanceSystem, include_scattering: bool = True) -> np.ndarray:
    """Quadratic form for transmitted power; optionally with the UE scattering term."""
    if include_scattering:
        X = _receiver_solve(sys, sys.Z_rt)
        R = np.real(sys.Z_tt - sys.Z_rt.T @ X)
    else:
        R = np.real(sys.Z_tt)
    return (R + R.T) / 2.0


def build_channel(sys: ImpedanceSystem, scattering: bool = True) -> ChannelModel:
    return ChannelModel(
        H=channel_matrix(sys),
        R_P=radiated_resistance_matrix(sys, include_scattering=scattering),
        scattering_included=scattering,
    )


def received_currents(sys: ImpedanceSystem, j_t: np.ndarray) -> np.ndarray:
    """j_r = H j_t for peak-phasor transmit currents."""
    j_t = np.asarray(j_t)
    if j_t.shape != (sys.n_lis,):
        raise ConfigError(f"expected transmit current vector of length {sys.n_lis}, got {j_t.shape}")
    return channel_matrix(sys) @ j_t


def _clamped(p: float, what: str) -> float:
    if p < _POWER_CLAMP:
        raise NumericalError(f"{what} is negative beyond roundoff: {p:.3e}")
    return max(p, 0.0)


def received_power_per_ue(j_r: np.ndarray, z0: float) -> np.ndarray:
    """|j_rm|^2 * z0 / 2 for peak-phasor receive currents."""
    return np.abs(np.asarray(j_r)) ** 2 * z0 / 2.0


def transmit_power(j_t: np.ndarray, R_P: np.ndarray) -> float:
    """j^H R_P j / 2 for peak-phasor transmit currents."""
    j_t = np.asarray(j_t)
    return _clamped(float(np.real(np.vdot(j_t, R_P @ j_t))) / 2.0, "transmit power")


def thermal_loss(j_t: np.ndarray, r_l: float) -> float:
    """r_l * ||j||^2 / 2 for peak-phasor transmit currents."""
    return r_l * float(np.real(np.vdot(j_t, j_t))) / 2.0


def precoded_powers(B: np.ndarray, R_P: np.ndarray, r_l: float) -> tuple[float, float]:
    """(radiated, ohmic-loss) power of beamformer B under unit-covariance symbols.

    RMS convention: no factor 1/2.  With z0 = 1, r_l equals (1 - e_r)/e_r.
    """
    B = np.asarray(B)
    P_t = _clamped(float(np.real(np.einsum("nm,nk,km->", B.conj(), R_P, B))), "radiated power")
    P_l = r_l * float(np.real(np.einsum("nm,nm->", B.conj(), B)))
    return P_t, P_l


def precoded_received_powers(H: np.ndarray, B: np.ndarray, z0: float) -> np.ndarray:
    """Per-UE received power z0 * sum_n |(HB)_mn|^2 under unit-covariance symbols."""
    G = H @ B
    return z0 * np.sum(np.abs(G) ** 2, axis=1)
