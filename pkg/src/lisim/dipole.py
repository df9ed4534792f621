"""Coupling between z-oriented short dipoles and array/user geometry builders.

All antennas are modeled as identical infinitesimal dipoles carrying a uniform
current along z.  The dipole length is chosen so that the radiation resistance
of an isolated element is exactly 1 ohm, which makes every impedance in the
simulator dimensionless for practical purposes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

# CODATA value of the free-space wave impedance, ohms.
FREE_SPACE_IMPEDANCE = 376.730313668


@dataclass(frozen=True)
class PhysicalConfig:
    """Wavelength, wavenumber and the normalized dipole length.

    ``dipole_length=None`` selects l = sqrt(3*lambda/(k*eta)) so that the
    self-resistance k*l^2*eta/(3*lambda) equals 1 ohm.
    """

    wavelength: float = 1.0
    dipole_length: float | None = None
    eta: float = field(default=FREE_SPACE_IMPEDANCE, init=False)

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ConfigError(f"wavelength must be positive, got {self.wavelength}")
        if self.dipole_length is not None and self.dipole_length <= 0:
            raise ConfigError(f"dipole length must be positive, got {self.dipole_length}")

    @property
    def k(self) -> float:
        return 2.0 * np.pi / self.wavelength

    @property
    def l(self) -> float:
        if self.dipole_length is not None:
            return self.dipole_length
        return float(np.sqrt(3.0 * self.wavelength / (self.k * self.eta)))


def self_impedance_real(phys: PhysicalConfig) -> float:
    """Radiation resistance of an isolated dipole, the r -> 0 limit of Re{z(r)}."""
    return phys.k * phys.l**2 * phys.eta / (3.0 * phys.wavelength)


def _sin_minus_scos_over_s2(s):
    """(sin s - s cos s) / s^2, series-evaluated near 0 to avoid cancellation."""
    s = np.asarray(s, dtype=float)
    small = s < 0.5
    ss = np.where(small, s, 1.0)
    series = ss * (
        1.0 / 3.0
        + ss**2 * (-1.0 / 30.0 + ss**2 * (1.0 / 840.0 + ss**2 * (-1.0 / 45360.0 + ss**2 / 3991680.0)))
    )
    sl = np.where(small, 1.0, s)
    return np.where(small, series, (np.sin(sl) - sl * np.cos(sl)) / sl**2)


def mutual_impedance(r, phys: PhysicalConfig):
    """Mutual impedance z(r) between two z-oriented dipoles separated by r.

    z(r) = i l^2 eta e^{-ikr} / (2 lambda r) *
           (1 - z^2/r^2 - i/(kr) - 1/(kr)^2 + 3iz^2/(k r^3) + 3z^2/(k^2 r^4)),
    evaluated in a real/imaginary split so that Re{z} stays accurate down to
    kr ~ 1e-6 where the naive form loses ~1/(kr)^2 digits to cancellation.

    ``r`` is a cartesian vector of shape (3,) or an array of vectors (..., 3);
    the result has shape r.shape[:-1].  Singular at r = 0: the self term must
    come from :func:`self_impedance_real` instead.
    """
    r = np.asarray(r, dtype=float)
    rn = np.linalg.norm(r, axis=-1)
    if np.any(rn == 0.0):
        raise ConfigError("self-impedance requested; use self_impedance_real")
    k, lam, l, eta = phys.k, phys.wavelength, phys.l, phys.eta
    zeta = r[..., 2] ** 2 / rn**2
    s = k * rn
    scale = l**2 * eta / (2.0 * lam * rn)
    sin_s, cos_s = np.sin(s), np.cos(s)
    # parenthesis split as A - iB:  A = (1-zeta) - (1-3 zeta)/s^2,  B = (1-3 zeta)/s
    re = scale * ((1.0 - zeta) * sin_s - (1.0 - 3.0 * zeta) * _sin_minus_scos_over_s2(s))
    im = scale * ((1.0 - zeta) * cos_s - (1.0 - 3.0 * zeta) * (cos_s + s * sin_s) / s**2)
    out = re + 1j * im
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class Geometry:
    """Positions of the N LIS elements (on the yz-plane) and the M users."""

    lis_positions: np.ndarray  # (N, 3)
    ue_positions: np.ndarray  # (M, 3)

    def __post_init__(self):
        lis = np.atleast_2d(np.asarray(self.lis_positions, dtype=float))
        ue = np.atleast_2d(np.asarray(self.ue_positions, dtype=float))
        object.__setattr__(self, "lis_positions", lis)
        object.__setattr__(self, "ue_positions", ue)
        if lis.shape[0] < 1 or lis.shape[1] != 3:
            raise ConfigError("need at least one LIS position of dimension 3")
        if ue.shape[0] < 1 or ue.shape[1] != 3:
            raise ConfigError("need at least one UE position of dimension 3")
        if np.any(lis[:, 0] != 0.0):
            raise ConfigError("LIS positions must lie in the yz-plane (x = 0)")
        allpos = np.vstack([lis, ue])
        diff = allpos[:, None, :] - allpos[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(dist, np.inf)
        if np.any(dist == 0.0):
            raise ConfigError("coincident positions in geometry")

    @property
    def n_lis(self) -> int:
        return self.lis_positions.shape[0]

    @property
    def n_ue(self) -> int:
        return self.ue_positions.shape[0]


def _line(length: float, count: int) -> np.ndarray:
    # endpoint-inclusive uniform grid, spacing length/(count-1), centered at 0
    return np.linspace(-length / 2.0, length / 2.0, count)


def linear_array(length: float, count: int) -> np.ndarray:
    """Uniform y-axis array of ``count`` elements spanning ``length``, centered at origin."""
    if count < 2:
        raise ConfigError(f"linear array needs at least 2 elements, got {count}")
    if length <= 0:
        raise ConfigError(f"array length must be positive, got {length}")
    pos = np.zeros((count, 3))
    pos[:, 1] = _line(length, count)
    return pos


def planar_array(len_y: float, len_z: float, count_y: int, count_z: int) -> np.ndarray:
    """Rectangular endpoint-inclusive grid in the yz-plane, centered at origin."""
    if count_y < 2 or count_z < 2:
        raise ConfigError(f"planar array needs counts >= 2, got {count_y}x{count_z}")
    if len_y <= 0 or len_z <= 0:
        raise ConfigError("planar array side lengths must be positive")
    ys = _line(len_y, count_y)
    zs = _line(len_z, count_z)
    yy, zz = np.meshgrid(ys, zs, indexing="ij")
    pos = np.zeros((count_y * count_z, 3))
    pos[:, 1] = yy.ravel()
    pos[:, 2] = zz.ravel()
    return pos


def ue_line(distance_x: float, length: float, count: int) -> np.ndarray:
    """``count`` users at x = distance_x, z = 0, on a centered y-segment of ``length``."""
    if count < 1:
        raise ConfigError(f"need at least one UE, got {count}")
    if distance_x <= 0:
        raise ConfigError(f"UE distance must be positive, got {distance_x}")
    pos = np.zeros((count, 3))
    pos[:, 0] = distance_x
    if count > 1:
        if length <= 0:
            raise ConfigError("UE line length must be positive for count > 1")
        pos[:, 1] = _line(length, count)
    return pos
