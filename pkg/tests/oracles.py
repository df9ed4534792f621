"""Independent reference implementations used only by the test suite.

Everything here is derived from first principles by a different route than
the library takes: the Green's function via the explicit derivative chain,
the finite-dipole impedance via adaptive quadrature, powers via a direct
solve of the full terminated multiport system, and SINR via scalar loops.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import dblquad

from lisim.dipole import Geometry, PhysicalConfig


def greens_zz(r_vec, phys: PhysicalConfig) -> complex:
    """zz-component of the dyadic Green's function for the electric field.

    G_zz = -i eta / (2 lambda) * (g + g_zz'' / k^2) with g = e^{-ikr}/r,
    evaluated through the radial derivative chain rather than the library's
    pre-expanded polynomial form.
    """
    r_vec = np.asarray(r_vec, dtype=float)
    r = float(np.linalg.norm(r_vec))
    k, lam, eta = phys.k, phys.wavelength, phys.eta
    z = r_vec[2]
    e = np.exp(-1j * k * r)
    g = e / r
    g1 = e * (-1j * k / r - 1.0 / r**2)  # dg/dr
    g2 = e * (-(k**2) / r + 2j * k / r**2 + 2.0 / r**3)  # d2g/dr2
    gzz = g2 * (z / r) ** 2 + g1 * (1.0 / r - z**2 / r**3)
    return complex(-1j * eta / (2.0 * lam) * (g + gzz / k**2))


def point_dipole_impedance(r_vec, phys: PhysicalConfig) -> complex:
    """Infinitesimal-dipole mutual impedance as -l^2 G_zz(r)."""
    return -(phys.l**2) * greens_zz(r_vec, phys)


def finite_dipole_impedance(r_vec, phys: PhysicalConfig, length: float | None = None) -> complex:
    """Mutual impedance of two uniform-current dipoles of finite length.

    z = -integral over t, u in [-l/2, l/2]^2 of G_zz(r + (0, 0, u - t)),
    computed with adaptive quadrature to absolute tolerance 1e-10.
    """
    l = phys.l if length is None else length
    r_vec = np.asarray(r_vec, dtype=float)

    def integrand(u, t, part):
        val = greens_zz(r_vec + np.array([0.0, 0.0, u - t]), phys)
        return val.real if part == "re" else val.imag

    half = l / 2.0
    re, _ = dblquad(integrand, -half, half, -half, half, args=("re",), epsabs=1e-10)
    im, _ = dblquad(integrand, -half, half, -half, half, args=("im",), epsabs=1e-10)
    return -(re + 1j * im)


def full_port_blocks(geometry: Geometry, phys: PhysicalConfig):
    """Impedance blocks built element by element with scalar calls."""
    from lisim.dipole import mutual_impedance, self_impedance_real

    z0 = self_impedance_real(phys)

    def blk(a, b):
        out = np.empty((len(a), len(b)), dtype=complex)
        for i, pa in enumerate(a):
            for j, pb in enumerate(b):
                d = np.asarray(pa) - np.asarray(pb)
                out[i, j] = z0 if np.allclose(d, 0.0) else mutual_impedance(d, phys)
        return out

    lis, ue = geometry.lis_positions, geometry.ue_positions
    return blk(lis, lis), blk(ue, lis), blk(ue, ue), z0


def circuit_solve(geometry: Geometry, phys: PhysicalConfig, j_t: np.ndarray):
    """Direct solve of the terminated (N+M)-port system for given LIS currents.

    The N transmit ports are driven with the peak-phasor currents j_t; each
    receive port is closed on the matched load z0, so v_r = -z0 j_r.  Returns
    (j_r, P_source, per-UE received power) where P_source is the total real
    power delivered by the sources, i.e. the radiated power with scattering.
    """
    Z_tt, Z_rt, Z_rr, z0 = full_port_blocks(geometry, phys)
    M = Z_rr.shape[0]
    j_r = np.linalg.solve(Z_rr + z0 * np.eye(M), -Z_rt @ j_t)
    v_t = Z_tt @ j_t + Z_rt.T @ j_r
    p_src = 0.5 * float(np.real(np.vdot(j_t, v_t)))
    p_rx = 0.5 * z0 * np.abs(j_r) ** 2
    return j_r, p_src, p_rx


def sinr_loop(H: np.ndarray, B: np.ndarray, sigma2: float) -> np.ndarray:
    """Per-user SINR with explicit scalar loops."""
    M = H.shape[0]
    out = np.zeros(M)
    for m in range(M):
        sig = abs(np.dot(H[m], B[:, m])) ** 2
        interf = 0.0
        for n in range(M):
            if n != m:
                interf += abs(np.dot(H[m], B[:, n])) ** 2
        out[m] = sig / (interf + sigma2)
    return out


def sum_capacity_loop(sinr) -> float:
    total = 0.0
    for s in np.asarray(sinr).ravel():
        total += np.log2(1.0 + s)
    return float(total)
