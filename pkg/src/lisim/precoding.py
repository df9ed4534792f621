"""Transmit beamformers under joint radiated-power and ohmic-loss budgets.

Matched-filter solutions come from the KKT system of the trace-correlation
objective; the dual-constraint case reduces to a scalar root-find in the
multiplier ratio alpha = mu2/mu1.  The WMMSE solver alternates closed-form
beamformer, receive-filter and weight updates with a scaling factor beta that
enforces whichever budget binds.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError
from .network import Constraints, precoded_powers

_REL_SLACK = 1.0 + 1e-12  # single-constraint branch acceptance


@dataclass(frozen=True)
class PrecoderSolution:
    B: np.ndarray  # (N, M), column m is the beam for user m (RMS convention)
    method: str  # "MF-loss" | "MF-radiated" | "MF-dual" | "WMMSE"
    achieved_P_t: float
    achieved_P_l: float
    multipliers: dict = field(default_factory=dict)
    iterations: int = 0
    converged: bool = True


@dataclass(frozen=True)
class ReceiveState:
    """Diagonals of the receive filter A and weight matrix W, and the
    interference-plus-noise terms r_m, at the final WMMSE iterate."""

    a: np.ndarray
    w: np.ndarray
    r: np.ndarray


@dataclass(frozen=True)
class MetricsReport:
    sinr: np.ndarray
    sum_capacity: float
    per_ue_rx_power: np.ndarray
    P_t: float
    P_l: float


def sinr_per_user(H: np.ndarray, B: np.ndarray, sigma2: float) -> np.ndarray:
    """SINR of each user: |<h_m, b_m>|^2 over interference plus noise."""
    if sigma2 <= 0:
        raise ConfigError(f"noise variance must be positive, got {sigma2}")
    G = H @ B
    sig = np.abs(np.diag(G)) ** 2
    interf = np.sum(np.abs(G) ** 2, axis=1) - sig
    return sig / (interf + sigma2)


def sum_capacity(sinr: np.ndarray) -> float:
    return float(np.sum(np.log2(1.0 + np.asarray(sinr))))


def metrics(H, B, R_P, r_l, sigma2, z0: float = 1.0) -> MetricsReport:
    from .network import precoded_received_powers

    rho = sinr_per_user(H, B, sigma2)
    P_t, P_l = precoded_powers(B, R_P, r_l)
    return MetricsReport(
        sinr=rho,
        sum_capacity=sum_capacity(rho),
        per_ue_rx_power=precoded_received_powers(H, B, z0),
        P_t=P_t,
        P_l=P_l,
    )


def mf_loss_constrained(H: np.ndarray, r_l: float, P_L: float, R_P: np.ndarray | None = None) -> PrecoderSolution:
    """B proportional to H^H, scaled so the ohmic loss equals its budget."""
    if r_l <= 0:
        raise ConfigError("loss constraint vacuous for lossless antennas")
    if not np.any(H):
        raise ConfigError("channel matrix is identically zero")
    Hh = H.conj().T
    B = Hh * np.sqrt(P_L / (r_l * np.real(np.einsum("nm,nm->", Hh.conj(), Hh))))
    P_t = np.nan if R_P is None else precoded_powers(B, R_P, r_l)[0]
    P_l = r_l * float(np.real(np.einsum("nm,nm->", B.conj(), B)))
    return PrecoderSolution(B=B, method="MF-loss", achieved_P_t=P_t, achieved_P_l=P_l)


def _warn_conditioning(cond: float):
    if not np.isfinite(cond):
        raise NumericalError(f"radiated-resistance matrix singular (condition {cond:.3e})")
    if cond > 1e12:
        warnings.warn(
            f"superdirective regime ill-conditioning: R_P condition {cond:.3e}",
            RuntimeWarning,
            stacklevel=3,
        )


def _eigh_rp(R_P: np.ndarray):
    lam, Q = np.linalg.eigh(R_P)
    lmax = lam[-1]
    if lmax <= 0:
        raise NumericalError("radiated-resistance matrix is not positive")
    if lam[0] < -1e-8 * lmax:
        raise NumericalError(f"R_P passivity violated: eigenvalue {lam[0]:.3e} (max {lmax:.3e})")
    _warn_conditioning(lmax / max(lam[0], lmax * np.finfo(float).eps))
    return np.maximum(lam, 0.0), Q


def mf_radiated_constrained(H: np.ndarray, R_P: np.ndarray, P_R: float, r_l: float = 0.0) -> PrecoderSolution:
    """B = R_P^-1 H^H scaled so the radiated power equals its budget.

    Inversion uses a truncated eigendecomposition: eigendirections below
    machine precision relative to the largest eigenvalue are roundoff junk in
    the superdirective regime and are dropped, so the budget holds exactly.
    """
    lam, Q = _eigh_rp(R_P)
    G = Q.conj().T @ H.conj().T  # (N, M) in the eigenbasis
    keep = lam >= lam[-1] * np.finfo(float).eps
    inv = np.where(keep, 1.0 / np.where(keep, lam, 1.0), 0.0)
    # Tr{H R_P^+ H^H} = sum |G|^2 / lam over the kept directions
    denom = float(np.sum(np.abs(G) ** 2 * inv[:, None]))
    C = G * inv[:, None] * np.sqrt(P_R / denom)  # beams in the eigenbasis
    B = Q @ C
    # evaluate the budget in the eigenbasis: the quadratic form is a sum of
    # positive terms there, free of the cancellation that makes the direct
    # N x N evaluation unreliable in the superdirective regime
    P_t = float(lam @ np.sum(np.abs(C) ** 2, axis=1))
    P_l = r_l * float(np.real(np.einsum("nm,nm->", B.conj(), B)))
    return PrecoderSolution(B=B, method="MF-radiated", achieved_P_t=P_t, achieved_P_l=P_l)


def mf_dual_ratio(alpha, lam: np.ndarray, weights: np.ndarray, r_l: float):
    """The constraint ratio P_l/P_t of the alpha-parameterized MF family.

    ``weights`` are per-eigenmode channel powers sum_m |(Q^T conj(H_row))|^2;
    the function is monotonically decreasing in alpha > 0.
    """
    d = lam + np.multiply.outer(np.asarray(alpha, dtype=float), r_l * np.ones_like(lam))
    num = r_l * np.sum(weights / d**2, axis=-1)
    den = np.sum(weights * lam / d**2, axis=-1)
    return num / den


def mf_dual(H: np.ndarray, R_P: np.ndarray, r_l: float, P_R: float, P_L: float) -> PrecoderSolution:
    """Matched filter meeting both budgets; falls back to a closed form when
    only one constraint is active."""
    if r_l == 0.0:
        # lossless antennas: the loss budget can never bind
        return mf_radiated_constrained(H, R_P, P_R, r_l)
    if r_l < 0:
        raise ConfigError(f"loss resistance must be non-negative, got {r_l}")

    sol = mf_loss_constrained(H, r_l, P_L, R_P=R_P)
    if sol.achieved_P_t <= P_R * _REL_SLACK:
        return sol
    sol = mf_radiated_constrained(H, R_P, P_R, r_l)
    if sol.achieved_P_l <= P_L * _REL_SLACK:
        return sol

    lam, Q = _eigh_rp(R_P)
    G = Q.conj().T @ H.conj().T
    weights = np.sum(np.abs(G) ** 2, axis=1)
    target = P_L / P_R

    def ratio(alpha):
        return float(mf_dual_ratio(alpha, lam, weights, r_l))

    lo, hi = 0.0, 1.0
    for _ in range(200):
        if ratio(hi) < target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NumericalError("dual-constraint root not bracketed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ratio(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    alpha = 0.5 * (lo + hi)

    d = lam + alpha * r_l
    mu1 = float(np.sqrt(r_l * np.sum(weights / d**2) / (4.0 * P_L)))
    B = Q @ (G / d[:, None]) / (2.0 * mu1)
    P_t, P_l = precoded_powers(B, R_P, r_l)
    return PrecoderSolution(
        B=B,
        method="MF-dual",
        achieved_P_t=P_t,
        achieved_P_l=P_l,
        multipliers={"mu1": mu1, "mu2": alpha * mu1, "alpha": alpha},
    )


def wmmse(
    H: np.ndarray,
    R_P: np.ndarray,
    r_l: float,
    constraints: Constraints,
    max_iter: int = 1000,
    tol: float = 1e-8,
) -> tuple[PrecoderSolution, ReceiveState]:
    """Alternating WMMSE beamformer under both power budgets.

    Starts from identity receive filters and weights; each pass computes the
    regularized beamformer, rescales it onto the binding budget, then refreshes
    the per-user filters a_m, interference terms r_m and weights w_m.
    """
    M, N = H.shape
    P_R, P_L, sigma2 = constraints.P_R, constraints.P_L, constraints.sigma2

    a = np.ones(M, dtype=complex)
    w = np.ones(M)
    r = np.full(M, sigma2)
    B = np.zeros((N, M), dtype=complex)
    cap_prev = None
    converged = False
    n_iter = 0
    alpha1 = alpha2 = beta = 0.0

    if not np.any(H):
        sol = PrecoderSolution(B=B, method="WMMSE", achieved_P_t=0.0, achieved_P_l=0.0)
        return sol, ReceiveState(a=a, w=w, r=r)

    # Work in the eigenbasis of R_P.  The per-iteration beamformer
    #   Bt = (H^H D H + alpha1 R_P + alpha2 r_l I)^-1 H^H diag(conj(a) w),
    # with D = diag(|a|^2 w), is pushed through to an M x M solve:
    #   Bt = R_eff^-1 H^H X,   X = (D S + I_M)^-1 diag(conj(a) w),
    # with S = H R_eff^-1 H^H.  This keeps the beams inside the span of the
    # regularized channel rows, which is what makes the superdirective
    # (near-singular R_P, r_l = 0) regime numerically tractable.
    lam, Q = _eigh_rp(R_P)
    if r_l == 0.0:
        keep = lam >= lam[-1] * np.finfo(float).eps
        lam, Q = lam[keep], Q[:, keep]
    G = Q.conj().T @ H.conj().T  # (K, M), channel in the eigenbasis

    for n_iter in range(1, max_iter + 1):
        t = np.abs(a) ** 2 * w  # diagonal of A^H W A
        alpha1 = sigma2 * float(np.sum(t)) / P_R
        alpha2 = sigma2 * float(np.sum(t)) / P_L if r_l > 0 else 0.0

        d_eff = alpha1 * lam + alpha2 * r_l
        Y = G / d_eff[:, None]  # R_eff^-1 H^H in the eigenbasis
        S = G.conj().T @ Y
        X = np.linalg.solve(t[:, None] * S + np.eye(M), np.diag(np.conj(a) * w))
        W_coef = Y @ X  # Bt in the eigenbasis

        p = np.sum(np.abs(W_coef) ** 2, axis=1)
        P_t_t = float(lam @ p)
        P_l_t = r_l * float(np.sum(p))
        beta_R = np.sqrt(P_R / P_t_t) if P_t_t > 0 else np.inf
        beta_L = np.sqrt(P_L / P_l_t) if (r_l > 0 and P_l_t > 0) else np.inf
        beta = min(beta_R, beta_L)
        if not np.isfinite(beta):
            raise NumericalError(f"WMMSE scaling diverged at iteration {n_iter}")
        W_coef = beta * W_coef

        HB = G.conj().T @ W_coef
        g = np.diag(HB)
        r = sigma2 + np.sum(np.abs(HB) ** 2, axis=1) - np.abs(g) ** 2
        a = np.conj(g) / (np.abs(g) ** 2 + r)
        w = 1.0 + np.abs(g) ** 2 / r

        if not (np.all(np.isfinite(W_coef)) and np.all(np.isfinite(w))):
            raise NumericalError(f"non-finite WMMSE iterate at iteration {n_iter}")

        sig = np.abs(g) ** 2
        cap = sum_capacity(sig / (np.sum(np.abs(HB) ** 2, axis=1) - sig + sigma2))
        if cap_prev is not None and abs(cap - cap_prev) <= tol * max(abs(cap_prev), np.finfo(float).tiny):
            converged = True
            break
        cap_prev = cap

    B = Q @ W_coef
    # budgets evaluated in the eigenbasis (positive-term sums), where the
    # beta rescale made the binding one exact; the direct N x N quadratic
    # form is unreliable under superdirective conditioning
    p = np.sum(np.abs(W_coef) ** 2, axis=1)
    P_t = float(lam @ p)
    P_l = r_l * float(np.sum(p))
    sol = PrecoderSolution(
        B=B,
        method="WMMSE",
        achieved_P_t=P_t,
        achieved_P_l=P_l,
        multipliers={"alpha1": alpha1, "alpha2": alpha2, "beta": float(beta)},
        iterations=n_iter,
        converged=converged,
    )
    return sol, ReceiveState(a=a, w=w, r=r)
