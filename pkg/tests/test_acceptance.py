"""End-to-end acceptance checks, one test per numbered criterion.

Each test records a single CRITERION verdict line; the conftest hook prints
them all in the terminal summary so they are visible in any pytest run.
"""

import warnings

import numpy as np
import pytest

import conftest
import oracles
from lisim import report, scenario
from lisim.dipole import Geometry, PhysicalConfig, linear_array, mutual_impedance, planar_array, self_impedance_real, ue_line
from lisim.network import (
    Constraints,
    assemble,
    channel_matrix,
    loss_resistance_from_efficiency,
    radiated_resistance_matrix,
    received_power_per_ue,
    transmit_power,
)
from lisim.precoding import (
    mf_dual,
    mf_dual_ratio,
    mf_loss_constrained,
    mf_radiated_constrained,
    sinr_per_user,
    sum_capacity,
    wmmse,
)

PHYS = PhysicalConfig()
warnings.filterwarnings("ignore", message="superdirective")


def verdict(num: int, ok: bool, desc: str) -> None:
    conftest.record_verdict(num, ok, desc)


@pytest.fixture(scope="module")
def fig2_rows():
    return scenario.run_points(scenario.fig2_points(), threads=4)


@pytest.fixture(scope="module")
def fig3_rows():
    return scenario.run_points(scenario.fig3_points(), threads=4)


def curve(rows, match: dict, x: str, y):
    pts = [r for r in rows if all(r.params[k] == v for k, v in match.items())]
    pts.sort(key=lambda r: r.params[x])
    return np.array([getattr(r, y) if isinstance(y, str) else y(r) for r in pts])


def test_criterion_1_normalization():
    d_self = abs(self_impedance_real(PHYS) - 1.0)
    z = mutual_impedance(np.array([0.0, 1e-6 * PHYS.wavelength, 0.0]), PHYS)
    d_near = abs(z.real - 1.0)
    ok = d_self < 1e-12 and d_near < 1e-6
    verdict(1, ok, f"self-resistance err {d_self:.2e}, near-field Re err {d_near:.2e}")
    assert ok


def test_criterion_2_closed_form_vs_quadrature():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(20):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        r = direction * rng.uniform(0.05, 10.0) * PHYS.wavelength
        want = oracles.finite_dipole_impedance(r, PHYS)
        got = mutual_impedance(r, PHYS)
        worst = max(worst, abs(got - want) / abs(want))
    ok = worst <= 1e-4
    verdict(2, ok, f"worst closed-form vs finite-dipole quadrature rel err {worst:.2e} (tol 1e-4)")
    assert ok


def test_criterion_3_circuit_oracle_equivalence():
    rng = np.random.default_rng(3)
    geometries = [
        Geometry([[0.0, 0.0, 0.0]], ue_line(2.0, 0.0, 1)),
        Geometry(linear_array(0.5, 2), ue_line(2.0, 1.0, 2)),
        Geometry(linear_array(1.0, 3), ue_line(3.0, 2.0, 2)),
        Geometry(linear_array(0.2, 3), ue_line(1.5, 0.4, 2)),
    ]
    worst = 0.0
    for geom in geometries:
        sys_ = assemble(geom, PHYS)
        H = channel_matrix(sys_)
        R_P = radiated_resistance_matrix(sys_)
        n = geom.n_lis
        j_t = rng.normal(size=n) + 1j * rng.normal(size=n)
        j_r, p_src, p_rx = oracles.circuit_solve(geom, PHYS, j_t)
        worst = max(worst, float(np.max(np.abs(H @ j_t - j_r) / np.abs(j_r))))
        worst = max(worst, abs(transmit_power(j_t, R_P) - p_src) / p_src)
        mine = received_power_per_ue(H @ j_t, sys_.z0)
        worst = max(worst, float(np.max(np.abs(mine - p_rx) / p_rx)))
    ok = worst <= 1e-10
    verdict(3, ok, f"worst H/P_t/rx-power deviation from (N+M)-port solve {worst:.2e}")
    assert ok


def test_criterion_4_passivity():
    rng = np.random.default_rng(4)
    worst = np.inf
    for i in range(50):
        if i % 2 == 0:
            n = int(rng.integers(2, 65))
            spacing = rng.uniform(0.05, 0.8)
            lis = linear_array(spacing * (n - 1), n)
        else:
            c = int(rng.integers(2, 9))
            spacing = rng.uniform(0.05, 0.8)
            lis = planar_array(spacing * (c - 1), spacing * (c - 1), c, c)
        m = int(rng.integers(1, 4))
        geom = Geometry(lis, ue_line(rng.uniform(1.0, 20.0), 3.0, m))
        sys_ = assemble(geom, PHYS)
        for scat in (True, False):
            lam = np.linalg.eigvalsh(radiated_resistance_matrix(sys_, scat))
            worst = min(worst, lam[0] / lam[-1])
    ok = worst >= -1e-8
    verdict(4, ok, f"worst min/max eigenvalue ratio of R_P {worst:.2e} over 50 geometries")
    assert ok


def test_criterion_5_mf_constraints():
    geom = Geometry(planar_array(4.0, 4.0, 9, 9), ue_line(2.0, 0.0, 1))
    r_l = loss_resistance_from_efficiency(0.8)
    sys_ = assemble(geom, PHYS, r_l=r_l)
    H = channel_matrix(sys_)
    R_P = radiated_resistance_matrix(sys_)
    sol = mf_dual(H, R_P, r_l, 1.0, 1.0)
    d_t = abs(sol.achieved_P_t - 1.0)
    d_l = abs(sol.achieved_P_l - 1.0)
    both_active = sol.method == "MF-dual" and d_t <= 1e-8 and d_l <= 1e-8
    rad = mf_dual(H, R_P, r_l, 1.0, 1e6)
    rad_ref = mf_radiated_constrained(H, R_P, 1.0, r_l)
    loss = mf_dual(H, R_P, r_l, 1e6, 1.0)
    loss_ref = mf_loss_constrained(H, r_l, 1.0, R_P=R_P)
    branch_dev = max(
        float(np.max(np.abs(rad.B - rad_ref.B) / np.max(np.abs(rad_ref.B)))),
        float(np.max(np.abs(loss.B - loss_ref.B) / np.max(np.abs(loss_ref.B)))),
    )
    branches = branch_dev <= 1e-8
    ok = both_active and branches
    verdict(
        5,
        ok,
        f"dual budgets off by ({d_t:.2e}, {d_l:.2e}); single-branch beam dev {branch_dev:.2e}",
    )
    assert ok


def test_criterion_6_ratio_monotonicity():
    rng = np.random.default_rng(6)
    alphas = np.logspace(-6, 6, 100)
    strictly = True
    for _ in range(10):
        n = int(rng.integers(3, 25))
        spacing = rng.uniform(0.1, 0.6)
        m = int(rng.integers(1, 4))
        geom = Geometry(linear_array(spacing * (n - 1), n), ue_line(rng.uniform(2, 25), 5.0, m))
        r_l = loss_resistance_from_efficiency(rng.uniform(0.5, 0.95))
        sys_ = assemble(geom, PHYS, r_l=r_l)
        H = channel_matrix(sys_)
        lam, Q = np.linalg.eigh(radiated_resistance_matrix(sys_))
        keep = lam >= lam[-1] * np.finfo(float).eps
        lam, Q = lam[keep], Q[:, keep]
        weights = np.sum(np.abs(Q.conj().T @ H.conj().T) ** 2, axis=1)
        vals = mf_dual_ratio(alphas, lam, weights, r_l)
        strictly = strictly and bool(np.all(np.diff(vals) < 0.0))
    verdict(6, strictly, "P_l/P_t ratio strictly decreasing over 100 alphas x 10 scenarios")
    assert strictly


def test_criterion_7_wmmse():
    geom_lis = linear_array(4.0, 41)
    cons = Constraints(P_R=1.0, P_L=1.0, sigma2=1e-4)
    results = {}
    for m in (1, 5, 10, 20, 33):
        geom = Geometry(geom_lis, ue_line(20.0, 10.0, m))
        sys_ = assemble(geom, PHYS, r_l=0.0)
        H = channel_matrix(sys_)
        R_P = radiated_resistance_matrix(sys_)
        sol, _ = wmmse(H, R_P, 0.0, cons, max_iter=1000, tol=1e-8)
        mf = mf_dual(H, R_P, 0.0, cons.P_R, cons.P_L)
        results[m] = (sol, mf, H)
    conv = all(sol.converged and sol.iterations <= 1000 for sol, _, _ in results.values())
    budgets = all(
        sol.achieved_P_t <= cons.P_R * (1.0 + 1e-8)
        and sol.achieved_P_l <= cons.P_L * (1.0 + 1e-8)
        and max(sol.achieved_P_t / cons.P_R, sol.achieved_P_l / cons.P_L) >= 1.0 - 1e-8
        for sol, _, _ in results.values()
    )
    sol1, mf1, _ = results[1]
    bw, bm = sol1.B.ravel(), mf1.B.ravel()
    cos = abs(np.vdot(bw, bm)) / (np.linalg.norm(bw) * np.linalg.norm(bm))
    sol20, mf20, H20 = results[20]
    cap_w = sum_capacity(sinr_per_user(H20, sol20.B, cons.sigma2))
    cap_m = sum_capacity(sinr_per_user(H20, mf20.B, cons.sigma2))
    ok = conv and budgets and cos > 0.999 and cap_w > cap_m
    verdict(
        7,
        ok,
        f"converged={conv}, budgets={budgets}, M=1 cosine {cos:.6f}, "
        f"M=20 capacity {cap_w:.3f} vs MF {cap_m:.3f}",
    )
    assert ok


def test_criterion_8_fig2_shape(fig2_rows):
    assert all(r.error == "" for r in fig2_rows)
    on = curve(
        fig2_rows, {"spacing": 0.1, "efficiency": 1.0, "ue_coupling": True}, "users", "sum_capacity"
    )
    peak = int(np.argmax(on))
    interior_max = 0 < peak < len(on) - 1
    decreases_after = bool(np.all(on[peak + 1 :] <= on[peak])) and on[-1] < 0.9 * on[peak]
    off = curve(
        fig2_rows, {"spacing": 0.1, "efficiency": 1.0, "ue_coupling": False}, "users", "sum_capacity"
    )
    drops = 1.0 - off[1:] / off[:-1]
    plateau_ok = bool(np.all(drops <= 0.02))
    dev = 0.0
    for coupling in (True, False):
        a = curve(
            fig2_rows, {"spacing": 0.1, "efficiency": 0.8, "ue_coupling": coupling}, "users", "sum_capacity"
        )
        b = curve(
            fig2_rows, {"spacing": 0.5, "efficiency": 0.8, "ue_coupling": coupling}, "users", "sum_capacity"
        )
        dev = max(dev, float(np.max(np.abs(a - b) / np.maximum(a, b))))
    lossy_ok = dev <= 0.10
    ok = interior_max and decreases_after and plateau_ok and lossy_ok
    verdict(
        8,
        ok,
        f"coupling-on peak at M={peak + 1} (interior={interior_max}, decays={decreases_after}); "
        f"coupling-off worst drop {float(np.max(drops)):.1%} (tol 2%); "
        f"e_r=0.8 spacing deviation {dev:.1%} (tol 10%)",
    )
    assert ok


def test_criterion_9_fig3_behavior(fig3_rows):
    assert all(r.error == "" for r in fig3_rows)
    p_r = 1.0
    ref = p_r / 6.0
    v99 = curve(
        fig3_rows, {"efficiency": 0.99, "scattering": True}, "elements_per_axis", "received_power"
    )
    increasing = bool(np.all(np.diff(v99) > 0.0))
    gaps = np.abs(v99[-3:] - ref)
    gap_shrinking = bool(np.all(np.diff(gaps) < 0.0))
    final_close = abs(v99[-1] - ref) <= 0.25 * ref
    scat_on = [
        r.received_power for r in fig3_rows if r.params["scattering"]
    ]
    bounded = max(scat_on) <= p_r * (1.0 + 1e-9)
    v_off = curve(
        fig3_rows, {"efficiency": 1.0, "scattering": False}, "elements_per_axis", "received_power"
    )
    exceeds = bool(np.any(v_off > p_r))
    ok = increasing and gap_shrinking and final_close and bounded and exceeds
    verdict(
        9,
        ok,
        f"e_r=0.99 increasing={increasing}, last-three gaps to P_R/6 {np.round(gaps, 4).tolist()} "
        f"shrinking={gap_shrinking}, final within 25%={final_close}; "
        f"scattering-on max {max(scat_on):.3f} <= P_R={bounded}; "
        f"scattering-off exceeds P_R={exceeds}",
    )
    assert ok


def test_criterion_10_determinism(fig2_rows, fig3_rows, tmp_path):
    identical = True
    for name, rows, points in (
        ("fig2", fig2_rows, scenario.fig2_points),
        ("fig3", fig3_rows, scenario.fig3_points),
    ):
        first = tmp_path / f"{name}_a.csv"
        second = tmp_path / f"{name}_b.csv"
        report.emit_csv(rows, first)
        report.emit_csv(scenario.run_points(points(), threads=4), second)
        identical = identical and first.read_bytes() == second.read_bytes()
    verdict(10, identical, "fig2 and fig3 CSVs byte-identical across two runs")
    assert identical
