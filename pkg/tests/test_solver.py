"""Time stepping: invariants, guards, limits, and coupling structure."""

import copy
import os

import numpy as np
import pytest

import failwave as fw

SCENARIO_DIR = os.path.join(os.path.dirname(__file__), "..", "scenarios")


def load_scenario(name):
    with open(os.path.join(SCENARIO_DIR, name)) as fh:
        return fw.build_scenario(fh.read())


def standing_doc(nx):
    return {
        "grid": {"nx": nx, "dx": 1.0 / nx},
        "material": {"rho0": 1.0, "c1": 1.0, "lambda": 1.0, "d1": 0.1},
        "time": {"dt": 0.5 / nx, "t_end": 0.3},
        "ic": {"U": {"type": "sine", "amplitude": 0.01, "mode": 1}},
        "bc": {"u_left": {"type": "fixed"}, "u_right": {"type": "fixed"},
               "gamma": {"type": "zero_flux"}},
        "output": {"snapshots": 2},
    }


def diffusion_doc(**over):
    doc = {
        "grid": {"nx": 64, "dx": 1.0 / 64},
        "material": {"rho0": 1.0, "c1": 1.0, "lambda": 1.0, "d1": 0.05},
        "time": {"dt": 0.001, "t_end": 0.1},
        "ic": {"gamma": {"type": "gaussian", "amplitude": 1.0, "center": 0.5,
                         "width": 0.08}},
        "bc": {"u_left": {"type": "fixed"}, "u_right": {"type": "fixed"},
               "gamma": {"type": "zero_flux"}},
    }
    doc.update(over)
    return doc


# -- elastic substep -----------------------------------------------------------


def test_standing_wave_second_order():
    errs = {}
    for nx in (32, 64):
        cfg = fw.build_scenario(standing_doc(nx))
        res = fw.run(cfg)
        x = cfg.grid.cell_centers()
        exact = 0.01 * np.cos(np.pi * res.state.time) * np.sin(np.pi * x)
        errs[nx] = float(np.max(np.abs(res.state.U - exact)))
    ratio = errs[32] / errs[64]
    assert 3.2 < ratio < 4.8, f"halving dx gave error ratio {ratio:.2f}"


def test_zero_state_is_fixed_point():
    doc = standing_doc(32)
    doc["ic"] = {}
    res = fw.run(fw.build_scenario(doc))
    assert np.all(res.state.U == 0.0)
    assert np.all(res.state.v == 0.0)
    assert np.all(res.state.gamma == 0.0)


def test_cfl_violation_raises():
    doc = standing_doc(32)
    doc["time"] = {"dt": 3.0 / 32, "t_end": 1.0}  # CFL = 3
    with pytest.raises(fw.CflViolation):
        fw.run(fw.build_scenario(doc))


def test_clifton_limit_conserves_energy():
    doc = {
        "kind": "clifton",
        "grid": {"nx": 256, "dx": 1.0 / 256},
        "material": {"rho0": 1.0, "c1": 1.0, "lambda": 0.0, "d1": 0.2},
        "time": {"dt": 0.2 / 256, "t_end": 2.0},
        "ic": {"v": {"type": "gaussian", "amplitude": 1.0, "center": 0.5, "width": 0.08},
               "gamma": {"type": "gaussian", "amplitude": 0.4, "center": 0.5, "width": 0.1}},
        "bc": {"u_left": {"type": "periodic"}, "u_right": {"type": "periodic"},
               "gamma": {"type": "periodic"}},
    }
    res = fw.run(fw.build_scenario(doc))
    assert fw.budget_imbalance(res.reports) < 2e-5
    # the damage profile is frozen and nothing dissipates
    assert res.reports[-1].energy.dissipated == 0.0
    assert np.array_equal(res.state.gamma, fw.initialize_state(fw.build_scenario(doc)).gamma)


# -- damage substep ------------------------------------------------------------


def test_uniform_decay_matches_ode():
    # spatially uniform gamma: d gamma/dt = -(c2/lam) gamma exactly
    doc = diffusion_doc(
        material={"rho0": 1.0, "c1": 1.0, "c2": 2.0, "lambda": 1.0, "d1": 0.05},
        ic={"gamma": {"type": "constant", "value": 0.5}},
        time={"dt": 0.01, "t_end": 1.0},
    )
    res = fw.run(fw.build_scenario(doc))
    exact = 0.5 * np.exp(-2.0 * res.state.time)
    assert np.max(np.abs(res.state.gamma - exact)) / exact < 1e-4


def test_gamma_zero_is_logistic_fixed_point():
    doc = diffusion_doc(
        material={"rho0": 1.0, "c1": 1.0, "lambda": 1.0, "d1": 1.0,
                  "source": {"law": "logistic", "rate": 5.0, "gamma_max": 1.0}},
        ic={},
    )
    res = fw.run(fw.build_scenario(doc))
    assert np.all(res.state.gamma == 0.0)


def test_explicit_stability_guard():
    doc = diffusion_doc(numerics={"scheme": "explicit"},
                        time={"dt": 0.01, "t_end": 0.1})  # d dt/dx^2 = 2.05
    with pytest.raises(fw.DiffusionStabilityViolation):
        fw.run(fw.build_scenario(doc))


def test_coupled_run_with_zero_lambda_raises():
    doc = diffusion_doc(material={"rho0": 1.0, "c1": 1.0, "lambda": 0.0, "d1": 0.05})
    with pytest.raises(fw.SingularLambda):
        fw.run(fw.build_scenario(doc))


def test_explicit_matches_cn_on_smooth_profile():
    cn = fw.run(fw.build_scenario(diffusion_doc()))
    ex = fw.run(fw.build_scenario(diffusion_doc(numerics={"scheme": "explicit"})))
    assert np.max(np.abs(cn.state.gamma - ex.state.gamma)) < 2e-3


def test_dissipated_energy_linear_in_lambda():
    # c2 = 0, no source: gamma rate is d1 * Laplacian(gamma), lambda-free,
    # so the dissipated integral lam * rate^2 scales exactly linearly
    ratios = []
    for lam in (1e-6, 1e-5, 1e-4):
        doc = diffusion_doc()
        doc["material"]["lambda"] = lam
        res = fw.run(fw.build_scenario(doc))
        ratios.append(res.reports[-1].energy.dissipated / lam)
    spread = (max(ratios) - min(ratios)) / max(ratios)
    assert spread < 1e-9, f"dissipated/lambda spread {spread:.2e}"


# -- activation threshold --------------------------------------------------------


def test_subthreshold_pulse_never_activates():
    doc = {
        "grid": {"nx": 100, "dx": 0.01},
        "material": {"rho0": 1.0, "c1": 1.0, "lambda": 1.0, "d1": 0.1,
                     "sigma0": 2.0, "c2": 1.0},
        "time": {"dt": 0.005, "t_end": 0.3},
        "ic": {},
        "bc": {"u_left": {"type": "traction", "value": -1.0},
               "u_right": {"type": "free"}, "gamma": {"type": "zero_flux"}},
    }
    res = fw.run(fw.build_scenario(doc))
    assert not res.state.active.any()
    assert np.all(res.state.gamma == 0.0)
    assert res.reports[-1].energy.dissipated == 0.0


def test_strong_pulse_spreads_activation():
    doc = {
        "grid": {"nx": 100, "dx": 0.01},
        "material": {"rho0": 1.0, "c1": 1.0, "lambda": 1.0, "d1": 0.1,
                     "sigma0": 0.5, "c2": 1.0},
        "time": {"dt": 0.005, "t_end": 0.3},
        "ic": {},
        "bc": {"u_left": {"type": "traction", "value": -2.0},
               "u_right": {"type": "free"}, "gamma": {"type": "zero_flux"}},
    }
    res = fw.run(fw.build_scenario(doc))
    n_active = int(res.state.active.sum())
    # the wave has crossed ~30% of the bar; cells behind it saw |S| >= sigma0
    assert 10 < n_active < 60
    assert res.state.active[:10].all()
    assert not res.state.active[-10:].any()


# -- coupling structure (bitwise) -------------------------------------------------


def test_feng_displacement_blind_to_damage():
    base = diffusion_doc(
        ic={"U": {"type": "gaussian", "amplitude": 0.02, "center": 0.5, "width": 0.1}},
        time={"dt": 0.005, "t_end": 0.2},
    )
    seeded = copy.deepcopy(base)
    seeded["ic"]["gamma"] = {"type": "gaussian", "amplitude": 0.7, "center": 0.4,
                             "width": 0.1}
    res_a = fw.run(fw.build_scenario(base))
    res_b = fw.run(fw.build_scenario(seeded))
    assert np.array_equal(res_a.state.U, res_b.state.U)
    assert np.array_equal(res_a.state.v, res_b.state.v)
    assert not np.array_equal(res_a.state.gamma, res_b.state.gamma)


def test_uncoupled_quadratic_damage_blind_to_displacement():
    base = diffusion_doc(
        material={"rho0": 1.0, "c1": 4.0, "c2": 1.0, "b": 0.0, "lambda": 0.5,
                  "d1": 0.2, "model": "linear"},
        time={"dt": 0.001, "t_end": 0.2},
    )
    pushed = copy.deepcopy(base)
    pushed["ic"] = dict(pushed["ic"])
    pushed["ic"]["U"] = {"type": "gaussian", "amplitude": 0.02, "center": 0.5,
                         "width": 0.1}
    res_a = fw.run(fw.build_scenario(base))
    res_b = fw.run(fw.build_scenario(pushed))
    assert np.array_equal(res_a.state.gamma, res_b.state.gamma)
    assert not np.array_equal(res_a.state.U, res_b.state.U)


def test_linear_model_two_way_coupling_is_live():
    # with b != 0 the same experiment must change the damage field
    base = diffusion_doc(
        material={"rho0": 1.0, "c1": 4.0, "c2": 1.0, "b": 0.8, "lambda": 0.5,
                  "d1": 0.2, "model": "linear"},
        time={"dt": 0.001, "t_end": 0.2},
    )
    pushed = copy.deepcopy(base)
    pushed["ic"] = dict(pushed["ic"])
    pushed["ic"]["U"] = {"type": "gaussian", "amplitude": 0.02, "center": 0.5,
                         "width": 0.1}
    res_a = fw.run(fw.build_scenario(base))
    res_b = fw.run(fw.build_scenario(pushed))
    assert not np.array_equal(res_a.state.gamma, res_b.state.gamma)


# -- output contracts --------------------------------------------------------------


def test_gauge_and_report_cadence():
    doc = diffusion_doc(gauges=[0.25, 0.75], output={"snapshots": 5},
                        time={"dt": 0.005, "t_end": 0.1})
    cfg = fw.build_scenario(doc)
    res = fw.run(cfg)
    nsteps = int(round(cfg.t_end / cfg.dt))
    assert len(res.reports) == nsteps + 1
    assert len(res.gauges) == 2
    for tr in res.gauges:
        assert len(tr.t) == nsteps + 1
        assert tr.t[0] == 0.0
        assert tr.t[-1] == pytest.approx(res.state.time)
    assert len(res.snapshots) == 5
    times = [s.time for s in res.snapshots]
    assert times[0] == 0.0 and times == sorted(times)
    for s in res.snapshots:
        assert s.U.shape == cfg.grid.shape
        assert s.Z.shape == cfg.grid.shape


def test_budget_closure_on_fast_shipped_scenarios():
    for name in ("damage_decay.yaml", "linear_quadratic.yaml"):
        res = fw.run(load_scenario(name))
        assert fw.budget_imbalance(res.reports) < 0.01, name


# -- 2D ---------------------------------------------------------------------------


def _lateral_doc(tol):
    return {
        "grid": {"nx": 80, "ny": 80, "dx": 0.3, "dy": 0.3},
        "material": {"rho0": 1.0, "c1": 1.0, "lambda": 1.0, "d1": 1.0, "d2": 4.0,
                     "source": {"law": "logistic", "rate": 1.0, "gamma_max": 1.0}},
        "time": {"dt": 0.05, "t_end": 6.0},
        "ic": {"gamma": {"type": "gaussian", "amplitude": 1.0,
                         "center": [12.0, 12.0], "width": 0.8}},
        "bc": {"u_left": {"type": "fixed"}, "u_right": {"type": "fixed"},
               "gamma": {"type": "zero_flux"}},
        "gauges": [[16.5, 12.0], [12.0, 16.5]],
        # ADI splitting error makes Z*dGamma/dt dip below zero at O(dt^2)
        # scale, so 2D runs monitor admissibility at that scale, not 1e-12
        "numerics": {"tol_admissibility": tol},
        "output": {"snapshots": 4},
    }


def test_lateral_diffusivity_wins_in_2d():
    res = fw.run(fw.build_scenario(_lateral_doc(1e-4)))

    def arrival(trace, thr=0.5):
        hits = np.nonzero(np.asarray(trace.gamma) >= thr)[0]
        return float(trace.t[hits[0]]) if hits.size else None

    t_long = arrival(res.gauges[0])
    t_lat = arrival(res.gauges[1])
    assert t_long is not None and t_lat is not None
    assert t_lat < t_long  # equal distances; d2 > d1 means lateral first
    assert fw.budget_imbalance(res.reports) < 1e-2


def test_adi_splitting_trips_strict_admissibility():
    # anisotropic sharp seed: the Peaceman-Rachford cross term makes the
    # pointwise product Z*dGamma/dt dip to ~-1e-5, far beyond 1e-12 relative
    doc = {
        "grid": {"nx": 64, "ny": 64, "dx": 0.25, "dy": 0.25},
        "material": {"rho0": 1.0, "c1": 1.0, "lambda": 1.0, "d1": 0.2, "d2": 2.0},
        "time": {"dt": 0.05, "t_end": 1.0},
        "ic": {"gamma": {"type": "gaussian", "amplitude": 1.0,
                         "center": [8.0, 8.0], "width": 0.4}},
        "bc": {"u_left": {"type": "fixed"}, "u_right": {"type": "fixed"},
               "gamma": {"type": "zero_flux"}},
    }
    with pytest.raises(fw.AdmissibilityViolation) as exc:
        fw.run(fw.build_scenario(doc))
    err = exc.value
    assert err.state is not None  # offending state rides along for forensics
    assert err.state.gamma.shape == (64, 64)
    # the same run under the documented splitting-scale tolerance completes
    doc["numerics"] = {"tol_admissibility": 1e-2}
    res = fw.run(fw.build_scenario(doc))
    assert np.max(res.state.gamma) > 0.0


def test_2d_isotropic_matches_heat_kernel():
    nx, d, t_end = 96, 0.5, 0.5
    L = 12.0
    doc = {
        "grid": {"nx": nx, "ny": nx, "dx": L / nx, "dy": L / nx},
        "material": {"rho0": 1.0, "c1": 1.0, "lambda": 1.0, "d1": d, "d2": d},
        "time": {"dt": 0.02, "t_end": t_end},
        "ic": {"gamma": {"type": "gaussian", "amplitude": 1.0,
                         "center": [6.0, 6.0], "width": 0.5}},
        "bc": {"u_left": {"type": "fixed"}, "u_right": {"type": "fixed"},
               "gamma": {"type": "zero_flux"}},
        "numerics": {"tol_admissibility": 1e-4},
    }
    cfg = fw.build_scenario(doc)
    res = fw.run(cfg)
    x = (np.arange(nx) + 0.5) * (L / nx)
    X, Y = np.meshgrid(x, x)
    var0 = 0.5**2
    var = var0 + 2 * d * t_end
    exact = (var0 / var) * np.exp(-((X - 6) ** 2 + (Y - 6) ** 2) / (2 * var))
    assert np.max(np.abs(res.state.gamma - exact)) < 2e-3
