"""Constitutive forms against hand-evaluated values and derivative checks.

Every frozen number below is recomputed in the comment next to it, never
copied from solver output.
"""

import numpy as np
import pytest

import failwave as fw
from failwave import ops
from failwave.model import MaterialParams


def mat(**kw):
    base = dict(rho0=1.0, c1=1.0)
    base.update(kw)
    return MaterialParams(**base)


# -- frozen point values ---------------------------------------------------------


def test_free_energy_feng_strain_part():
    # (c1/2) uX^2 + (c3/4) uX^4 = 1*0.25 + 1*0.0625 = 0.3125
    p = mat(c1=2.0, c3=4.0)
    assert fw.free_energy_feng(0.5, 0.0, 0.0, p) == pytest.approx(0.3125, rel=1e-14)


def test_free_energy_feng_damage_part():
    # (c2/2) G^2 + (lam*d1/2) g^2 = 0.5*4 + 1*9 = 11
    p = mat(c2=1.0, lam=1.0, d1=2.0)
    assert fw.free_energy_feng(0.0, 2.0, 3.0, p) == pytest.approx(11.0, rel=1e-14)


def test_free_energy_linear_point():
    # (c1/2) uX^2 + b uX G + (c2/2) G^2 = 1 + 3 + 2 = 6
    p = mat(c1=2.0, b=3.0, c2=4.0)
    assert fw.free_energy_linear(1.0, 1.0, 0.0, p) == pytest.approx(6.0, rel=1e-14)


def test_stress_points():
    # feng: 2*0.5 + 4*0.125 = 1.5 ; linear: 2*0.5 + 3*2 = 7
    assert fw.stress(0.5, 0.0, mat(c1=2.0, c3=4.0)) == pytest.approx(1.5, rel=1e-14)
    p_lin = mat(c1=2.0, b=3.0, model="linear")
    assert fw.stress(0.5, 2.0, p_lin, model="linear") == pytest.approx(7.0, rel=1e-14)


def test_internal_forces_uniform_field():
    # uniform gamma: no gradient, so A = -c2*G = -6 and Z = A
    p = mat(c2=3.0, lam=1.0, d1=0.5)
    grid = fw.Grid1D(nx=8, dx=0.125)
    gamma = np.full(8, 2.0)
    A, B, Z = fw.internal_forces(gamma, p, grid)
    assert np.allclose(A, -6.0, rtol=1e-14)
    assert np.allclose(B, 0.0, atol=0.0)
    assert np.allclose(Z, -6.0, rtol=1e-14)


def test_dissipation_and_entropy_production():
    # D = (lam/2) gd^2 = 9 ; s_dot = lam gd^2/theta0 = 18/300 = 0.06
    p = mat(lam=2.0, theta0=300.0)
    assert fw.dissipation(3.0, p) == pytest.approx(9.0, rel=1e-14)
    assert fw.entropy_production(3.0, p) == pytest.approx(0.06, rel=1e-14)
    # identity s_dot = 2 D / theta0 on an array
    gd = np.linspace(-2.0, 2.0, 11)
    assert np.allclose(fw.entropy_production(gd, p),
                       2.0 * fw.dissipation(gd, p) / p.theta0, rtol=1e-15)


def test_entropy_flux_sign():
    # flux = -B*gd/theta0 = -(1*2)/300
    p = mat(theta0=300.0)
    assert fw.entropy_flux(2.0, 1.0, p) == pytest.approx(-2.0 / 300.0, rel=1e-14)


def test_logistic_damage_force_point():
    # A = r lam G (1 - G/Gmax) = 2*1.5*0.5*0.75 = 1.125
    p = mat(lam=1.5, source_law="logistic", source_rate=2.0, gamma_max=2.0)
    assert fw.damage_force(0.5, p) == pytest.approx(1.125, rel=1e-14)


def test_elastic_wave_speed_uses_peak_strain():
    # sqrt((c1 + 3 c3 uX^2)/rho0) at uX = -0.2: sqrt(1.36/4)
    p = mat(c1=1.0, c3=3.0, rho0=4.0)
    c = fw.elastic_wave_speed(np.array([0.1, -0.2]), p)
    assert c == pytest.approx(np.sqrt(1.36 / 4.0), rel=1e-14)


# -- boundary energy release -----------------------------------------------------


def test_boundary_release_linear_flux():
    # H = B(R)*gd(R) - B(L)*gd(L) = 1*2 - 0*2 = 2
    grid = fw.Grid1D(nx=10, dx=0.1)
    B = np.linspace(0.0, 1.0, 11)
    gd = np.full(11, 2.0)
    H = fw.boundary_energy_release(gd, B, grid, {"type": "dirichlet", "value": 0.0})
    assert H == pytest.approx(2.0, rel=1e-14)


def test_boundary_release_zero_flux_wall_is_zero():
    p = mat(lam=1.0, d1=0.5)
    grid = fw.Grid1D(nx=32, dx=1.0 / 32)
    x = grid.cell_centers()
    gamma = np.exp(-((x - 0.5) ** 2) / 0.02)
    _, B, _ = fw.internal_forces(gamma, p, grid, bc_gamma={"type": "zero_flux"})
    assert B[0] == 0.0 and B[-1] == 0.0
    gd = np.ones(33)
    assert fw.boundary_energy_release(gd, B, grid, {"type": "zero_flux"}) == 0.0


def test_boundary_release_periodic_is_zero():
    grid = fw.Grid1D(nx=8, dx=0.125)
    B = np.linspace(0.0, 1.0, 9)
    assert fw.boundary_energy_release(np.ones(9), B, grid, {"type": "periodic"}) == 0.0


# -- derivative consistency --------------------------------------------------------


def _central(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)


@pytest.mark.parametrize("model", ["feng", "linear"])
def test_forces_match_free_energy_gradient(model):
    rng = np.random.default_rng(42)
    h = 1e-6
    for _ in range(100):
        p = mat(
            c1=rng.uniform(0.5, 4.0),
            c3=rng.uniform(0.0, 2.0) if model == "feng" else 0.0,
            c2=rng.uniform(0.1, 2.0),
            b=rng.uniform(-1.0, 1.0) if model == "linear" else 0.0,
            lam=rng.uniform(0.2, 2.0),
            d1=rng.uniform(0.05, 1.0),
            model=model,
        )
        uX = rng.uniform(-0.5, 0.5)
        G = rng.uniform(0.0, 2.0)
        g = rng.uniform(-3.0, 3.0)

        psi = lambda u_, G_, g_: fw.free_energy(u_, G_, g_, p, model)
        S_fd = _central(lambda u_: psi(u_, G, g), uX, h)
        A_fd = -_central(lambda G_: psi(uX, G_, g), G, h)
        Bg_fd = _central(lambda g_: psi(uX, G, g_), g, h)  # dpsi/dg = K g = -B

        S = fw.stress(uX, G, p, model)
        A = fw.damage_force(G, p, model=model, uX=uX)
        assert S == pytest.approx(S_fd, rel=1e-6, abs=1e-9)
        assert A == pytest.approx(A_fd, rel=1e-6, abs=1e-9)
        assert p.k1 * g == pytest.approx(Bg_fd, rel=1e-6, abs=1e-9)


def test_logistic_force_matches_potential_gradient():
    p = mat(lam=0.8, source_law="logistic", source_rate=1.7, gamma_max=1.3)
    h = 1e-6
    for G in np.linspace(0.05, 1.25, 9):
        A_fd = -_central(lambda G_: fw.damage_potential(G_, p), G, h)
        assert fw.damage_force(G, p) == pytest.approx(A_fd, rel=1e-7, abs=1e-10)


def test_rate_conjugacy():
    # rho0-normalized Rayleigh function: d(D)/d(gd) = lam*gd (thermodynamic force)
    p = mat(lam=1.7)
    for gd in [-2.0, -0.3, 0.0, 0.9, 4.0]:
        force_fd = _central(lambda g_: fw.dissipation(g_, p), gd, 1e-6)
        assert force_fd == pytest.approx(p.lam * gd, rel=1e-8, abs=1e-8)


def test_elastic_energy_convex():
    p = mat(c1=2.0, c3=1.5)
    u = np.linspace(-1.0, 1.0, 101)
    e = fw.elastic_energy_density(u, p)
    second = e[2:] - 2 * e[1:-1] + e[:-2]
    assert np.all(second >= -1e-15)


def test_phenomenological_rate_masks_and_guards():
    p = mat(lam=2.0)
    Z = np.array([4.0, -6.0, 2.0])
    active = np.array([True, False, True])
    rate = fw.phenomenological_rate(Z, p, active)
    assert np.allclose(rate, [2.0, 0.0, 1.0], rtol=1e-15)
    with pytest.raises(fw.SingularLambda):
        fw.phenomenological_rate(Z, mat(lam=0.0))


# -- discrete operator structure ---------------------------------------------------


def test_flux_divergence_adjoint_to_gradient():
    # sum phi div(K grad G) dx = -sum_faces K (grad G)(grad phi) w for zero-flux walls
    rng = np.random.default_rng(3)
    grid = fw.Grid1D(nx=40, dx=0.025)
    p = mat(lam=1.3, d1=0.6)
    bc_g = {"type": "zero_flux"}
    gamma = rng.standard_normal(40)
    phi = rng.standard_normal(40)
    K = ops.face_conductivity_1d(np.ones(40, dtype=bool), p.k1, bc_g)
    div = ops.damage_flux_div(gamma, K, grid, bc_g)
    lhs = float(np.sum(phi * div) * grid.dx)
    gradG = ops.gamma_grad_faces_1d(gamma, grid.dx, bc_g)
    gradP = ops.gamma_grad_faces_1d(phi, grid.dx, bc_g)
    w = ops.face_weights_gamma_1d({"u_left": {"type": "fixed"},
                                   "u_right": {"type": "fixed"},
                                   "gamma": bc_g}, grid.nx, grid.dx)
    rhs = -float(np.sum(K * gradG * gradP * w))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-13)


def test_evaluate_bundle_identities():
    p = mat(c1=2.0, c2=0.5, lam=1.2, d1=0.3, theta0=250.0)
    grid = fw.Grid1D(nx=24, dx=1.0 / 24)
    x = grid.cell_centers()
    state = fw.FieldState(
        time=0.0,
        U=0.01 * np.sin(np.pi * x),
        v=np.zeros(24),
        gamma=0.4 * np.exp(-((x - 0.5) ** 2) / 0.05),
        active=np.ones(24, dtype=bool),
    )
    bc = {"u_left": {"type": "fixed", "value": 0.0},
          "u_right": {"type": "fixed", "value": 0.0},
          "gamma": {"type": "zero_flux"}}
    ev = fw.evaluate(state, p, grid, bc)
    assert np.allclose(ev.sdot_i, 2.0 * ev.D_val / p.theta0, rtol=1e-15)
    # Z = A - div B by construction; rate = Z/lam on active cells
    div_B = (ev.B[1:] - ev.B[:-1]) / grid.dx
    assert np.allclose(ev.Z, ev.A - div_B, rtol=1e-12, atol=1e-14)
    assert np.all(ev.D_val >= 0.0)
