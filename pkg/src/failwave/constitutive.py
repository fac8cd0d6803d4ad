"""Free energy, dissipation, and every quantity derived from them.

Two material forms are supported:

* feng: psi = (c1/2)uX^2 + W(gamma) + (1/2)k1 (dGamma/dX)^2
            + (1/2)k2 |grad_perp Gamma|^2 + (c3/4)uX^4,
  with k1 = lam*d1, k2 = lam*d2. Stress is strain-only (evaluated on the
  undamaged branch), so the elastic field never feels the damage field.
* linear: psi = (c1/2)uX^2 + b*uX*gamma + (c2/2)gamma^2 + (1/2)k1|grad|^2,
  a genuine quadratic form whose stress carries the b*gamma cross term.

W(gamma) is the damage potential. Its literal form is (c2/2)gamma^2, which
relaxes; the logistic option swaps in a double-well-ish cubic whose force
r*lam*gamma*(1 - gamma/gamma_max) sustains traveling fronts. Keeping the
source inside the potential keeps Z*dGamma/dt >= 0 structurally, so the
admissibility monitor stays meaningful for front-forming runs.

Densities are volumetric: psi in J/m^3, dissipation in W/m^3, entropy
production in W/(m^3 K).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ops
from .errors import SingularLambda
from .model import FieldState, MaterialParams


def _grad_parts(grad_gamma):
    """Split a damage gradient argument into (longitudinal, transverse)."""
    if isinstance(grad_gamma, (tuple, list)):
        gx, gy = grad_gamma
        return np.asarray(gx, dtype=float), np.asarray(gy, dtype=float)
    return np.asarray(grad_gamma, dtype=float), 0.0


def free_energy_feng(uX, gamma, grad_gamma, p: MaterialParams):
    """Quartic-strain free energy density (J/m^3); grad_gamma may be a
    scalar/array (1D) or an (x, y) pair."""
    gx, gy = _grad_parts(grad_gamma)
    uX = np.asarray(uX, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    return (
        0.5 * p.c1 * uX**2
        + 0.5 * p.c2 * gamma**2
        + 0.5 * p.k1 * gx**2
        + 0.5 * p.k2 * np.asarray(gy) ** 2
        + 0.25 * p.c3 * uX**4
    )


def free_energy_linear(uX, gamma, grad_gamma, p: MaterialParams):
    """Quadratic-form free energy density with the b strain-damage cross term."""
    gx, gy = _grad_parts(grad_gamma)
    uX = np.asarray(uX, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    return (
        0.5 * p.c1 * uX**2
        + p.b * uX * gamma
        + 0.5 * p.c2 * gamma**2
        + 0.5 * p.k1 * gx**2
        + 0.5 * p.k2 * np.asarray(gy) ** 2
    )


def free_energy(uX, gamma, grad_gamma, p: MaterialParams, model: str = "feng"):
    if model == "linear":
        return free_energy_linear(uX, gamma, grad_gamma, p)
    return free_energy_feng(uX, gamma, grad_gamma, p)


def damage_potential(gamma, p: MaterialParams):
    """Potential W(gamma) whose negative derivative is the damage source.

    linear_decay: W = (c2/2)gamma^2  (relaxation toward 0)
    logistic:     W = -r*lam*(gamma^2/2 - gamma^3/(3*gamma_max))
                  (downhill from gamma=0 toward gamma_max)
    """
    gamma = np.asarray(gamma, dtype=float)
    if p.source_law == "logistic":
        r = p.source_rate * p.lam
        return -r * (0.5 * gamma**2 - gamma**3 / (3.0 * p.gamma_max))
    return 0.5 * p.c2 * gamma**2


def damage_force(gamma, p: MaterialParams, model: str = "feng", uX=None):
    """Internal force A = -d(psi)/d(gamma) (Pa), source law included.

    feng + linear_decay: -c2*gamma
    feng + logistic:     r*lam*gamma*(1 - gamma/gamma_max)
    linear:              -(b*uX + c2*gamma)
    """
    gamma = np.asarray(gamma, dtype=float)
    if model == "linear":
        if uX is None:
            uX = np.zeros_like(gamma)
        return -(p.b * np.asarray(uX, dtype=float) + p.c2 * gamma)
    if p.source_law == "logistic":
        return p.source_rate * p.lam * gamma * (1.0 - gamma / p.gamma_max)
    return -p.c2 * gamma


def stress(uX, gamma, p: MaterialParams, model: str = "feng"):
    """Longitudinal 1st Piola-Kirchhoff stress (Pa)."""
    uX = np.asarray(uX, dtype=float)
    if model == "linear":
        return p.c1 * uX + p.b * np.asarray(gamma, dtype=float)
    if p.c3 == 0.0:
        return p.c1 * uX
    return p.c1 * uX + p.c3 * (uX * uX * uX)  # spelled out: ** dispatches to pow


def elastic_energy_density(uX, p: MaterialParams, model: str = "feng"):
    """Strain part of psi only (the face-quadrature integrand), J/m^3."""
    uX = np.asarray(uX, dtype=float)
    u2 = uX * uX
    if model == "linear" or p.c3 == 0.0:
        return 0.5 * p.c1 * u2
    return 0.5 * p.c1 * u2 + 0.25 * p.c3 * (u2 * u2)


def dissipation(gamma_dot, p: MaterialParams):
    """Dissipation density (lam/2)*gamma_dot^2 (W/m^3); always >= 0."""
    gd = np.asarray(gamma_dot, dtype=float)
    return 0.5 * p.lam * gd**2


def entropy_production(gamma_dot, p: MaterialParams):
    """Volumetric entropy production lam*gamma_dot^2/theta0 = 2*dissipation/theta0."""
    gd = np.asarray(gamma_dot, dtype=float)
    return p.lam * gd**2 / p.theta0


def entropy_flux(gamma_dot, B, p: MaterialParams):
    """Entropy flux -B*gamma_dot/theta0; pass colocated arrays."""
    return -np.asarray(B, dtype=float) * np.asarray(gamma_dot, dtype=float) / p.theta0


def phenomenological_rate(Z, p: MaterialParams, active=None):
    """Evolution law gamma_dot = Z/lam (1/s) on active cells, 0 elsewhere."""
    if p.lam == 0.0:
        raise SingularLambda("lam = 0 has no rate form; use clifton mode")
    rate = np.asarray(Z, dtype=float) / p.lam
    if active is not None:
        rate = np.where(active, rate, 0.0)
    return rate


def elastic_wave_speed(uX, p: MaterialParams) -> float:
    """Max characteristic speed sqrt((c1 + 3 c3 uX^2)/rho0) over the field (m/s)."""
    u2 = float(np.max(np.asarray(uX) ** 2)) if np.size(uX) else 0.0
    return float(np.sqrt((p.c1 + 3.0 * p.c3 * u2) / p.rho0))


_ZERO_FLUX = {"type": "zero_flux"}


def internal_forces(
    gamma: np.ndarray,
    p: MaterialParams,
    grid,
    model: str = "feng",
    uX=None,
    bc_gamma: dict | None = None,
    active: np.ndarray | None = None,
):
    """Damage force fields (A, B, Z): A pointwise, B = -K grad(gamma) on
    faces, Z = A - div(B) with the divergence adjoint to the face gradient.

    Conductivity is masked to zero on faces with an inactive neighbor.
    1D returns B as an (nx+1,) array; 2D as an (x-faces, y-faces) pair.
    """
    bc_g = bc_gamma if bc_gamma is not None else _ZERO_FLUX
    if active is None:
        active = np.ones(grid.shape, dtype=bool)
    A = damage_force(gamma, p, model=model, uX=uX)
    if grid.ndim == 1:
        K = ops.face_conductivity_1d(active, p.k1, bc_g)
        B = -K * ops.gamma_grad_faces_1d(gamma, grid.dx, bc_g)
        Z = A - ops.div_faces_1d(B, grid.dx)
        return A, B, Z
    Kx, Ky = ops.face_conductivity_2d(active, p.k1, p.k2, bc_g)
    Bx = -Kx * ops.gamma_grad_xfaces_2d(gamma, grid.dx, bc_g)
    By = -Ky * ops.gamma_grad_yfaces_2d(gamma, grid.dy, bc_g)
    divB = (Bx[:, 1:] - Bx[:, :-1]) / grid.dx + (By[1:, :] - By[:-1, :]) / grid.dy
    Z = A - divB
    return A, (Bx, By), Z


def boundary_energy_release(gamma_dot, B, grid, bc_gamma: dict | None = None) -> float:
    """Surface sum H = sum over boundary faces of (B . n) * gamma_dot (W/m^2
    in 1D, W/m in 2D). Periodic domains have no boundary: H = 0.

    gamma_dot is cell-centered; the boundary face uses its adjacent cell.
    B is face-centered ((nx+1,) in 1D, (Bx, By) pair in 2D).
    """
    bc_g = bc_gamma if bc_gamma is not None else _ZERO_FLUX
    if bc_g["type"] == "periodic":
        return 0.0
    if grid.ndim == 1:
        gd = np.asarray(gamma_dot, dtype=float)
        return float(B[-1] * gd[-1] - B[0] * gd[0])
    Bx, By = B
    gd = np.asarray(gamma_dot, dtype=float)
    right = np.sum(Bx[:, -1] * gd[:, -1]) * grid.dy
    left = -np.sum(Bx[:, 0] * gd[:, 0]) * grid.dy
    top = np.sum(By[-1, :] * gd[-1, :]) * grid.dx
    bottom = -np.sum(By[0, :] * gd[0, :]) * grid.dx
    return float(right + left + top + bottom)


def total_free_energy(
    U: np.ndarray,
    gamma: np.ndarray,
    p: MaterialParams,
    grid,
    bc: dict,
    t: float,
    model: str = "feng",
    active: np.ndarray | None = None,
) -> float:
    """Discrete free energy (J per unit cross-section) with the quadrature
    the solver's budget uses: strain and gradient terms on faces (interior
    weight dx, displacement/dirichlet walls dx/2, traction and free walls
    excluded), potential and cross terms on cells.

    The half-weight wall rule makes d(psi)/d(field) reproduce the scheme's
    force exactly, so the budget closes to time-discretization error.
    """
    bc_g = bc["gamma"]
    if active is None:
        active = np.ones(grid.shape, dtype=bool)
    if grid.ndim == 1:
        eps_f = ops.strain_faces_1d(U, grid.dx, bc, t)
        w_u = ops.face_weights_u_1d(bc, grid.nx, grid.dx)
        e_el = float(np.sum(elastic_energy_density(eps_f, p, model) * w_u))
        K = ops.face_conductivity_1d(active, p.k1, bc_g)
        grad = ops.gamma_grad_faces_1d(gamma, grid.dx, bc_g)
        w_g = ops.face_weights_gamma_1d(bc, grid.nx, grid.dx)
        e_grad = float(np.sum(0.5 * K * grad**2 * w_g))
        e_cell = float(np.sum(damage_potential(gamma, p) * grid.dx))
        if model == "linear" and p.b != 0.0:
            uXc = ops.strain_cells(U, grid, bc, t)
            e_cell += float(np.sum(p.b * uXc * gamma * grid.dx))
        return e_el + e_grad + e_cell
    # 2D: x-face strain energy per row, gradient energy on both face sets
    eps_f = ops.strain_faces_2d(U, grid.dx, bc, t)
    w_u = ops.face_weights_u_1d(bc, grid.nx, grid.dx)
    e_el = float(np.sum(elastic_energy_density(eps_f, p, model) * w_u[None, :]) * grid.dy)
    Kx, Ky = ops.face_conductivity_2d(active, p.k1, p.k2, bc_g)
    gx = ops.gamma_grad_xfaces_2d(gamma, grid.dx, bc_g)
    gy = ops.gamma_grad_yfaces_2d(gamma, grid.dy, bc_g)
    wx = _face_weights_gamma_axis(bc_g, grid.nx, grid.dx)
    wy = _face_weights_gamma_axis(bc_g, grid.ny, grid.dy)
    e_grad = float(np.sum(0.5 * Kx * gx**2 * wx[None, :]) * grid.dy)
    e_grad += float(np.sum(0.5 * Ky * gy**2 * wy[:, None]) * grid.dx)
    e_cell = float(np.sum(damage_potential(gamma, p)) * grid.cell_volume)
    if model == "linear" and p.b != 0.0:
        uXc = ops.strain_cells(U, grid, bc, t)
        e_cell += float(np.sum(p.b * uXc * gamma) * grid.cell_volume)
    return e_el + e_grad + e_cell


def _face_weights_gamma_axis(bc_g: dict, n: int, dh: float) -> np.ndarray:
    w = np.full(n + 1, dh)
    if bc_g["type"] == "periodic":
        w[-1] = 0.0
    else:
        w[0] = 0.5 * dh
        w[-1] = 0.5 * dh
    return w


@dataclass
class ConstitutiveEval:
    """Cell-diagnostic bundle of every derived constitutive quantity.

    psi (J/m^3), S (Pa), A (Pa), Z (Pa) are cell fields; B (Pa*m) is
    face-centered ((nx+1,) or an (x, y) pair). D_val (W/m^3) and sdot_i
    (W/(m^3 K)) satisfy sdot_i = 2*D_val/theta0 identically.
    """

    psi: np.ndarray
    S: np.ndarray
    A: np.ndarray
    B: object
    Z: np.ndarray
    D_val: np.ndarray
    sdot_i: np.ndarray


def evaluate(
    state: FieldState,
    p: MaterialParams,
    grid,
    bc: dict,
    model: str = "feng",
    gamma_dot=None,
) -> ConstitutiveEval:
    """Evaluate all derived fields for one state.

    gamma_dot defaults to the evolution law Z/lam on active cells (zero when
    lam = 0, the conservative limit).
    """
    uXc = ops.strain_cells(state.U, grid, bc, state.time)
    A, B, Z = internal_forces(
        state.gamma, p, grid, model=model, uX=uXc, bc_gamma=bc["gamma"], active=state.active
    )
    if gamma_dot is None:
        if p.lam > 0.0:
            gamma_dot = np.where(state.active, Z / p.lam, 0.0)
        else:
            gamma_dot = np.zeros_like(state.gamma)
    if grid.ndim == 1:
        gradf = ops.gamma_grad_faces_1d(state.gamma, grid.dx, bc["gamma"])
        grad_arg = 0.5 * (gradf[:-1] + gradf[1:])
    else:
        gx = ops.gamma_grad_xfaces_2d(state.gamma, grid.dx, bc["gamma"])
        gy = ops.gamma_grad_yfaces_2d(state.gamma, grid.dy, bc["gamma"])
        grad_arg = (0.5 * (gx[:, :-1] + gx[:, 1:]), 0.5 * (gy[:-1, :] + gy[1:, :]))
    psi = free_energy(uXc, state.gamma, grad_arg, p, model)
    if model == "feng" and p.source_law == "logistic":
        # swap the quadratic well for the potential actually driving the run
        psi = psi - 0.5 * p.c2 * state.gamma**2 + damage_potential(state.gamma, p)
    S = stress(uXc, state.gamma, p, model)
    D_val = dissipation(gamma_dot, p)
    return ConstitutiveEval(
        psi=psi,
        S=S,
        A=A,
        B=B,
        Z=Z,
        D_val=D_val,
        sdot_i=2.0 * D_val / p.theta0,
    )
