"""Discrete grid operators: ghost cells, face gradients, divergence, face
quadrature weights, and banded parabolic solves.

Fields live at cell centers; strains, fluxes, and conductivities live at
faces. The face gradient and the cell divergence form a summation-by-parts
pair,

    sum_i (div F)_i u_i dx = -sum_f F_f (grad u)_f dx + F_R u_{N-1} - F_L u_0,

with the boundary value taken from the adjacent cell. That adjointness makes
the discrete damage force exactly the gradient of the discrete free energy,
which the variational checks depend on.

All functions are pure: arrays in, arrays out.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

# -- boundary-condition protocol helpers ------------------------------------


def traction_at(spec: dict, t: float) -> float:
    """Prescribed boundary stress (Pa) at time t, with optional linear ramp
    and optional shutoff time after which the face is traction-free."""
    T = spec["value"]
    ramp = spec.get("ramp", 0.0)
    if ramp > 0.0:
        T *= min(1.0, t / ramp)
    if "until" in spec and t > spec["until"]:
        T = 0.0
    return T


def wall_displacement(spec: dict, t: float) -> float:
    """Prescribed boundary displacement (m): fixed value, or velocity*t."""
    if spec["type"] == "velocity":
        return spec["value"] * t
    return spec["value"]


# -- 1D strain at faces ------------------------------------------------------


def strain_faces_1d(U: np.ndarray, dx: float, bc: dict, t: float) -> np.ndarray:
    """Face strains (U_{i+1} - U_i)/dx, shape (nx+1,).

    fixed/velocity walls use the mirror ghost 2g - U_adj, so the boundary
    face strain is 2(U_adj - g)/dx (toward the wall at the right end).
    free faces carry strain 0; traction faces copy the nearest interior
    face (a placeholder: their stress is prescribed, not computed, and
    they are excluded from the energy quadrature).
    """
    nx = U.shape[-1]
    eps = np.empty(nx + 1)
    eps[1:nx] = (U[1:] - U[:-1]) / dx
    lt, rt = bc["u_left"]["type"], bc["u_right"]["type"]
    if lt == "periodic":
        eps[0] = (U[0] - U[-1]) / dx
        eps[nx] = eps[0]
        return eps
    if lt in ("fixed", "velocity"):
        g = wall_displacement(bc["u_left"], t)
        eps[0] = 2.0 * (U[0] - g) / dx
    elif lt == "free":
        eps[0] = 0.0
    else:  # traction
        eps[0] = eps[1]
    if rt in ("fixed", "velocity"):
        g = wall_displacement(bc["u_right"], t)
        eps[nx] = 2.0 * (g - U[-1]) / dx
    elif rt == "free":
        eps[nx] = 0.0
    else:
        eps[nx] = eps[nx - 1]
    return eps


def strain_faces_2d(U: np.ndarray, dx: float, bc: dict, t: float) -> np.ndarray:
    """x-direction face strains row by row, shape (ny, nx+1)."""
    ny, nx = U.shape
    eps = np.empty((ny, nx + 1))
    eps[:, 1:nx] = (U[:, 1:] - U[:, :-1]) / dx
    lt, rt = bc["u_left"]["type"], bc["u_right"]["type"]
    if lt == "periodic":
        eps[:, 0] = (U[:, 0] - U[:, -1]) / dx
        eps[:, nx] = eps[:, 0]
        return eps
    if lt in ("fixed", "velocity"):
        g = wall_displacement(bc["u_left"], t)
        eps[:, 0] = 2.0 * (U[:, 0] - g) / dx
    elif lt == "free":
        eps[:, 0] = 0.0
    else:
        eps[:, 0] = eps[:, 1]
    if rt in ("fixed", "velocity"):
        g = wall_displacement(bc["u_right"], t)
        eps[:, nx] = 2.0 * (g - U[:, -1]) / dx
    elif rt == "free":
        eps[:, nx] = 0.0
    else:
        eps[:, nx] = eps[:, nx - 1]
    return eps


def strain_faces(U: np.ndarray, grid, bc: dict, t: float) -> np.ndarray:
    if grid.ndim == 1:
        return strain_faces_1d(U, grid.dx, bc, t)
    return strain_faces_2d(U, grid.dx, bc, t)


def strain_cells(U: np.ndarray, grid, bc: dict, t: float) -> np.ndarray:
    """Cell-centered strain: mean of the two adjacent face strains."""
    eps = strain_faces(U, grid, bc, t)
    if grid.ndim == 1:
        return 0.5 * (eps[:-1] + eps[1:])
    return 0.5 * (eps[:, :-1] + eps[:, 1:])


def override_stress_faces(S_faces: np.ndarray, bc: dict, t: float) -> np.ndarray:
    """Replace boundary-face stress with prescribed values: 0 on free faces,
    the traction protocol value on traction faces. In place; returns input."""
    for side, idx in (("u_left", 0), ("u_right", -1)):
        spec = bc[side]
        if spec["type"] == "free":
            S_faces[..., idx] = 0.0
        elif spec["type"] == "traction":
            S_faces[..., idx] = traction_at(spec, t)
    return S_faces


def div_faces_1d(F: np.ndarray, dx: float) -> np.ndarray:
    return (F[1:] - F[:-1]) / dx


# -- damage field: face values, gradients, conductivity ----------------------


def _gamma_ghosts_1d(gamma: np.ndarray, bc_g: dict):
    """Ghost cell values implied by the damage boundary condition."""
    kind = bc_g["type"]
    if kind == "periodic":
        return gamma[..., -1], gamma[..., 0]
    if kind == "dirichlet":
        g = bc_g.get("value", 0.0)
        return 2.0 * g - gamma[..., 0], 2.0 * g - gamma[..., -1]
    # zero_flux: even reflection
    return gamma[..., 0], gamma[..., -1]


def gamma_grad_faces_1d(gamma: np.ndarray, dx: float, bc_g: dict) -> np.ndarray:
    """Face gradients (Γ_{i+1} - Γ_i)/dx with BC ghosts, shape (nx+1,)."""
    nx = gamma.shape[0]
    grad = np.empty(nx + 1)
    grad[1:nx] = (gamma[1:] - gamma[:-1]) / dx
    gl, gr = _gamma_ghosts_1d(gamma, bc_g)
    grad[0] = (gamma[0] - gl) / dx
    grad[nx] = (gr - gamma[-1]) / dx
    return grad


def gamma_face_values_1d(gamma: np.ndarray, bc_g: dict) -> np.ndarray:
    """Face-centered Γ: mean of adjacent cells (ghosts at the boundary, so a
    dirichlet face carries exactly its prescribed value)."""
    nx = gamma.shape[0]
    out = np.empty(nx + 1)
    out[1:nx] = 0.5 * (gamma[1:] + gamma[:-1])
    gl, gr = _gamma_ghosts_1d(gamma, bc_g)
    out[0] = 0.5 * (gamma[0] + gl)
    out[nx] = 0.5 * (gamma[-1] + gr)
    return out


def face_conductivity_1d(active: np.ndarray, k: float, bc_g: dict) -> np.ndarray:
    """Face conductivity, zero unless both adjacent cells are active.

    Boundary faces follow the single adjacent cell (periodic wraps)."""
    nx = active.shape[0]
    K = np.zeros(nx + 1)
    both = active[1:] & active[:-1]
    K[1:nx] = np.where(both, k, 0.0)
    if bc_g["type"] == "periodic":
        wrap = k if (active[0] and active[-1]) else 0.0
        K[0] = wrap
        K[nx] = wrap
    else:
        K[0] = k if active[0] else 0.0
        K[nx] = k if active[-1] else 0.0
    return K


def damage_flux_div_1d(
    gamma: np.ndarray, K_faces: np.ndarray, dx: float, bc_g: dict
) -> np.ndarray:
    """Div(K grad Γ) at cells; equals -Div(B) with B = -K grad Γ."""
    F = K_faces * gamma_grad_faces_1d(gamma, dx, bc_g)
    return div_faces_1d(F, dx)


# 2D variants: x index last, arrays (ny, nx); x-faces (ny, nx+1), y-faces (ny+1, nx).


def gamma_grad_xfaces_2d(gamma: np.ndarray, dx: float, bc_g: dict) -> np.ndarray:
    ny, nx = gamma.shape
    grad = np.empty((ny, nx + 1))
    grad[:, 1:nx] = (gamma[:, 1:] - gamma[:, :-1]) / dx
    kind = bc_g["type"]
    if kind == "periodic":
        grad[:, 0] = (gamma[:, 0] - gamma[:, -1]) / dx
        grad[:, nx] = grad[:, 0]
    elif kind == "dirichlet":
        g = bc_g.get("value", 0.0)
        grad[:, 0] = 2.0 * (gamma[:, 0] - g) / dx
        grad[:, nx] = 2.0 * (g - gamma[:, -1]) / dx
    else:
        grad[:, 0] = 0.0
        grad[:, nx] = 0.0
    return grad


def gamma_grad_yfaces_2d(gamma: np.ndarray, dy: float, bc_g: dict) -> np.ndarray:
    return gamma_grad_xfaces_2d(gamma.T, dy, bc_g).T


def face_conductivity_2d(active: np.ndarray, k1: float, k2: float, bc_g: dict):
    """(Kx on x-faces, Ky on y-faces); zero where either neighbor is inactive."""
    ny, nx = active.shape
    Kx = np.zeros((ny, nx + 1))
    Kx[:, 1:nx] = np.where(active[:, 1:] & active[:, :-1], k1, 0.0)
    Ky = np.zeros((ny + 1, nx))
    Ky[1:ny, :] = np.where(active[1:, :] & active[:-1, :], k2, 0.0)
    if bc_g["type"] == "periodic":
        wx = np.where(active[:, 0] & active[:, -1], k1, 0.0)
        Kx[:, 0] = wx
        Kx[:, nx] = wx
        wy = np.where(active[0, :] & active[-1, :], k2, 0.0)
        Ky[0, :] = wy
        Ky[ny, :] = wy
    else:
        Kx[:, 0] = np.where(active[:, 0], k1, 0.0)
        Kx[:, nx] = np.where(active[:, -1], k1, 0.0)
        Ky[0, :] = np.where(active[0, :], k2, 0.0)
        Ky[ny, :] = np.where(active[-1, :], k2, 0.0)
    return Kx, Ky


def damage_flux_div_2d(gamma, Kx, Ky, dx: float, dy: float, bc_g: dict) -> np.ndarray:
    Fx = Kx * gamma_grad_xfaces_2d(gamma, dx, bc_g)
    Fy = Ky * gamma_grad_yfaces_2d(gamma, dy, bc_g)
    return (Fx[:, 1:] - Fx[:, :-1]) / dx + (Fy[1:, :] - Fy[:-1, :]) / dy


def damage_flux_div(gamma, K, grid, bc_g: dict) -> np.ndarray:
    if grid.ndim == 1:
        return damage_flux_div_1d(gamma, K, grid.dx, bc_g)
    Kx, Ky = K
    return damage_flux_div_2d(gamma, Kx, Ky, grid.dx, grid.dy, bc_g)


# -- energy quadrature weights ----------------------------------------------


def face_weights_u_1d(bc: dict, nx: int, dx: float) -> np.ndarray:
    """Quadrature weights for face-centered elastic energy density.

    Interior faces weigh dx. Displacement walls (fixed/velocity) weigh dx/2,
    which makes the semi-discrete power balance exact against the mirror
    ghost. Free and traction faces are excluded (their work enters the budget
    through the boundary-work term instead). Periodic counts nx unique faces.
    """
    w = np.full(nx + 1, dx)
    if bc["u_left"]["type"] == "periodic":
        w[-1] = 0.0
        return w
    for side, idx in (("u_left", 0), ("u_right", -1)):
        kind = bc[side]["type"]
        w[idx] = 0.5 * dx if kind in ("fixed", "velocity") else 0.0
    return w


def face_weights_gamma_1d(bc: dict, nx: int, dx: float) -> np.ndarray:
    """Same rule for the damage-gradient energy: dirichlet walls dx/2,
    zero-flux walls dx/2 (their gradient is zero anyway), periodic wraps."""
    w = np.full(nx + 1, dx)
    if bc["gamma"]["type"] == "periodic":
        w[-1] = 0.0
    else:
        w[0] = 0.5 * dx
        w[-1] = 0.5 * dx
    return w


# -- banded parabolic solves --------------------------------------------------


def solve_tridiag(sub: np.ndarray, diag: np.ndarray, sup: np.ndarray, rhs: np.ndarray):
    """Solve a tridiagonal system; sub[0] and sup[-1] are ignored."""
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = sup[:-1]
    ab[1, :] = diag
    ab[2, :-1] = sub[1:]
    return solve_banded((1, 1), ab, rhs)


def solve_cyclic_tridiag(sub, diag, sup, corner_ul, corner_lr, rhs):
    """Cyclic tridiagonal solve via the Sherman-Morrison rank-1 update.

    corner_ul = A[0, n-1], corner_lr = A[n-1, 0].
    """
    n = diag.shape[0]
    gamma = -diag[0]
    d = diag.copy()
    d[0] -= gamma
    d[-1] -= corner_ul * corner_lr / gamma
    x1 = solve_tridiag(sub, d, sup, rhs)
    u = np.zeros(n)
    u[0] = gamma
    u[-1] = corner_lr
    x2 = solve_tridiag(sub, d, sup, u)
    v_dot_x1 = x1[0] + (corner_ul / gamma) * x1[-1]
    v_dot_x2 = x2[0] + (corner_ul / gamma) * x2[-1]
    return x1 - x2 * (v_dot_x1 / (1.0 + v_dot_x2))


def cn_damage_step_1d(
    gamma: np.ndarray,
    K_faces: np.ndarray,
    react: np.ndarray,
    source: np.ndarray,
    lam: float,
    dt: float,
    dx: float,
    bc_g: dict,
) -> np.ndarray:
    """One Crank-Nicolson step of lam*dΓ/dt = d/dx(K dΓ/dx) - react*Γ + source.

    react and source must already be zero on inactive cells and K_faces zero
    on their faces, so frozen cells reduce to the identity row. Dirichlet
    values enter through the K-weighted ghost; periodic wraps via a cyclic
    solve. Unconditionally stable; source is held fixed over the step (the
    caller iterates for nonlinear sources).
    """
    nx = gamma.shape[0]
    a = lam / dt
    kind = bc_g["type"]
    # interior coupling coefficients K_f/dx^2
    cl = K_faces[:-1] / dx**2  # left face of each cell
    cr = K_faces[1:] / dx**2  # right face
    if kind == "zero_flux":
        cl[0] = 0.0  # no flux through the walls
        cr[-1] = 0.0
    diag = a + 0.5 * react + 0.5 * (cl + cr)
    sub = np.zeros(nx)
    sup = np.zeros(nx)
    sub[1:] = -0.5 * cl[1:]
    sup[:-1] = -0.5 * cr[:-1]
    rhs = (a - 0.5 * react) * gamma + source
    # explicit half of the diffusion operator
    rhs += 0.5 * damage_flux_div_1d(gamma, K_faces, dx, bc_g)
    if kind == "dirichlet":
        g = bc_g.get("value", 0.0)
        # ghost 2g - Γ_adj doubles the wall coupling and adds a constant
        diag[0] += 0.5 * cl[0]  # total 2*K/dx^2 on the wall side
        diag[-1] += 0.5 * cr[-1]
        rhs[0] += cl[0] * g
        rhs[-1] += cr[-1] * g
        return solve_tridiag(sub, diag, sup, rhs)
    if kind == "periodic":
        corner = -0.5 * K_faces[0] / dx**2
        return solve_cyclic_tridiag(sub, diag, sup, corner, corner, rhs)
    # zero_flux: boundary faces carry no flux; nothing to add
    return solve_tridiag(sub, diag, sup, rhs)


def _adi_line_solve(gamma_line, K_line, react_line, rhs, a, dh, bc_kind, g_val):
    """Implicit half of one ADI sweep: solve (a + react/2 - L) x = rhs along
    one grid line, with L the full flux-divergence operator in that direction.
    """
    n = gamma_line.shape[0]
    cl = K_line[:-1] / dh**2
    cr = K_line[1:] / dh**2
    if bc_kind == "zero_flux":
        cl[0] = 0.0
        cr[-1] = 0.0
    diag = a + 0.5 * react_line + cl + cr
    sub = np.zeros(n)
    sup = np.zeros(n)
    sub[1:] = -cl[1:]
    sup[:-1] = -cr[:-1]
    if bc_kind == "dirichlet":
        # ghost 2*g_val - gamma_adj folds into the diagonal and the rhs
        diag[0] += cl[0]
        diag[-1] += cr[-1]
        rhs = rhs.copy()
        rhs[0] += 2.0 * cl[0] * g_val
        rhs[-1] += 2.0 * cr[-1] * g_val
        return solve_tridiag(sub, diag, sup, rhs)
    if bc_kind == "periodic":
        corner = -K_line[0] / dh**2
        return solve_cyclic_tridiag(sub, diag, sup, corner, corner, rhs)
    return solve_tridiag(sub, diag, sup, rhs)


def adi_damage_step_2d(
    gamma: np.ndarray,
    Kx: np.ndarray,
    Ky: np.ndarray,
    react: np.ndarray,
    source: np.ndarray,
    lam: float,
    dt: float,
    dx: float,
    dy: float,
    bc_g: dict,
) -> np.ndarray:
    """Peaceman-Rachford ADI step of the 2D damage equation.

    Two half steps of length dt/2: the first implicit in x and explicit in y,
    the second the reverse. The linear reaction is split evenly across both
    sides of each half step and the source enters each half step in full.
    """
    ny, nx = gamma.shape
    a = 2.0 * lam / dt  # lam / (dt/2)
    kind = bc_g["type"]
    g_val = bc_g.get("value", 0.0)

    def div_x(g):
        Fx = Kx * gamma_grad_xfaces_2d(g, dx, bc_g)
        return (Fx[:, 1:] - Fx[:, :-1]) / dx

    def div_y(g):
        Fy = Ky * gamma_grad_yfaces_2d(g, dy, bc_g)
        return (Fy[1:, :] - Fy[:-1, :]) / dy

    # sweep 1: (a + react/2 - Lx) star = (a - react/2) gamma + Ly gamma + source
    rhs = (a - 0.5 * react) * gamma + div_y(gamma) + source
    star = np.empty_like(gamma)
    for j in range(ny):
        star[j, :] = _adi_line_solve(
            gamma[j, :], Kx[j, :], react[j, :], rhs[j, :], a, dx, kind, g_val
        )
    # sweep 2: (a + react/2 - Ly) out = (a - react/2) star + Lx star + source
    rhs = (a - 0.5 * react) * star + div_x(star) + source
    out = np.empty_like(gamma)
    for i in range(nx):
        out[:, i] = _adi_line_solve(
            star[:, i], Ky[:, i], react[:, i], rhs[:, i], a, dy, kind, g_val
        )
    return out
