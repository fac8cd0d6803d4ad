"""Discrete variational verifier.

Treats a recorded trajectory as a candidate stationary point of the discrete
action (free energy minus kinetic energy, plus the rate-potential term for
the damage field) and measures how far it is from satisfying the centered
Euler-Lagrange equations. Three views of the same residual:

  * field form: pointwise residuals of the displacement and damage equations,
  * generalized form: weighted residuals against a reduced basis,
  * action form: the exact first variation against a chosen perturbation.

The displacement residual of the shipped velocity-Verlet integrator vanishes
to roundoff; the damage residual is second order in dt, so refining dt by 2x
shrinks it by 4x. That contrast is the verifier's calibration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import constitutive as cst
from . import ops
from .errors import (
    ConfigConflict,
    InvalidValue,
    ShapeMismatch,
    SingularBasis,
    TooFewLevels,
)
from .model import ScenarioConfig, initialize_state
from .solver import _stress_faces, step_damage, step_elastic


@dataclass
class DiscreteTrajectory:
    """Uniformly spaced time levels of a run: fields plus activation masks.

    times has shape (nlev,); U, v, gamma are (nlev, nx) and active is the
    matching bool array. dt_level is the level spacing (stride * cfg.dt).
    """

    cfg: ScenarioConfig
    times: np.ndarray
    U: np.ndarray
    v: np.ndarray
    gamma: np.ndarray
    active: np.ndarray
    dt_level: float

    @property
    def nlev(self) -> int:
        return int(self.times.size)


def record_trajectory(cfg: ScenarioConfig, stride: int = 1) -> DiscreteTrajectory:
    """Integrate a coupled scenario and keep every stride-th time level.

    Uses the production substeps (elastic, threshold activation, damage)
    directly, so the recorded states are bit-identical to a solver run.
    """
    if cfg.kind != "coupled":
        raise ConfigConflict("variational recording needs the coupled integrator")
    if stride < 1:
        raise InvalidValue("stride", "must be >= 1")
    p = cfg.material
    grid = cfg.grid
    dt = cfg.dt
    nsteps = max(1, int(round(cfg.t_end / dt)))
    if nsteps // stride + 1 < 3:
        raise TooFewLevels(nsteps // stride + 1)
    state = initialize_state(cfg)

    times: List[float] = [0.0]
    U_hist = [state.U.copy()]
    v_hist = [state.v.copy()]
    g_hist = [state.gamma.copy()]
    a_hist = [state.active.copy()]
    for k in range(1, nsteps + 1):
        U_new, v_new, _ = step_elastic(state, cfg)
        state.U = U_new
        state.v = v_new
        state.time = k * dt
        uXc = ops.strain_cells(state.U, grid, cfg.bc, state.time)
        S_cells = np.asarray(cst.stress(uXc, state.gamma, p, p.model))
        if p.sigma0 > 0.0:
            state.active = state.active | (np.abs(S_cells) >= p.sigma0)
        else:
            state.active = np.ones(grid.shape, dtype=bool)
        state.gamma, _ = step_damage(state, cfg, uX=uXc)
        if k % stride == 0:
            times.append(state.time)
            U_hist.append(state.U.copy())
            v_hist.append(state.v.copy())
            g_hist.append(state.gamma.copy())
            a_hist.append(state.active.copy())
    return DiscreteTrajectory(
        cfg=cfg,
        times=np.asarray(times),
        U=np.asarray(U_hist),
        v=np.asarray(v_hist),
        gamma=np.asarray(g_hist),
        active=np.asarray(a_hist),
        dt_level=stride * dt,
    )


@dataclass(frozen=True)
class Functionals:
    """Global kinetic energy, free energy, and dissipation rate (per unit
    cross-section)."""

    kinetic: float
    free_energy: float
    dissipation: float


def total_functionals(state, cfg: ScenarioConfig, gamma_dot=None) -> Functionals:
    """K = (rho0/2) integral v^2, psi with the budget quadrature, and D =
    (lam/2) integral gamma_dot^2 (zero when no rate is supplied)."""
    p = cfg.material
    grid = cfg.grid
    kin = float(0.5 * p.rho0 * np.sum(state.v**2) * grid.cell_volume)
    free = cst.total_free_energy(
        state.U, state.gamma, p, grid, cfg.bc, state.time, p.model, state.active
    )
    if gamma_dot is None:
        dis = 0.0
    else:
        dis = float(np.sum(cst.dissipation(gamma_dot, p)) * grid.cell_volume)
    return Functionals(kinetic=kin, free_energy=free, dissipation=dis)


# -- field-form residuals ------------------------------------------------------


def _require_levels(traj: DiscreteTrajectory, n: int = 3) -> None:
    if traj.nlev < n:
        raise TooFewLevels(traj.nlev)


def _scheme_div_stress(traj: DiscreteTrajectory, k: int) -> np.ndarray:
    cfg = traj.cfg
    S = _stress_faces(traj.U[k], traj.gamma[k], traj.times[k], cfg)
    return ops.div_faces_1d(S, cfg.grid.dx)


@dataclass
class LagrangeResidual:
    """Centered Euler-Lagrange residuals at the interior time levels.

    resid_U rows are rho0*U_tt - dS/dX - rho0*r (N/m^3); resid_gamma rows are
    lam*dGamma/dt - Z (Pa). norms_* are the discrete L2 norms per level.
    """

    times: np.ndarray
    resid_U: np.ndarray
    resid_gamma: np.ndarray
    norms_U: np.ndarray
    norms_gamma: np.ndarray

    @property
    def norms_combined(self) -> np.ndarray:
        return np.sqrt(self.norms_U**2 + self.norms_gamma**2)


def lagrange_residual(traj: DiscreteTrajectory) -> LagrangeResidual:
    """Field-form verification of a recorded trajectory.

    The displacement residual uses the same face stresses (ghosts, traction
    overrides) as the integrator, so at stride 1 the velocity-Verlet update
    telescopes to the centered three-level scheme and the residual is pure
    roundoff. The damage residual compares the centered rate against Z at the
    level itself; Crank-Nicolson leaves a (dt^2/4)*d2Z/dt2 remainder. Models
    whose stress depends on damage (b != 0) see the operator-splitting lag in
    the displacement residual at first order in dt.
    """
    _require_levels(traj)
    cfg = traj.cfg
    p = cfg.material
    grid = cfg.grid
    if grid.ndim != 1:
        raise InvalidValue("grid", "the verifier handles 1D trajectories")
    dt = traj.dt_level
    dx = grid.dx
    n = traj.nlev
    rU, rG, nU, nG = [], [], [], []
    for k in range(1, n - 1):
        Utt = (traj.U[k + 1] - 2.0 * traj.U[k] + traj.U[k - 1]) / dt**2
        divS = _scheme_div_stress(traj, k)
        resU = p.rho0 * Utt - divS - p.rho0 * cfg.body_force
        uXc = ops.strain_cells(traj.U[k], grid, cfg.bc, traj.times[k])
        _, _, Z = cst.internal_forces(
            traj.gamma[k], p, grid, model=p.model, uX=uXc,
            bc_gamma=cfg.bc["gamma"], active=traj.active[k],
        )
        gdot = (traj.gamma[k + 1] - traj.gamma[k - 1]) / (2.0 * dt)
        resG = p.lam * gdot - np.where(traj.active[k], Z, 0.0)
        rU.append(resU)
        rG.append(resG)
        nU.append(float(np.sqrt(np.sum(resU**2) * dx)))
        nG.append(float(np.sqrt(np.sum(resG**2) * dx)))
    return LagrangeResidual(
        times=traj.times[1:-1],
        resid_U=np.asarray(rU),
        resid_gamma=np.asarray(rG),
        norms_U=np.asarray(nU),
        norms_gamma=np.asarray(nG),
    )


def dissipation_variation(traj: DiscreteTrajectory, delta_gamma: np.ndarray) -> np.ndarray:
    """First variation of the dissipation functional along delta_gamma at
    each interior level: integral lam * dGamma/dt * delta_gamma dV, with the
    centered rate (units W/m^2 per unit delta)."""
    _require_levels(traj)
    grid = traj.cfg.grid
    delta_gamma = np.asarray(delta_gamma, dtype=float)
    if delta_gamma.shape != grid.shape:
        raise ShapeMismatch("delta_gamma", grid.shape, delta_gamma.shape)
    p = traj.cfg.material
    dt = traj.dt_level
    out = []
    for k in range(1, traj.nlev - 1):
        gdot = (traj.gamma[k + 1] - traj.gamma[k - 1]) / (2.0 * dt)
        out.append(float(np.sum(p.lam * gdot * delta_gamma) * grid.cell_volume))
    return np.asarray(out)


# -- generalized (reduced) form ------------------------------------------------


@dataclass
class Basis:
    """Reduction basis: mode i pairs a displacement shape phi_U[i] with a
    damage shape phi_G[i] (either may be zero)."""

    phi_U: np.ndarray  # (m, nx)
    phi_G: np.ndarray  # (m, nx)

    @property
    def nmodes(self) -> int:
        return int(self.phi_U.shape[0])


def nodal_basis(grid) -> Basis:
    """One mode per displacement node plus one per damage node; reduction
    with this basis reproduces the field residuals exactly (scaled by dx)."""
    nx = grid.nx
    eye = np.eye(nx)
    zero = np.zeros((nx, nx))
    return Basis(
        phi_U=np.vstack([eye, zero]),
        phi_G=np.vstack([zero, eye]),
    )


def sine_basis(grid, nmodes: int) -> Basis:
    """Smooth global reduction: sin(i pi x / L) shapes, one displacement and
    one damage mode per wavenumber (2*nmodes modes total)."""
    x = grid.cell_centers()
    L = grid.length
    rows = [np.sin(i * np.pi * (x - grid.origin) / L) for i in range(1, nmodes + 1)]
    zero = np.zeros_like(x)
    phi_U = []
    phi_G = []
    for r in rows:
        phi_U.extend([r, zero])
        phi_G.extend([zero, r])
    return Basis(phi_U=np.asarray(phi_U), phi_G=np.asarray(phi_G))


@dataclass
class GeneralizedSystem:
    """Reduced trajectory q(t) with its mass/damping matrices, energy
    gradients, and generalized forces, ready for residual evaluation."""

    basis: Basis
    times: np.ndarray
    dt_level: float
    q: np.ndarray  # (nlev, m)
    M: np.ndarray  # (m, m) inertia
    C: np.ndarray  # (m, m) dissipation
    gram: np.ndarray  # (m, m) projection Gram matrix
    grad_psi: np.ndarray  # (nlev, m)
    Q: np.ndarray  # (nlev, m) boundary + body generalized forces


def reduce_to_generalized(traj: DiscreteTrajectory, basis: Basis) -> GeneralizedSystem:
    """Galerkin reduction of a recorded trajectory onto a basis.

    The free-energy gradient keeps interior faces only; everything the
    boundary contributes (scheme face stresses, damage boundary fluxes, body
    force) lands in the generalized force Q, so dropping Q breaks the budget
    visibly rather than silently.
    """
    _require_levels(traj)
    cfg = traj.cfg
    p = cfg.material
    grid = cfg.grid
    if grid.ndim != 1:
        raise InvalidValue("grid", "generalized reduction handles 1D trajectories")
    if p.model == "linear" and p.b != 0.0:
        raise ConfigConflict(
            "generalized reduction needs b = 0; the strain-damage cross term "
            "has no interior/boundary split in this quadrature"
        )
    dx = grid.dx
    phi_U, phi_G = basis.phi_U, basis.phi_G
    gram = (phi_U @ phi_U.T + phi_G @ phi_G.T) * dx
    cond = float(np.linalg.cond(gram))
    if cond > 1e12:
        raise SingularBasis(cond)
    M = p.rho0 * (phi_U @ phi_U.T) * dx
    C = p.lam * (phi_G @ phi_G.T) * dx

    n = traj.nlev
    q = np.empty((n, basis.nmodes))
    grad_psi = np.empty((n, basis.nmodes))
    Q = np.empty((n, basis.nmodes))
    bc_g = cfg.bc["gamma"]
    for k in range(n):
        U, gamma, t = traj.U[k], traj.gamma[k], traj.times[k]
        q[k] = np.linalg.solve(gram, (phi_U @ U + phi_G @ gamma) * dx)

        S = _stress_faces(U, gamma, t, cfg)
        S_int = S.copy()
        S_int[0] = 0.0
        S_int[-1] = 0.0
        div_int_S = ops.div_faces_1d(S_int, dx)

        uXc = ops.strain_cells(U, grid, cfg.bc, t)
        A, B, _ = cst.internal_forces(
            gamma, p, grid, model=p.model, uX=uXc, bc_gamma=bc_g, active=traj.active[k]
        )
        B_int = np.asarray(B).copy()
        B_int[0] = 0.0
        B_int[-1] = 0.0
        Z_int = np.where(traj.active[k], A, 0.0) - ops.div_faces_1d(B_int, dx)

        grad_psi[k] = -dx * (phi_U @ div_int_S + phi_G @ Z_int)
        Q[k] = (
            S[-1] * phi_U[:, -1]
            - S[0] * phi_U[:, 0]
            - (B[-1] * phi_G[:, -1] + (-B[0]) * phi_G[:, 0])
            + p.rho0 * cfg.body_force * np.sum(phi_U, axis=1) * dx
        )
    return GeneralizedSystem(
        basis=basis,
        times=traj.times.copy(),
        dt_level=traj.dt_level,
        q=q,
        M=M,
        C=C,
        gram=gram,
        grad_psi=grad_psi,
        Q=Q,
    )


@dataclass
class GeneralizedResidual:
    times: np.ndarray
    R: np.ndarray  # (nlev-2, m) residual components
    norms: np.ndarray  # dual (Gram-weighted) norms per level


def generalized_residual(sys: GeneralizedSystem, Q: Optional[np.ndarray] = None) -> GeneralizedResidual:
    """R(k) = M q_tt + C q_t + grad_psi - Q at the interior levels, with the
    dual norm sqrt(R^T G^-1 R) so nodal reduction reports the field L2 norm.

    Pass Q to override the stored generalized forces (e.g. zeros, to measure
    how much the boundary terms carry)."""
    if Q is None:
        Q = sys.Q
    dt = sys.dt_level
    n = sys.q.shape[0]
    if n < 3:
        raise TooFewLevels(n)
    rows = []
    norms = []
    for k in range(1, n - 1):
        qtt = (sys.q[k + 1] - 2.0 * sys.q[k] + sys.q[k - 1]) / dt**2
        qt = (sys.q[k + 1] - sys.q[k - 1]) / (2.0 * dt)
        R = sys.M @ qtt + sys.C @ qt + sys.grad_psi[k] - Q[k]
        rows.append(R)
        norms.append(float(np.sqrt(max(R @ np.linalg.solve(sys.gram, R), 0.0))))
    return GeneralizedResidual(
        times=sys.times[1:-1], R=np.asarray(rows), norms=np.asarray(norms)
    )


# -- action form ---------------------------------------------------------------


def discrete_action(traj: DiscreteTrajectory) -> float:
    """Action sum I = sum_k dt * [psi(U_k, Gamma_k) - rho0*r.U_k - K_(k+1/2)]
    with the midpoint kinetic energy K_(k+1/2) built from forward
    differences. The damage rate term enters only through the variation."""
    cfg = traj.cfg
    p = cfg.material
    grid = cfg.grid
    dt = traj.dt_level
    dx = grid.dx
    n = traj.nlev
    action = 0.0
    for k in range(n):
        psi = cst.total_free_energy(
            traj.U[k], traj.gamma[k], p, grid, cfg.bc, traj.times[k], p.model, traj.active[k]
        )
        ext = p.rho0 * cfg.body_force * float(np.sum(traj.U[k]) * dx)
        action += dt * (psi - ext)
    for k in range(n - 1):
        du = (traj.U[k + 1] - traj.U[k]) / dt
        action -= dt * float(0.5 * p.rho0 * np.sum(du**2) * dx)
    return action


def action_first_variation(
    traj: DiscreteTrajectory, delta_U: np.ndarray, delta_gamma: np.ndarray
):
    """Exact directional derivative of the discrete action along a space-time
    perturbation, plus the Biot rate term for the damage field.

    Returns (delta_I, inner) where inner = sum_k dt * integral (resid_U *
    delta_U + resid_gamma * delta_gamma) dV over the interior levels. For
    perturbations vanishing at the first/last level and in the boundary
    cells, summation by parts makes the two equal to roundoff; that identity
    is the verifier's self-test.
    """
    _require_levels(traj)
    cfg = traj.cfg
    p = cfg.material
    grid = cfg.grid
    dt = traj.dt_level
    dx = grid.dx
    n = traj.nlev
    delta_U = np.asarray(delta_U, dtype=float)
    delta_gamma = np.asarray(delta_gamma, dtype=float)
    if delta_U.shape != traj.U.shape:
        raise ShapeMismatch("delta_U", traj.U.shape, delta_U.shape)
    if delta_gamma.shape != traj.gamma.shape:
        raise ShapeMismatch("delta_gamma", traj.gamma.shape, delta_gamma.shape)

    w_u = ops.face_weights_u_1d(cfg.bc, grid.nx, dx)
    w_g = ops.face_weights_gamma_1d(cfg.bc, grid.nx, dx)
    bc_g = cfg.bc["gamma"]

    delta_I = 0.0
    for k in range(1, n - 1):
        U, gamma, t = traj.U[k], traj.gamma[k], traj.times[k]
        dU, dG = delta_U[k], delta_gamma[k]
        # face terms; perturbations are interior so boundary-face variations vanish
        S = _stress_faces(U, gamma, t, cfg)
        duX = np.zeros(grid.nx + 1)
        duX[1:-1] = np.diff(dU) / dx
        dpsi = float(np.sum(w_u * S * duX))
        K = ops.face_conductivity_1d(traj.active[k], p.k1, bc_g)
        gradf = ops.gamma_grad_faces_1d(gamma, dx, bc_g)
        dgrad = np.zeros(grid.nx + 1)
        dgrad[1:-1] = np.diff(dG) / dx
        dpsi += float(np.sum(w_g * K * gradf * dgrad))
        uXc = ops.strain_cells(U, grid, cfg.bc, t)
        A = cst.damage_force(gamma, p, model=p.model, uX=uXc)
        dpsi += float(np.sum(-np.where(traj.active[k], A, 0.0) * dG) * dx)

        gdot = (traj.gamma[k + 1] - traj.gamma[k - 1]) / (2.0 * dt)
        biot = float(np.sum(p.lam * gdot * dG) * dx)
        ext = p.rho0 * cfg.body_force * float(np.sum(dU) * dx)
        delta_I += dt * (dpsi + biot - ext)
    for k in range(n - 1):
        du = (traj.U[k + 1] - traj.U[k]) / dt
        ddu = (delta_U[k + 1] - delta_U[k]) / dt
        delta_I -= dt * float(p.rho0 * np.sum(du * ddu) * dx)

    res = lagrange_residual(traj)
    inner = 0.0
    for i, k in enumerate(range(1, n - 1)):
        inner += dt * float(
            np.sum(res.resid_U[i] * delta_U[k] + res.resid_gamma[i] * delta_gamma[k]) * dx
        )
    return delta_I, inner
