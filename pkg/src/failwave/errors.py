"""Exception types, split by how the CLI reports them.

ConfigError subclasses mean the scenario description itself is unusable
(exit code 1). RuntimeViolation subclasses mean a run started and then
tripped a stability or admissibility contract (exit code 2).
"""


class FailwaveError(Exception):
    pass


class ConfigError(FailwaveError):
    pass


class MissingKey(ConfigError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing required config key: {name}")


class InvalidValue(ConfigError):
    def __init__(self, name: str, reason: str):
        self.name = name
        self.reason = reason
        super().__init__(f"invalid value for {name}: {reason}")


class ShapeMismatch(ConfigError):
    def __init__(self, what: str, expected, got):
        self.what = what
        super().__init__(f"{what}: expected shape {expected}, got {got}")


class ConfigConflict(ConfigError):
    def __init__(self, reason: str):
        super().__init__(reason)


class RuntimeViolation(FailwaveError):
    pass


class CflViolation(RuntimeViolation):
    """Hyperbolic step rejected: c_max*dt/dx exceeded 1."""

    def __init__(self, dt: float, dx: float, c_max: float):
        self.dt, self.dx, self.c_max = dt, dx, c_max
        super().__init__(
            f"CFL violation: c_max*dt/dx = {c_max * dt / dx:.6g} > 1 "
            f"(dt={dt:.6g}, dx={dx:.6g}, c_max={c_max:.6g})"
        )


class DiffusionStabilityViolation(RuntimeViolation):
    """Explicit diffusion step rejected: max(d1/dx^2, d2/dy^2)*dt > 1/2."""

    def __init__(self, number: float):
        self.number = number
        super().__init__(
            f"explicit diffusion unstable: max(d/dx^2)*dt = {number:.6g} > 0.5"
        )


class SingularLambda(RuntimeViolation):
    """Parabolic stepping requested with a zero dissipation coefficient."""

    def __init__(self, msg: str = "lambda = 0: parabolic step undefined, use clifton mode"):
        super().__init__(msg)


class AdmissibilityViolation(RuntimeViolation):
    """min(Z*gamma_dot) fell below -tol: dissipation inequality broken."""

    def __init__(self, time: float, value: float, tol: float):
        self.time, self.value, self.tol = time, value, tol
        super().__init__(
            f"admissibility violated at t={time:.6g}: min Z*dGamma/dt = {value:.6g} < -{tol:.6g}"
        )


class NonpositiveSpeed(FailwaveError):
    def __init__(self, v_f: float):
        self.v_f = v_f
        super().__init__(f"front speed must be > 0, got {v_f:.6g}")


class NoFrontDetected(FailwaveError):
    def __init__(self, msg: str = "level crossing found in fewer than 5 snapshots"):
        super().__init__(msg)


class NoPlateau(FailwaveError):
    def __init__(self, msg: str = "gauge trace not settled: last 10% varies by more than 5%"):
        super().__init__(msg)


class TooFewLevels(FailwaveError):
    def __init__(self, n: int):
        super().__init__(f"trajectory needs >= 3 time levels, got {n}")


class SingularBasis(FailwaveError):
    def __init__(self, cond: float):
        self.cond = cond
        super().__init__(f"basis Gram matrix ill-conditioned: cond = {cond:.3e} > 1e12")
