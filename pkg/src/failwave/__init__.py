"""Continuum failure-wave toolkit: a coupled hyperbolic elastic / parabolic
damage system with energy bookkeeping, deflagration-style front metrics, and
a discrete variational verifier."""

from .analysis import (
    MATERIAL_PRESETS,
    ConvergenceStudy,
    FrontTrack,
    LimitRow,
    LimitStudyResult,
    MaterialPreset,
    TableReport,
    TableRow,
    WaveMetrics,
    budget_imbalance,
    clifton_limit_study,
    diffusion_convergence_study,
    elastic_convergence_study,
    measure_rise_time,
    predict_tau,
    predict_width,
    table_report,
    track_front,
    variance_growth_slope,
    wave_metrics,
)
from .constitutive import (
    ConstitutiveEval,
    boundary_energy_release,
    damage_force,
    damage_potential,
    dissipation,
    elastic_energy_density,
    elastic_wave_speed,
    entropy_flux,
    entropy_production,
    evaluate,
    free_energy,
    free_energy_feng,
    free_energy_linear,
    internal_forces,
    phenomenological_rate,
    stress,
    total_free_energy,
)
from .errors import (
    AdmissibilityViolation,
    CflViolation,
    ConfigConflict,
    ConfigError,
    DiffusionStabilityViolation,
    FailwaveError,
    InvalidValue,
    MissingKey,
    NoFrontDetected,
    NonpositiveSpeed,
    NoPlateau,
    RuntimeViolation,
    ShapeMismatch,
    SingularBasis,
    SingularLambda,
    TooFewLevels,
)
from .model import (
    FieldState,
    Grid1D,
    Grid2D,
    MaterialParams,
    ScenarioConfig,
    build_scenario,
    config_hash,
    initialize_state,
    scenario_to_dict,
    scenario_to_yaml,
)
from .solver import (
    EnergyBudget,
    GaugeTrace,
    RunResult,
    Snapshot,
    StepReport,
    lateral_stress_proxy,
    run,
    run_clifton,
    step_damage,
    step_elastic,
)
from .variational import (
    Basis,
    DiscreteTrajectory,
    Functionals,
    GeneralizedResidual,
    GeneralizedSystem,
    LagrangeResidual,
    action_first_variation,
    discrete_action,
    dissipation_variation,
    generalized_residual,
    lagrange_residual,
    nodal_basis,
    record_trajectory,
    reduce_to_generalized,
    sine_basis,
    total_functionals,
)

__version__ = "0.1.0"
