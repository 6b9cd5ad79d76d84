"""Micro-vibrations of water-saturated granular ground under settling.

A periodic cubic cell of elastic grains and viscous pore fluid is
condensed into a three-descriptor macro model; a uniaxial compaction
ramp then reduces it to one damped oscillator for the lateral
micro-deformation, solved in closed form phase by phase.  The package
computes the cell averages and macro coefficients (from first principles
or from the published closed-form coefficient set), classifies the
damping regime, recovers the axial descriptor and pore pressure, checks
every closed form against a step integrator, and quantifies convergence
to the first-order small-cell limit.
"""

from .cell import (
    ALL,
    FLUID,
    SOLID,
    CellGeometry,
    ShapeFunctionSet,
    cell_average,
    gradient_mean,
    gradient_product_mean,
    gradient_square_mean,
    phase_fraction,
    shape_square_mean,
    validate_shape_properties,
)
from .coefficients import (
    FIRST_PRINCIPLES,
    PAPER,
    Backend,
    CubicSpec,
    HomogenizedCoefficients,
    MacroCoefficients,
    MaterialParams,
    ReducedCoefficients,
    critical_length,
    critical_length_closed_form,
    cubic_macro_coefficients,
    homogenized_coefficients,
    macro_coefficients,
    reduce_macro_system,
    reduced_coefficients,
)
from .config import (
    NumericsConfig,
    OutputConfig,
    RunConfig,
    SweepSpec,
    dumps_config,
    load_config,
    parse_config,
    save_config,
)
from .dynamics import (
    ClosedFormSolution,
    ConstantsAudit,
    LimitReport,
    LimitRow,
    PressureRecovery,
    RegimeReport,
    SettlingScenario,
    Trajectory,
    asymptotic_limit_report,
    audit_published_constants,
    classify_regime,
    closed_form_oracle_gap,
    closed_form_trajectory,
    count_sign_changes,
    damping_class,
    deviation_sign_changes,
    homogenized_oracle_gap,
    homogenized_solutions,
    recover_pressure,
    recover_q1,
    sample_times,
    solve_phases,
    strain_forcing,
)
from .errors import (
    BracketingError,
    CompactaError,
    DivergenceError,
    OracleConvergenceError,
    RegimeError,
    SingularModelError,
    UnsupportedGeometryError,
    ValidationError,
)
from .oracle import (
    LinearOdeProblem,
    OracleResult,
    PiecewiseAffineForcing,
    halve_until_converged,
    integrate,
)

__version__ = "0.1.0"

__all__ = [
    "ALL",
    "FLUID",
    "SOLID",
    "Backend",
    "BracketingError",
    "CellGeometry",
    "ClosedFormSolution",
    "CompactaError",
    "ConstantsAudit",
    "CubicSpec",
    "DivergenceError",
    "FIRST_PRINCIPLES",
    "HomogenizedCoefficients",
    "LimitReport",
    "LimitRow",
    "LinearOdeProblem",
    "MacroCoefficients",
    "MaterialParams",
    "NumericsConfig",
    "OracleConvergenceError",
    "OracleResult",
    "OutputConfig",
    "PAPER",
    "PiecewiseAffineForcing",
    "PressureRecovery",
    "ReducedCoefficients",
    "RegimeError",
    "RegimeReport",
    "RunConfig",
    "SettlingScenario",
    "ShapeFunctionSet",
    "SingularModelError",
    "SweepSpec",
    "Trajectory",
    "UnsupportedGeometryError",
    "ValidationError",
    "asymptotic_limit_report",
    "audit_published_constants",
    "cell_average",
    "classify_regime",
    "closed_form_oracle_gap",
    "closed_form_trajectory",
    "count_sign_changes",
    "critical_length",
    "critical_length_closed_form",
    "cubic_macro_coefficients",
    "damping_class",
    "deviation_sign_changes",
    "dumps_config",
    "gradient_mean",
    "gradient_product_mean",
    "gradient_square_mean",
    "halve_until_converged",
    "homogenized_coefficients",
    "homogenized_oracle_gap",
    "homogenized_solutions",
    "integrate",
    "load_config",
    "macro_coefficients",
    "parse_config",
    "phase_fraction",
    "recover_pressure",
    "recover_q1",
    "reduce_macro_system",
    "reduced_coefficients",
    "sample_times",
    "save_config",
    "shape_square_mean",
    "solve_phases",
    "strain_forcing",
    "validate_shape_properties",
]
