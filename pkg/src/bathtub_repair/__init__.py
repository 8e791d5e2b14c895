"""Virtual-age repair model for systems with bathtub-shaped failure rates."""
from .hazard import (
    BATHTUB_EXAMPLE,
    HazardShape,
    HazardSpec,
    classify,
    cumulative,
    cumulative_between,
    evaluate,
    inverse_cumulative,
)
from .repair import (
    RepairEvent,
    VirtualAgeState,
    advance,
    apply_repair,
    conditional_intensity,
    virtual_age_curve,
)
from .result import EstimateResult
from .simulate import (
    BACKEND,
    ConstantDegree,
    DegreeSequence,
    FirstImperfectThenMinimal,
    RngStream,
    Trajectory,
    estimate_expected_failures_mc,
    sample_first_failure,
    simulate_nhpp,
    simulate_renewal,
    simulate_trajectory,
)
from .analytic import (
    QuadratureConfig,
    QuadratureError,
    expected_failures_strategy,
    first_failure_density,
    sweep_expected_failures,
)

__version__ = "0.1.0"
