"""thingtwin: digital twins synthesized from Thing Descriptions.

A Thing Description annotated with a behavioral-model vocabulary is parsed,
validated, and compiled into an executable dynamical system; model parameters
are learned from recorded observations by ODE-constrained least squares; the
fitted system then backs queryable digital twins that support forward
prediction, what-if exploration, geo-fence alerting, measurement resync, and
forecast precision evaluation — locally, over a CLI, or over HTTP.
"""

from importlib import resources as _resources

from .dopri import DenseSolution, solve, solve_fixed
from .errors import (BoundsViolationError, ContinuousFitError, DynamicsError,
                     InsufficientCoverageError, LearningError, ModelSyntaxError,
                     NoProgressError, NumericDomainError, ProjectError,
                     ReadOnlyPropertyError, ResolutionError,
                     StepSizeUnderflowError, TdError, ThingTwinError,
                     TimeBeforeAnchorError, TimeInPastError, TraceError,
                     TwinError, UnknownChannelError, UnknownOutputError,
                     UnknownPropertyError, UnknownStateNameError)
from .expr import (Behavior, BinOp, Call, Const, Constraint, Expr, GlobalParam,
                   Guess, InputRef, InputTypeAgg, LocalParam, ModelSpec, Neg,
                   SelfRef, ValueRef, parse_expression, parse_model,
                   render_expr, render_model, walk)
from .fitting import (FitConfig, FitResult, compute_residuals, continuous_fit,
                      default_initial_state, finite_difference_jacobian,
                      fit_parameters, prediction_mse)
from .httpd import make_server, serve_forever
from .observations import ObservationSet
from .project import Project, td_hash
from .resolve import (AlgState, Diagnostic, DiffState, ParamInfo, ParamSlot,
                      ResolvedModels, SignalRef, render_parsed,
                      render_resolved, resolve_models, validate_td)
from .rng import Rng
from .schedule import ActionSchedule
from .service import TwinService
from .simulators import (DroneSimConfig, RoomSimConfig, add_noise,
                         default_drone_joystick, default_room_actions,
                         drone_sim_system, random_drone_joystick,
                         room_sim_system, simulate_drone, simulate_room)
from .system import (CompiledSystem, Trajectory, assemble_system, integrate,
                     integrate_fixed, round_half_away, sample_action,
                     structure_signature)
from .td import (ModelInput, PropertySpec, ThingDescription, ValueFrom,
                 parse_td, parse_td_file)
from .traces import dump_trace, load_trace, parse_trace, save_trace
from .trf import SolverConfig, SolverResult, least_squares_box
from .twin import (GeoFence, PrecisionReport, SampledTruth, Twin, WhatIfResult,
                   evaluate_precision, restore_twin, spawn_twin)

__version__ = "0.1.0"


def packaged_td(name: str) -> str:
    """Return the text of a Thing Description shipped with the package.

    Available names: ``room`` (two heated rooms sharing a heater, one with a
    cooler) and ``drone`` (a quadcopter with joystick command channels).
    """
    path = _resources.files(__name__) / "assets" / f"{name}.jsonld"
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise KeyError(f"no packaged Thing Description named {name!r}") from None


__all__ = [
    "__version__",
    "packaged_td",
    # errors
    "ThingTwinError", "TdError", "ModelSyntaxError", "ResolutionError",
    "TraceError", "DynamicsError",
    "NumericDomainError", "StepSizeUnderflowError", "LearningError",
    "NoProgressError", "ContinuousFitError", "BoundsViolationError",
    "TwinError", "UnknownPropertyError", "ReadOnlyPropertyError",
    "TimeBeforeAnchorError", "TimeInPastError", "UnknownStateNameError",
    "UnknownChannelError", "UnknownOutputError", "InsufficientCoverageError",
    "ProjectError",
    # model expressions
    "Behavior", "Expr", "Const", "LocalParam", "GlobalParam", "SelfRef",
    "ValueRef", "InputRef", "InputTypeAgg", "Call", "BinOp", "Neg",
    "Constraint", "Guess", "ModelSpec", "parse_model", "parse_expression",
    "render_model", "render_expr", "walk",
    # thing descriptions
    "ValueFrom", "ModelInput", "PropertySpec", "ThingDescription",
    "parse_td", "parse_td_file",
    # resolution
    "Diagnostic", "ParamSlot", "DiffState", "AlgState", "SignalRef",
    "ParamInfo", "ResolvedModels", "validate_td", "resolve_models",
    "render_resolved", "render_parsed",
    # schedules and observations
    "ActionSchedule", "ObservationSet",
    # integration
    "DenseSolution", "solve", "solve_fixed",
    "CompiledSystem", "Trajectory", "assemble_system", "integrate",
    "integrate_fixed", "sample_action", "round_half_away",
    "structure_signature",
    # least squares and fitting
    "SolverConfig", "SolverResult", "least_squares_box",
    "FitConfig", "FitResult", "compute_residuals",
    "finite_difference_jacobian", "fit_parameters", "continuous_fit",
    "prediction_mse", "default_initial_state",
    # randomness
    "Rng",
    # reference device simulators
    "RoomSimConfig", "DroneSimConfig", "simulate_room", "simulate_drone",
    "room_sim_system", "drone_sim_system", "add_noise",
    "default_room_actions", "default_drone_joystick",
    "random_drone_joystick",
    # trace files
    "parse_trace", "load_trace", "dump_trace", "save_trace",
    # twins
    "Twin", "GeoFence", "WhatIfResult", "PrecisionReport", "SampledTruth",
    "spawn_twin", "restore_twin", "evaluate_precision",
    # projects and service
    "Project", "td_hash", "TwinService", "make_server", "serve_forever",
]
