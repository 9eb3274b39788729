"""Ridge-following solver for box-constrained variational inequalities."""

from .baselines import BaselineMethod, BaselineState, SingularCorrection, baseline_step, run_baseline
from .direction import (AllFrozen, AllSatisfied, DegenerateOrientation, Direction,
                        DirectionError, EpochState, MultipleBoundaryConflicts,
                        RankDeficient, admissible_pair, compute_direction,
                        ideal_direction, is_frozen)
from .dynamics import (ASSUMPTION_VIOLATION, CorrectionDiverged, EXITED, ExitEvent,
                       Leg, MAX_EPOCHS, MAX_STEPS, Row, SOLVED, SolverConfig,
                       Trajectory, derive_epoch, detect_exit, epoch_transition,
                       euler_step, ridge_correction, run_backward, run_stonr)
from .objectives import (BUILTIN_NAMES, PerturbationKind, PerturbationSpec, builtin,
                         builtin_problem, perturb, smooth_step, smooth_step_d1,
                         smooth_step_d2)
from .trajio import TrajectoryFormatError, read_trajectory, write_report, write_trajectory
from .verify import (AssumptionReport, ParityReport, PivotCheck, check_assumptions,
                     collect_samples, detect_pivot, enumerate_pivots,
                     parity_diagnostics)
from .vi import (BoxDomain, CoordinateStatus, MinMaxObjective, Role,
                 SatisfactionKind, Tolerances, VIProblem, all_satisfied,
                 classify_all, classify_coordinate, estimate_constants,
                 finite_diff_jacobian, is_approx_solution, min_max_to_vi,
                 progress_residual, vi_gap)

__version__ = "0.1.0"
