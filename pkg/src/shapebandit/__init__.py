"""Thresholding bandits with shape constraints (monotone, unimodal, concave)."""
from .baseline import moss_top1, uniform_fc_budget, uniform_run
from .core import (
    ArmDistribution,
    BanditInstance,
    BudgetExhausted,
    DegenerateProblem,
    Environment,
    InvalidArm,
    InvalidClassification,
    InvalidInstance,
    InvalidParameter,
    InvalidRange,
    ShapeBanditError,
    derive_seed,
    sample_arm,
    simple_regret,
    true_classification,
    validate_shape,
)
from .ctb import PAPER_CONSTANT, ctb_run, ctb_schedule, log_set, mirrored_log_set
from .harness import RunResult, SweepRow, estimate_regret, rate_sweep, run_once
from .instances import discretize_holder, gen_lower_bound_instance, gen_random_instance
from .mtb import MtbConfig, choose, explore, mtb_anytime, mtb_fc_budget, mtb_run
from .tree import TreeNode, children, is_leaf, root_node
from .utb import utb_run

__version__ = "0.1.0"
