"""criticlab: a numerical laboratory for critic-learning divergence.

Implements the TD(lam), Sarsa(lam), VGL(lam) and HDP/DHP/GDHP batch
updates on a three-step scalar control benchmark, predicts their
convergence or divergence by eigenvalue analysis of the induced 2x2
weight-update dynamics, and confirms each prediction by simulation.
"""

from ._kernels import NUMBA_AVAILABLE, active_backend
from .critic import (
    CriticWeights,
    Reparametrization,
    apply_reparam,
    critic_gradient,
    critic_value,
    critic_weight_jacobians,
)
from .env import (
    HORIZON,
    Environment,
    ModelJacobians,
    ProblemConstants,
    Step,
    ThreeStepEnv,
    Trajectory,
    model_jacobians,
    model_step,
    reward_step,
)
from .harness import (
    PRESET_EXPECTED_OUTCOME,
    PRESET_NAMES,
    ExperimentConfig,
    Outcome,
    RunTrace,
    emit_csv,
    parse_csv,
    preset_config,
    report_stability,
    run_experiment,
    run_preset,
)
from .learners import (
    Algorithm,
    LearnerConfig,
    OmegaMode,
    gdhp_update,
    lambda_return_targets,
    learner_update,
    omega_weight,
    q_lambda_targets,
    sarsa_update,
    td_update,
    value_gradient_targets,
    vgl_update,
)
from .policy import (
    FixedActor,
    GreedyAnalytic,
    GreedyNumeric,
    NoisyGreedy,
    golden_section_max,
    greedy_action,
    greedy_action_dx,
    greedy_action_numeric,
    q_value,
    unroll,
)
from .rng import GaussianSampler, Xoshiro256pp
from .stability import (
    StabilityReport,
    Verdict,
    classify,
    verdict_for,
    curvature_factorization,
    curvature_weighting,
    eigenvalues_2x2,
    max_stable_alpha,
    reparam_transform,
    vgl_update_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "HORIZON",
    "NUMBA_AVAILABLE",
    "PRESET_EXPECTED_OUTCOME",
    "PRESET_NAMES",
    "Algorithm",
    "CriticWeights",
    "Environment",
    "ExperimentConfig",
    "FixedActor",
    "GaussianSampler",
    "GreedyAnalytic",
    "GreedyNumeric",
    "LearnerConfig",
    "ModelJacobians",
    "NoisyGreedy",
    "OmegaMode",
    "Outcome",
    "ProblemConstants",
    "Reparametrization",
    "RunTrace",
    "StabilityReport",
    "Step",
    "ThreeStepEnv",
    "Trajectory",
    "Verdict",
    "Xoshiro256pp",
    "active_backend",
    "apply_reparam",
    "classify",
    "critic_gradient",
    "critic_value",
    "critic_weight_jacobians",
    "curvature_factorization",
    "curvature_weighting",
    "eigenvalues_2x2",
    "emit_csv",
    "gdhp_update",
    "golden_section_max",
    "greedy_action",
    "greedy_action_dx",
    "greedy_action_numeric",
    "lambda_return_targets",
    "learner_update",
    "max_stable_alpha",
    "model_jacobians",
    "model_step",
    "omega_weight",
    "parse_csv",
    "preset_config",
    "q_lambda_targets",
    "q_value",
    "report_stability",
    "reward_step",
    "run_experiment",
    "run_preset",
    "sarsa_update",
    "td_update",
    "unroll",
    "value_gradient_targets",
    "verdict_for",
    "vgl_update",
    "vgl_update_matrix",
]
