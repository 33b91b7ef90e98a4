"""Extended Wigner's Friend simulator with AoM/NoM witnesses."""

from .bipartite import BipartiteScenario, JointTable, eval_P0_P1_PS, joint_table, nom_violating_strategy
from .qlinalg import EPS_NORM, EPS_PROB, EPS_UNITARY, ValidationError
from .reports import WitnessReport
from .scenario import (
    AOM,
    NOM,
    FriendMeasurement,
    LabEncoding,
    OutcomeDistribution,
    Scenario,
    SuperObserverOp,
    matching_nom_unitary,
    run_trial,
)
from .witnesses import eval_T, eval_Tq

__all__ = [
    "AOM",
    "NOM",
    "EPS_NORM",
    "EPS_PROB",
    "EPS_UNITARY",
    "BipartiteScenario",
    "FriendMeasurement",
    "JointTable",
    "LabEncoding",
    "OutcomeDistribution",
    "Scenario",
    "SuperObserverOp",
    "ValidationError",
    "WitnessReport",
    "eval_P0_P1_PS",
    "eval_T",
    "eval_Tq",
    "joint_table",
    "matching_nom_unitary",
    "nom_violating_strategy",
    "run_trial",
]
