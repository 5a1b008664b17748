"""Numerical laboratory for Wold-type decompositions and Dirichlet-type model spaces."""
from woldlab.config import TolerancePolicy
from woldlab.dirichlet import model_space, mz_operators, recover_measure, verify_model_equivalence
from woldlab.gallery import ExampleSpec, make_example
from woldlab.measures import OpValuedMeasure, make_measure
from woldlab.operators import DenseOperator, InnerProductSpace
from woldlab.wold import structural_decomposition_pair, wold_single, wold_tuple

__version__ = "0.1.0"

__all__ = [
    "DenseOperator",
    "ExampleSpec",
    "InnerProductSpace",
    "OpValuedMeasure",
    "TolerancePolicy",
    "make_example",
    "make_measure",
    "model_space",
    "mz_operators",
    "recover_measure",
    "structural_decomposition_pair",
    "verify_model_equivalence",
    "wold_single",
    "wold_tuple",
]
