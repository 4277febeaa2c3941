"""Formal theory of linear systems of PDEs with rational-function coefficients.

Submodules: ``field`` (differential fields), ``weyl`` (operator matrices),
``involutive`` (Janet bases, compatibility conditions), ``jetspencer``
(jets, symbols, Spencer cohomology), ``duality`` (torsion and
parametrization tests), ``geometry`` (Lie pseudogroup examples) and ``cli``.
"""

from .field import DiffField, ParameterSpec, PoleError, RationalField, TruncationError
from .weyl import OperatorMatrix, ScalarOperator
from .involutive import (
    CompletionError,
    complete,
    compatibility_conditions,
    free_resolution,
    row_module_equal,
    row_module_membership,
)
from .jetspencer import JetSystem, bundle_dims, formal_integrability_test, prolong, solution_dimension
from .duality import (
    DualityError,
    adjoint_injectivity_test,
    double_duality_test,
    kalman_test,
    torsion_elements,
    verify_parametrization,
)
from .dsl import DSLError, parse, render_decl

__version__ = "0.1.0"
