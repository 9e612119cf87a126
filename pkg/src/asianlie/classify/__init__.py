"""Group classification: element families, equivalence transformations,
general symmetry coefficients and the catalogue of canonical cases."""

from .cases import CANONICAL_F, Ansatz, case_ansatz, xi1_equation_residual, xi1_form
from .catalog import (
    ClassificationCase,
    Discrepancy,
    GeneratorCheck,
    load_table2,
    nearest_specialization,
    row_for_family,
    table2_catalog,
)
from .equivalence import (
    Canonicalization,
    ChangeOfVariablesReport,
    EquivalenceTransform,
    InvalidTransform,
    ReducibleFamily,
    SearchResult,
    apply_equivalence,
    canonicalize,
    search_equivalence,
    verify_change_of_variables,
    verify_solution_transport,
)
from .families import (
    ClassifyingODE,
    DegenerateODE,
    FunctionFamily,
    all_branches,
    family_matches,
    integrate_numerically,
    recognize,
    solve_classifying_ode,
    symbolic_family,
)
