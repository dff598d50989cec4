"""Toolkit for matrix-conformally rescaled Dirac operators on the 2-torus.

Subpackages and modules:

- symcalc: exact noncommutative symbol calculus (parametrix of the
  squared operator, graded identity checks).
- xi_integrate: xi-plane integration of the traced order -2 symbol into
  an exact curvature density with spectral-function sandwich terms.
- specfun: the one- and two-variable spectral multipliers G, F, Q and
  their functional-calculus action in the eigenbasis of H.
- dirac_numerics: truncated Fourier operators, heat-trace zeta(0)
  extraction and Gauss-Bonnet comparisons at finite cutoff.
- chern: Chern numbers of explicit projections and band Chern numbers /
  diagonalizability of sampled positive matrix fields.
- cli: the `mcdirac` command-line entry point.
"""

from .chern import (
    BumpTriple,
    ChernReport,
    ProjectionField,
    Surface,
    bott_projection,
    chern_density,
    chern_number_density,
    default_bump_triple,
    diagonalizability_verdict,
    embed_in_surface,
    make_torus_projection,
    plaquette_chern,
)
from .dirac_numerics import (
    HeatTraceFit,
    MatrixFunction,
    TruncatedOperator,
    assemble_HDA,
    assemble_rescaled,
    build_dirac,
    build_mult,
    default_t_grid,
    gauss_bonnet_report,
    get_profile,
    localized_trace,
    zeta_at_zero,
)
from .specfun import (
    DeltaAction,
    SpectralFunction,
    apply_spectral,
    eval_F,
    eval_Fdiv,
    eval_G,
    eval_Q,
)
from .symcalc import (
    SymbolPoly,
    build_a_symbols,
    build_b_symbols,
    compose,
    parametrix_defect,
)
from .xi_integrate import (
    CurvatureDensity,
    SandwichTerm,
    build_b2_parts,
    display_form,
    integrate_pureH,
    integrate_sandwich,
    total_density,
    xi_quadrature,
)

__version__ = "0.1.0"
