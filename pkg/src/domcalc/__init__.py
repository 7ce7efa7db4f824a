"""Symbolic domain calculus for compositions of unbounded operators.

The package has three layers:

* a small expression language for operators (atoms with declared
  properties, adjoints, inverses, compositions, 2x2 blocks) with a
  normalizer into monomial block form (:mod:`domcalc.expr`,
  :mod:`domcalc.normalize`, :mod:`domcalc.parser`);
* a rule-based inference engine that computes symbolic domains, simplifies
  them against a fact base, and emits replayable derivation certificates
  checked by an independent verifier (:mod:`domcalc.domains`,
  :mod:`domcalc.checker`), plus a catalog of block constructions with
  known verdict tables (:mod:`domcalc.catalog`);
* a numerical probe collecting membership evidence for the concrete
  Gaussian-multiplier pair the symbolic axioms describe
  (:mod:`domcalc.probe`).
"""

from .errors import (
    ConflictingAxiom,
    ContradictionDetected,
    DegenerateWindow,
    DomcalcError,
    DuplicateId,
    InconsistentFlags,
    NonNormalizable,
    OutOfRange,
    ParseError,
    ShapeMismatch,
    UnknownScenario,
    UnverifiedDerivation,
)
from .expr import (
    Adjoint,
    Atom,
    AtomDecl,
    AtomTable,
    BASE,
    Base,
    Block2,
    Compose,
    Identity,
    Inverse,
    Pair,
    Power,
    SpaceShape,
    Zero,
    declare_atom,
    desugar_powers,
    diag,
    offdiag,
    pretty_print,
    shape_of,
    swap,
)
from .parser import parse_expr
from .normalize import (
    Chain,
    Factor,
    MonomialMatrix,
    ZeroBlock,
    compose_blocks,
    expand_power,
    normalize,
    push_adjoint,
)
from .domains import (
    Derivation,
    DirectSum,
    DomAtom,
    DomainSet,
    FactBase,
    KernelSet,
    Meet,
    PreimageSet,
    RangeSet,
    TrivialSet,
    Verdict,
    Whole,
    domain_of,
    domain_summary,
    injectivity_of,
    load_facts,
    set_text,
    simplify_domain,
    verdict_of,
    verdict_satisfies,
)
from .checker import explain_failure, verify_derivation
from .catalog import (
    ConjectureStatus,
    Expectation,
    Report,
    ReportRow,
    Scenario,
    conjecture_status,
    nested_construction,
    run_all,
    run_proposition,
    scenario,
)
from .probe import (
    Grid,
    GridFunction,
    MembershipVerdict,
    ProbeReport,
    discrete_fourier,
    membership,
    probe_report,
    sample_function,
    weighted_tail_exponent,
)
from .cli import export_trace, run_cli

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
