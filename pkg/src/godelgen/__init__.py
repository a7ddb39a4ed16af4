"""Bijective numbering for dependently typed term languages.

Given a signature in a small LF-style syntax, the package derives an
explicit bijection between each inhabited term class and an initial
segment of the naturals (all of N for infinite classes), together with
machinery to verify that bijection exhaustively up to a budget.

Typical use::

    from godelgen import assign_tags, decode_closed, parse_signature, validate

    vsig = validate(parse_signature(open("lang.sig").read()))
    plan = assign_tags(vsig)
    term = decode_closed(plan, "t", None, 42)
"""

from .adequacy import (
    AdequacyReport,
    ClassReport,
    EnumBudget,
    Verdict,
    enumerate_terms,
    verify_all,
    verify_class,
    verify_one_to_one,
    verify_onto,
    verify_total_unique,
)
from .bignat import mingle, mingle_fold, unmingle, unmingle_fold
from .codec import (
    DEFAULT_FUEL,
    ClassPlan,
    CodecPlan,
    assign_tags,
    build_plan,
    class_label,
    compare,
    decode,
    decode_closed,
    encode,
    encode_closed,
)
from .errors import (
    CodeOutOfRange,
    Diagnostic,
    FuelExhausted,
    GodelgenError,
    NoWellFoundedPlan,
    SigSyntaxError,
    SigValidationError,
    TermError,
)
from .natcollections import (
    GapMap,
    GapSet,
    TermMap,
    TermSet,
    parse_set_literal,
    set_literal,
)
from .sigmodel import (
    Cardinality,
    IndexClass,
    Signature,
    ValidatedSignature,
    compute_cardinality,
    parse_signature,
    validate,
)
from .termrep import (
    EMPTY_COUNTS,
    Con,
    CountVector,
    Term,
    TermArg,
    Var,
    check_term,
    parse_term,
    print_term,
    term_size,
)

__all__ = [
    "AdequacyReport",
    "Cardinality",
    "ClassPlan",
    "ClassReport",
    "CodeOutOfRange",
    "CodecPlan",
    "Con",
    "CountVector",
    "DEFAULT_FUEL",
    "Diagnostic",
    "EMPTY_COUNTS",
    "EnumBudget",
    "FuelExhausted",
    "GapMap",
    "GapSet",
    "GodelgenError",
    "IndexClass",
    "NoWellFoundedPlan",
    "SigSyntaxError",
    "SigValidationError",
    "Signature",
    "Term",
    "TermArg",
    "TermError",
    "TermMap",
    "TermSet",
    "ValidatedSignature",
    "Var",
    "Verdict",
    "assign_tags",
    "build_plan",
    "check_term",
    "class_label",
    "compare",
    "compute_cardinality",
    "decode",
    "decode_closed",
    "encode",
    "encode_closed",
    "enumerate_terms",
    "mingle",
    "mingle_fold",
    "parse_set_literal",
    "parse_signature",
    "parse_term",
    "print_term",
    "set_literal",
    "term_size",
    "unmingle",
    "unmingle_fold",
    "validate",
    "verify_all",
    "verify_class",
    "verify_one_to_one",
    "verify_onto",
    "verify_total_unique",
]

__version__ = "0.1.0"
