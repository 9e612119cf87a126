"""Exact symbolic core: symbols, jets, normal form, calculus and text grammar."""

from .chain import Composite
from .expr import *  # noqa: F401,F403
from .expr import rational, sample_value
from .grammar import GRAMMAR_VERSION, ParseError, parse, serialize

__all__ = [  # noqa: F405
    *expr.__all__,  # noqa: F405
    "Composite", "GRAMMAR_VERSION", "ParseError", "parse", "serialize",
    "rational", "sample_value",
]
