"""Normal forms for omega-power terms, with derivation traces and language tools."""

from .term import Lim, Term, TermSyntaxError, parse_term, render_term, rank, term_length
from .canon import canon, canonicalize, decide_equal, is_canonical
from .rewrite import DerivationTrace, RewriteStep, apply_rule, verify_derivation

__version__ = "0.1.0"
