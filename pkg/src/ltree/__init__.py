"""Event-sourced social-account trees rendered as bracketed L-system fractals."""

from .lsystem import (
    Grammar, GrammarError, Production, RewriteError, Symbol, SymbolString,
    match_context, parse_grammar, rewrite, rewrite_step,
)
from .turtle import (
    Geometry, SvgStyle, TurtleConfig, TurtleState, emit_svg, interpret,
    koch_quadratic,
)
from .tree import (
    RANDOM, NodeKind, NoPostsError, PostCounters, SocialTree, TreeError,
    UnknownPostError, new_tree,
)
from .layout import LayoutConfig, layout
from .eventlog import (
    EventLog, EventRecord, LogError, ReplayError, replay, verify_chain,
)

__version__ = "0.1.0"
