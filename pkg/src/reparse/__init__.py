"""reparse: regular expression parsing in linear space.

A parse of a string against a pattern maps every character of the string
to the pattern literal it matched.  The package offers three engines with
identical match decisions:

* ``naive`` - classic stored-history backtracking (workspace grows with
  string length times automaton size);
* ``linear`` - divide-and-conquer over an automaton decomposition, with
  workspace linear in string plus pattern size;
* ``bitparallel`` - the same recursion over tabulated micro automata.

>>> import reparse
>>> reparse.parse("(a|(ba))*", b"aaba")
[1, 1, 2, 3]
>>> reparse.match("(a|(ba))*", b"b")
False
"""

from .engine import (
    ENGINES,
    CompressedPath,
    EngineConfig,
    RunStats,
    match,
    naive_parse,
    parse,
    replay,
    replay_positions,
)
from .gen import GeneratedInstance, gen_instance
from .kernel import BACKEND
from .ledger import SpaceLedger, use_ledger
from .syntax import PatternSyntaxError, literal_count, parse_pattern, unparse

__all__ = [
    "BACKEND",
    "CompressedPath",
    "ENGINES",
    "EngineConfig",
    "GeneratedInstance",
    "PatternSyntaxError",
    "RunStats",
    "SpaceLedger",
    "gen_instance",
    "literal_count",
    "match",
    "naive_parse",
    "parse",
    "parse_pattern",
    "replay",
    "replay_positions",
    "unparse",
    "use_ledger",
]

__version__ = "0.1.0"
