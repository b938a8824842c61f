"""Bracketed L-system rewriting: deterministic, context-sensitive (2L),
stochastic, and parametric grammars over single-letter symbols.

Symbols are single characters, optionally carrying numeric parameters
written as ``P(1,2,3)``.  ``[`` and ``]`` are reserved branching letters
and are transparent to context matching.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

BRACKETS = ("[", "]")

_NUM_RE = re.compile(r"[-+]?\d+(?:\.\d+)?")
_LETTER_RE = re.compile(r"\S")


class GrammarError(ValueError):
    """Raised for malformed grammar source or invalid grammar structure."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", col {column}"
            loc += ": "
        super().__init__(loc + message)
        self.line = line
        self.column = column


class RewriteError(ValueError):
    """Raised when a string cannot be rewritten under a grammar."""


@dataclass(frozen=True)
class Symbol:
    letter: str
    params: tuple[float, ...] = ()

    def __str__(self):
        if not self.params:
            return self.letter
        args = ",".join(_fmt_num(p) for p in self.params)
        return f"{self.letter}({args})"


def _fmt_num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(x)


@dataclass(frozen=True)
class SymbolString:
    symbols: tuple[Symbol, ...] = ()

    def __str__(self):
        return "".join(str(s) for s in self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]

    def letters(self) -> str:
        return "".join(s.letter for s in self.symbols)

    def is_balanced(self) -> bool:
        depth = 0
        for s in self.symbols:
            if s.letter == "[":
                depth += 1
            elif s.letter == "]":
                depth -= 1
                if depth < 0:
                    return False
        return depth == 0

    @classmethod
    def parse(cls, text: str) -> "SymbolString":
        """Parse ``mm[rmk(1)]`` style text into a SymbolString."""
        syms = []
        i = 0
        while i < len(text):
            c = text[i]
            if c.isspace():
                i += 1
                continue
            if c == "(":
                raise GrammarError(f"parameter list with no symbol at position {i}")
            i += 1
            params = ()
            if i < len(text) and text[i] == "(":
                close = text.find(")", i)
                if close < 0:
                    raise GrammarError(f"unclosed parameter list after {c!r}")
                inner = text[i + 1 : close]
                params = tuple(float(t) for t in _split_args(inner))
                i = close + 1
            syms.append(Symbol(c, params))
        return cls(tuple(syms))


def _split_args(inner: str) -> list[str]:
    parts = [p.strip() for p in inner.split(",")]
    return [p for p in parts if p]


@dataclass(frozen=True)
class ParamExpr:
    """Successor argument: a constant, a parameter copy, or param +/- const."""

    name: str | None
    offset: float

    def evaluate(self, env: dict[str, float]) -> float:
        if self.name is None:
            return self.offset
        if self.name not in env:
            raise RewriteError(f"unbound parameter {self.name!r} in successor")
        return env[self.name] + self.offset


@dataclass(frozen=True)
class TemplateSymbol:
    letter: str
    args: tuple[ParamExpr, ...] = ()

    def instantiate(self, env: dict[str, float]) -> Symbol:
        return Symbol(self.letter, tuple(a.evaluate(env) for a in self.args))


@dataclass(frozen=True)
class Condition:
    """Comparison of one predecessor parameter against a constant."""

    name: str
    op: str
    value: float

    _OPS = {
        "==": lambda a, b: a == b,
        "!=": lambda a, b: a != b,
        "<=": lambda a, b: a <= b,
        ">=": lambda a, b: a >= b,
        "<": lambda a, b: a < b,
        ">": lambda a, b: a > b,
    }

    def evaluate(self, env: dict[str, float]) -> bool:
        if self.name not in env:
            raise RewriteError(f"condition references unbound parameter {self.name!r}")
        return self._OPS[self.op](env[self.name], self.value)

    def __str__(self):
        return f"{self.name} {self.op} {_fmt_num(self.value)}"


@dataclass(frozen=True)
class Production:
    predecessor: str
    successor: tuple[TemplateSymbol, ...]
    formal_params: tuple[str, ...] = ()
    left_context: str = ""
    right_context: str = ""
    condition: Condition | None = None
    probability: float = 1.0

    @property
    def specificity(self) -> int:
        has_ctx = bool(self.left_context or self.right_context)
        return 2 * has_ctx + (self.condition is not None)

    def group_key(self):
        cond = str(self.condition) if self.condition else ""
        return (self.predecessor, self.left_context, self.right_context, cond)


@dataclass
class Grammar:
    alphabet: frozenset[str]
    param_names: tuple[str, ...]
    axiom: SymbolString
    productions: list[Production]
    arity: dict[str, int] = field(default_factory=dict)

    @property
    def constants(self) -> frozenset[str]:
        ruled = {p.predecessor for p in self.productions}
        return frozenset(self.alphabet - ruled - set(BRACKETS))

    @property
    def is_deterministic(self) -> bool:
        return all(p.probability == 1.0 for p in self.productions)

    def validate(self):
        if not self.axiom.symbols:
            raise GrammarError("axiom is empty")
        if not self.axiom.is_balanced():
            raise GrammarError("axiom brackets are unbalanced")
        for p in self.productions:
            if p.predecessor not in self.alphabet:
                raise GrammarError(
                    f"production predecessor {p.predecessor!r} not in alphabet"
                )
            if not _template_balanced(p.successor):
                raise GrammarError(
                    f"successor of {p.predecessor!r} has unbalanced brackets"
                )
        groups: dict[tuple, float] = {}
        explicit: dict[tuple, bool] = {}
        counts: dict[tuple, int] = {}
        for p in self.productions:
            key = p.group_key()
            groups[key] = groups.get(key, 0.0) + p.probability
            counts[key] = counts.get(key, 0) + 1
        for key, total in groups.items():
            if counts[key] >= 1 and abs(total - 1.0) > 1e-9:
                raise GrammarError(
                    f"probabilities for predecessor {key[0]!r} sum to {total:g}, "
                    "expected 1"
                )


def _template_balanced(template) -> bool:
    depth = 0
    for t in template:
        if t.letter == "[":
            depth += 1
        elif t.letter == "]":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


# ---------------------------------------------------------------------------
# Grammar file parsing
#
# One declaration per line:
#   axiom: <symbols>
#   param <letter> <arity>
#   [left <] pred [> right] [: condition] [(probability)] -> successor
# Comments start with '#'.

_PRED_RE = re.compile(r"^\s*(\S)\s*(?:\(([^)]*)\))?\s*$")


def parse_grammar(text: str) -> Grammar:
    """Parse grammar source text into a validated :class:`Grammar`."""
    axiom = None
    arity: dict[str, int] = {}
    productions: list[Production] = []
    param_names: list[str] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("axiom:"):
            body = line[len("axiom:"):].strip()
            try:
                axiom = SymbolString.parse(body)
            except GrammarError as e:
                raise GrammarError(str(e), line=lineno) from None
            continue
        if line.startswith("param "):
            parts = line.split()
            if len(parts) != 3:
                raise GrammarError("expected 'param <letter> <arity>'", line=lineno)
            letter, n = parts[1], parts[2]
            if len(letter) != 1 or not n.isdigit():
                raise GrammarError("expected 'param <letter> <arity>'", line=lineno)
            arity[letter] = int(n)
            continue
        if "->" not in line:
            raise GrammarError("expected a rule containing '->'", line=lineno,
                               column=len(raw) - len(raw.lstrip()) + 1)
        head, _, tail = line.partition("->")
        productions.append(_parse_rule(head.strip(), tail.strip(), lineno))

    if axiom is None:
        raise GrammarError("missing 'axiom:' declaration")

    alphabet = set(arity)
    for s in axiom:
        alphabet.add(s.letter)
    for p in productions:
        alphabet.add(p.predecessor)
        alphabet.update(p.left_context)
        alphabet.update(p.right_context)
        alphabet.update(t.letter for t in p.successor)
        for name in p.formal_params:
            if name not in param_names:
                param_names.append(name)
    alphabet -= set(BRACKETS)

    g = Grammar(
        alphabet=frozenset(alphabet),
        param_names=tuple(param_names),
        axiom=axiom,
        productions=productions,
        arity=arity,
    )
    g.validate()
    return g


def _parse_rule(head: str, tail: str, lineno: int) -> Production:
    # trailing "(<number>)" is the probability; formal parameter lists
    # are never a single bare number
    prob = 1.0
    head = head.strip()
    m = re.search(r"\(\s*([0-9.eE+-]+)\s*\)\s*$", head)
    if m and _NUM_RE.fullmatch(m.group(1).strip()):
        try:
            prob = float(m.group(1))
        except ValueError:
            raise GrammarError(f"bad probability {m.group(1)!r}", line=lineno)
        if not 0.0 < prob <= 1.0:
            raise GrammarError(f"probability {prob:g} outside (0, 1]", line=lineno)
        head = head[: m.start()].strip()
    # everything after the first ':' is the condition
    ctx_part, colon, cond_text = head.partition(":")
    cond = _parse_condition(cond_text.strip(), lineno) if colon else None
    # within the context part, '<' and '>' delimit left/right contexts
    left = ""
    right = ""
    rest = ctx_part
    if "<" in rest:
        left, _, rest = rest.partition("<")
        left = left.replace(" ", "")
    if ">" in rest:
        rest, _, right = rest.partition(">")
        right = right.replace(" ", "")
    pm = _PRED_RE.match(rest)
    if not pm:
        raise GrammarError(f"cannot parse rule predecessor {rest!r}", line=lineno)
    formals = tuple(_split_args(pm.group(2) or ""))
    successor = _parse_template(tail, formals, lineno)
    return Production(
        predecessor=pm.group(1),
        successor=successor,
        formal_params=formals,
        left_context=left,
        right_context=right,
        condition=cond,
        probability=prob,
    )


def _parse_condition(text: str, lineno: int) -> Condition:
    for op in ("==", "!=", "<=", ">=", "<", ">"):
        if op in text:
            name, _, rhs = text.partition(op)
            name, rhs = name.strip(), rhs.strip()
            if not name or not _NUM_RE.fullmatch(rhs):
                break
            return Condition(name, op, float(rhs))
    raise GrammarError(f"cannot parse condition {text!r}", line=lineno)


def _parse_template(text: str, formals: tuple[str, ...], lineno: int):
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        i += 1
        args: tuple[ParamExpr, ...] = ()
        if i < len(text) and text[i] == "(":
            close = text.find(")", i)
            if close < 0:
                raise GrammarError(f"unclosed '(' in successor", line=lineno)
            args = tuple(
                _parse_param_expr(a, formals, lineno)
                for a in _split_args(text[i + 1 : close])
            )
            i = close + 1
        out.append(TemplateSymbol(c, args))
    return tuple(out)


def _parse_param_expr(text: str, formals, lineno) -> ParamExpr:
    text = text.replace(" ", "")
    if _NUM_RE.fullmatch(text):
        return ParamExpr(None, float(text))
    m = re.fullmatch(r"(\w+)(?:([+-])(\d+(?:\.\d+)?))?", text)
    if not m:
        raise GrammarError(f"cannot parse successor argument {text!r}", line=lineno)
    name = m.group(1)
    offset = 0.0
    if m.group(2):
        offset = float(m.group(3))
        if m.group(2) == "-":
            offset = -offset
    return ParamExpr(name, offset)


# ---------------------------------------------------------------------------
# Context matching and rewriting


def _matching_open(letters: str, close_idx: int) -> int:
    depth = 0
    for i in range(close_idx, -1, -1):
        if letters[i] == "]":
            depth += 1
        elif letters[i] == "[":
            depth -= 1
            if depth == 0:
                return i
    raise RewriteError("unbalanced brackets")


def _matching_close(letters: str, open_idx: int) -> int:
    depth = 0
    for i in range(open_idx, len(letters)):
        if letters[i] == "[":
            depth += 1
        elif letters[i] == "]":
            depth -= 1
            if depth == 0:
                return i
    raise RewriteError("unbalanced brackets")


def match_context(input: SymbolString, position: int,
                  left_context: str = "", right_context: str = "") -> bool:
    """Check bracketed-2L context at ``position``.

    Left scan skips complete bracketed groups and treats ``[`` as
    transparent.  Right scan skips sibling bracketed groups and stops at
    ``]`` (symbols past the end of the current branch never follow it).
    """
    return _match_context_letters(input.letters(), position,
                                  left_context, right_context)


def _match_context_letters(letters: str, position: int,
                           left_context: str, right_context: str) -> bool:
    # left context, matched right-to-left
    i = position - 1
    for want in reversed(left_context):
        while i >= 0:
            c = letters[i]
            if c == "]":
                i = _matching_open(letters, i) - 1
            elif c == "[":
                i -= 1
            else:
                break
        if i < 0 or letters[i] != want:
            return False
        i -= 1
    # right context, matched left-to-right
    i = position + 1
    for want in right_context:
        while i < len(letters):
            c = letters[i]
            if c == "[":
                i = _matching_close(letters, i) + 1
            else:
                break
        if i >= len(letters) or letters[i] == "]" or letters[i] != want:
            return False
        i += 1
    return True


def _unit_float(seed: int, iteration: int, position: int) -> float:
    """Counter-based uniform draw in [0, 1), independent of traversal order."""
    key = f"{seed}:{iteration}:{position}".encode()
    h = hashlib.blake2b(key, digest_size=8).digest()
    return int.from_bytes(h, "big") / 2**64


def _bind_params(prod: Production, sym: Symbol, grammar: Grammar) -> dict | None:
    """Bind formal parameter names to the symbol's values; None on arity clash."""
    names = prod.formal_params
    if names:
        if len(names) != len(sym.params):
            return None
        return dict(zip(names, sym.params))
    # no formals declared: expose grammar-level names positionally
    return dict(zip(grammar.param_names, sym.params))


def rewrite_step(grammar: Grammar, input: SymbolString,
                 seed: int = 0, iteration: int = 0) -> SymbolString:
    """Apply one parallel rewriting pass.

    All symbols are replaced simultaneously; symbols with no matching
    production (including constants and brackets) are copied unchanged.
    Stochastic choices draw from a counter-based stream keyed by
    (seed, iteration, position), so output is reproducible.
    """
    if not input.is_balanced():
        raise RewriteError("input brackets are unbalanced")
    known = grammar.alphabet | set(BRACKETS)
    letters = input.letters()
    out: list[Symbol] = []
    for pos, sym in enumerate(input):
        if sym.letter not in known:
            raise RewriteError(f"unknown letter {sym.letter!r} at position {pos}")
        _check_arity(grammar, sym)
        chosen = _select_production(grammar, letters, pos, sym, seed, iteration)
        if chosen is None:
            out.append(sym)
            continue
        prod, env = chosen
        out.extend(t.instantiate(env) for t in prod.successor)
    return SymbolString(tuple(out))


def _check_arity(grammar: Grammar, sym: Symbol):
    declared = grammar.arity.get(sym.letter)
    if declared is not None and declared != len(sym.params):
        raise RewriteError(
            f"symbol {sym.letter!r} carries {len(sym.params)} parameters, "
            f"declared arity is {declared}"
        )


def _select_production(grammar, letters, pos, sym, seed, iteration):
    candidates = []
    for prod in grammar.productions:
        if prod.predecessor != sym.letter:
            continue
        env = _bind_params(prod, sym, grammar)
        if env is None:
            continue
        if (prod.left_context or prod.right_context) and not \
                _match_context_letters(letters, pos, prod.left_context,
                                       prod.right_context):
            continue
        if prod.condition is not None and not prod.condition.evaluate(env):
            continue
        candidates.append((prod, env))
    if not candidates:
        return None
    best = max(p.specificity for p, _ in candidates)
    candidates = [(p, e) for p, e in candidates if p.specificity == best]
    if len(candidates) == 1 or candidates[0][0].probability == 1.0:
        return candidates[0]
    draw = _unit_float(seed, iteration, pos)
    acc = 0.0
    for prod, env in candidates:
        acc += prod.probability
        if draw < acc:
            return prod, env
    return candidates[-1]


def rewrite(grammar: Grammar, input: SymbolString,
            iterations: int, seed: int = 0) -> SymbolString:
    """Apply ``iterations`` rewriting passes; zero iterations is the identity."""
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    current = input
    for it in range(iterations):
        current = rewrite_step(grammar, current, seed=seed, iteration=it)
    return current
