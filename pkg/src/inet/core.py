"""Syntactic side of the calculus: signatures, terms, rules, configurations.

Everything in this module is plain AST data plus pure validation and
comparison helpers. The mutable runtime graph lives in `inet.engine`,
the concrete text format in `inet.syntax`.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

# Diagnostic categories shared by the validator and the parser.
ARITY_MISMATCH = "ArityMismatch"
NAME_LINEARITY = "NameLinearity"
DUPLICATE_RULE = "DuplicateRule"
UNDECLARED_SYMBOL = "UndeclaredSymbol"
NEEDED_ON_NAME = "NeededOnName"
ARGS_ON_NAME = "ArgsOnName"

# (line, column), both 1-based.
Loc = tuple


class UnknownNetError(KeyError):
    """Raised when a net name cannot be resolved in a system."""

    def __str__(self):
        return self.args[0] if self.args else "unknown net"


class InvalidSystemError(ValueError):
    """Raised when an operation requires a system that validates cleanly."""

    def __init__(self, diagnostics):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class AgentSymbol:
    """A declared agent type: dense handle, unique name, fixed arity."""

    id: int
    name: str
    arity: int

    def __str__(self):
        return f"{self.name}/{self.arity}"


class Signature:
    """Ordered collection of agent symbols; name lookup is injective."""

    def __init__(self):
        self.symbols: list[AgentSymbol] = []
        self._by_name: dict[str, AgentSymbol] = {}

    def declare(self, name: str, arity: int) -> AgentSymbol:
        if arity < 0:
            raise ValueError(f"arity of {name!r} must be non-negative")
        if name in self._by_name:
            raise ValueError(f"agent {name!r} declared twice")
        sym = AgentSymbol(len(self.symbols), name, arity)
        self.symbols.append(sym)
        self._by_name[name] = sym
        return sym

    def get(self, name: str) -> Optional[AgentSymbol]:
        return self._by_name.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)


@dataclass
class NameTerm:
    """One occurrence of a name; the two occurrences of a name form a wire."""

    name: str
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass
class AgentTerm:
    """An agent with exactly `symbol.arity` argument terms.

    `needed` marks the term as demanded; the marker is only ever valid
    on agent terms, never on names.
    """

    symbol: AgentSymbol
    args: list
    needed: bool = False
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


Term = Union[AgentTerm, NameTerm]


@dataclass
class Equation:
    lhs: Term
    rhs: Term
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass
class Configuration:
    """A list of equations; order is presentation only, semantics is a multiset."""

    equations: list

    def __len__(self):
        return len(self.equations)


@dataclass
class RuleSide:
    symbol: AgentSymbol
    templates: list


@dataclass
class Rule:
    """An unordered pair of rule sides; `left` is the first written operand."""

    left: RuleSide
    right: RuleSide
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)

    def pair_key(self):
        a, b = self.left.symbol.id, self.right.symbol.id
        return (a, b) if a <= b else (b, a)


class RuleSet:
    """Rules indexed by unordered symbol pair; first declaration wins."""

    def __init__(self):
        self.rules: list[Rule] = []
        self.duplicates: list[Rule] = []
        self._index: dict[tuple, Rule] = {}

    def add(self, rule: Rule):
        key = rule.pair_key()
        if key in self._index:
            self.duplicates.append(rule)
        else:
            self._index[key] = rule
        self.rules.append(rule)

    def lookup(self, a: AgentSymbol, b: AgentSymbol):
        """Return (rule, swapped) for the pair {a, b}, or None.

        `swapped` is False when `a` matches the rule's left side; for
        rules with the same symbol on both sides it is always False.
        """
        key = (a.id, b.id) if a.id <= b.id else (b.id, a.id)
        rule = self._index.get(key)
        if rule is None:
            return None
        return rule, rule.left.symbol.id != a.id

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)


def lookup_rule(rules: RuleSet, a: AgentSymbol, b: AgentSymbol):
    return rules.lookup(a, b)


class InteractionSystem:
    """A signature, a rule set, and named configurations."""

    def __init__(self, signature: Signature, rules: RuleSet, nets: dict):
        self.signature = signature
        self.rules = rules
        self.nets = dict(nets)  # name -> Configuration; "" for an anonymous net

    def get_net(self, name: Optional[str] = None) -> Configuration:
        if name is None:
            if len(self.nets) == 1:
                return next(iter(self.nets.values()))
            raise UnknownNetError(
                f"system defines {len(self.nets)} nets; a net name is required"
            )
        if name not in self.nets:
            raise UnknownNetError(f"no net named {name!r}")
        return self.nets[name]

    def default_net_name(self) -> Optional[str]:
        if len(self.nets) == 1:
            return next(iter(self.nets))
        return None


@dataclass
class Diagnostic:
    category: str
    message: str
    loc: Optional[Loc] = None

    def __str__(self):
        where = f"{self.loc[0]}:{self.loc[1]}: " if self.loc else ""
        return f"{where}{self.category}: {self.message}"


def iter_terms(root: Term) -> Iterator[Term]:
    """Preorder iteration over a term; iterative, terms can be very deep."""
    stack = [root]
    while stack:
        t = stack.pop()
        yield t
        if isinstance(t, AgentTerm):
            stack.extend(reversed(t.args))


def iter_config_terms(config: Configuration) -> Iterator[Term]:
    for eq in config.equations:
        yield from iter_terms(eq.lhs)
        yield from iter_terms(eq.rhs)


def occurrence_count(config: Configuration, name: str) -> int:
    """Exact number of occurrences of `name` in the configuration."""
    n = 0
    for t in iter_config_terms(config):
        if isinstance(t, NameTerm) and t.name == name:
            n += 1
    return n


def _check_terms(terms, signature, diags, context):
    """Arity and declaration checks for every agent term below `terms`."""
    for root in terms:
        for t in iter_terms(root):
            if not isinstance(t, AgentTerm):
                continue
            declared = signature.get(t.symbol.name)
            if declared != t.symbol:
                diags.append(Diagnostic(
                    UNDECLARED_SYMBOL,
                    f"agent {t.symbol.name!r} is not declared {context}",
                    t.loc,
                ))
                continue
            if len(t.args) != t.symbol.arity:
                diags.append(Diagnostic(
                    ARITY_MISMATCH,
                    f"{t.symbol.name} has arity {t.symbol.arity} "
                    f"but is applied to {len(t.args)} argument(s) {context}",
                    t.loc,
                ))


def _name_occurrences(terms):
    counts = Counter()
    first_loc = {}
    for root in terms:
        for t in iter_terms(root):
            if isinstance(t, NameTerm):
                counts[t.name] += 1
                first_loc.setdefault(t.name, t.loc)
    return counts, first_loc


def validate_system(system: InteractionSystem) -> list:
    """All static checks; an empty result means the system is well formed.

    Checks: arity of every agent term, declaration of every symbol used,
    exactly-twice name linearity in each rule, zero-or-twice linearity in
    each net, and at most one rule per unordered symbol pair. Validation
    is pure; the same system always yields the same diagnostics.
    """
    diags: list[Diagnostic] = []
    sig = system.signature

    for rule in system.rules:
        for side in (rule.left, rule.right):
            declared = sig.get(side.symbol.name)
            if declared != side.symbol:
                diags.append(Diagnostic(
                    UNDECLARED_SYMBOL,
                    f"rule head {side.symbol.name!r} is not declared",
                    rule.loc,
                ))
            elif len(side.templates) != side.symbol.arity:
                diags.append(Diagnostic(
                    ARITY_MISMATCH,
                    f"rule side {side.symbol.name} has {len(side.templates)} "
                    f"template(s) for arity {side.symbol.arity}",
                    rule.loc,
                ))
            _check_terms(side.templates, sig, diags, "in rule")
        counts, locs = _name_occurrences(
            rule.left.templates + rule.right.templates
        )
        for name, n in counts.items():
            if n != 2:
                diags.append(Diagnostic(
                    NAME_LINEARITY,
                    f"name {name!r} occurs {n} time(s) in rule "
                    f"{rule.left.symbol.name}><{rule.right.symbol.name}; "
                    f"rule names must occur exactly twice",
                    locs[name],
                ))

    for rule in system.rules.duplicates:
        diags.append(Diagnostic(
            DUPLICATE_RULE,
            f"duplicate rule for pair "
            f"{rule.left.symbol.name}><{rule.right.symbol.name}",
            rule.loc,
        ))

    for net_name, config in system.nets.items():
        label = f"in net {net_name!r}" if net_name else "in net"
        sides = []
        for eq in config.equations:
            sides.append(eq.lhs)
            sides.append(eq.rhs)
        _check_terms(sides, sig, diags, label)
        counts, locs = _name_occurrences(sides)
        for name, n in counts.items():
            if n != 2:
                diags.append(Diagnostic(
                    NAME_LINEARITY,
                    f"name {name!r} occurs {n} time(s) {label}; "
                    f"names must occur exactly twice or not at all",
                    locs[name],
                ))

    return diags


# --- structural comparison -------------------------------------------------

def _term_shape(term: Term) -> str:
    """Symbol skeleton of a term with all names masked out."""
    parts = []
    stack = [term]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            parts.append(item)
        elif isinstance(item, NameTerm):
            parts.append("_")
        else:
            head = ("!" if item.needed else "") + item.symbol.name
            if item.args:
                parts.append(head + "(")
                stack.append(")")
                for i in range(len(item.args) - 1, -1, -1):
                    stack.append(item.args[i])
                    if i > 0:
                        stack.append(",")
            else:
                parts.append(head)
    return "".join(parts)


def _match_terms(a: Term, b: Term, fwd: dict, bwd: dict) -> bool:
    """Match two terms under a name bijection; extends fwd/bwd in place."""
    stack = [(a, b)]
    while stack:
        ta, tb = stack.pop()
        if isinstance(ta, NameTerm):
            if not isinstance(tb, NameTerm):
                return False
            if fwd.get(ta.name, tb.name) != tb.name:
                return False
            if bwd.get(tb.name, ta.name) != ta.name:
                return False
            fwd[ta.name] = tb.name
            bwd[tb.name] = ta.name
        else:
            if not isinstance(tb, AgentTerm):
                return False
            if ta.symbol != tb.symbol or ta.needed != tb.needed:
                return False
            if len(ta.args) != len(tb.args):
                return False
            stack.extend(zip(ta.args, tb.args))
    return True


def _match_equation(ea: Equation, eb: Equation, fwd: dict, bwd: dict) -> bool:
    # Equations are symmetric: try both side pairings, committing the
    # bijection only on success.
    for la, ra in ((ea.lhs, ea.rhs), (ea.rhs, ea.lhs)):
        f, b = dict(fwd), dict(bwd)
        if _match_terms(la, eb.lhs, f, b) and _match_terms(ra, eb.rhs, f, b):
            fwd.clear()
            fwd.update(f)
            bwd.clear()
            bwd.update(b)
            return True
    return False


def configs_isomorphic(a: Configuration, b: Configuration, *,
                       ordered: bool = False) -> bool:
    """Structural equality modulo a bijective renaming of names.

    With `ordered=False` (the default) the equations of `b` may appear
    in any order; equation sides may always be flipped, since an
    equation is an unordered connection of its two sides.
    """
    if len(a.equations) != len(b.equations):
        return False
    if ordered:
        fwd: dict = {}
        bwd: dict = {}
        return all(
            _match_equation(ea, eb, fwd, bwd)
            for ea, eb in zip(a.equations, b.equations)
        )

    def shape_key(eq):
        s1, s2 = _term_shape(eq.lhs), _term_shape(eq.rhs)
        return min(s1 + "=" + s2, s2 + "=" + s1)

    if Counter(map(shape_key, a.equations)) != Counter(map(shape_key, b.equations)):
        return False

    eqs_b = list(b.equations)

    def backtrack(i, used, fwd, bwd):
        if i == len(a.equations):
            return True
        ea = a.equations[i]
        key = shape_key(ea)
        for j, eb in enumerate(eqs_b):
            if j in used or shape_key(eb) != key:
                continue
            f, bk = dict(fwd), dict(bwd)
            if _match_equation(ea, eb, f, bk):
                if backtrack(i + 1, used | {j}, f, bk):
                    return True
        return False

    return backtrack(0, frozenset(), {}, {})
