"""Datalog data model, text formats, grounding, and Boolean fixpoint evaluation.

Constants are opaque interned strings.  Rules are pure positive Datalog:
no negation, no arithmetic, and every head variable must occur in the body
(range restriction).  All structures are immutable after construction and
safe to share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, NamedTuple

Constant = str

INPUT = "input"
OUTPUT = "output"

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class ProblemError(Exception):
    """Base error for malformed problem instances."""


class ParseError(ProblemError):
    """Syntax error in a problem file, with location information."""

    def __init__(self, message: str, path: str | Path | None = None,
                 line: int | None = None, column: int | None = None):
        loc = ""
        if path is not None:
            loc += str(path)
        if line is not None:
            loc += f":{line}"
        if column is not None:
            loc += f":{column}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = str(path) if path is not None else None
        self.line = line
        self.column = column


class SemanticError(ProblemError):
    """Well-formed syntax with invalid meaning (unknown relation, bad arity...)."""


@dataclass(frozen=True)
class RelationDecl:
    name: str
    arity: int
    kind: str  # INPUT or OUTPUT

    def __post_init__(self):
        if not IDENT_RE.match(self.name):
            raise SemanticError(f"invalid relation name {self.name!r}")
        if self.arity < 1:
            raise SemanticError(f"relation {self.name}: arity must be >= 1")
        if self.kind not in (INPUT, OUTPUT):
            raise SemanticError(f"relation {self.name}: kind must be input or output")


@dataclass(frozen=True, order=True)
class Fact:
    """A ground tuple: relation name plus constant arguments."""

    relation: str
    args: tuple[Constant, ...]

    def __str__(self):
        return f"{self.relation}({', '.join(self.args)})"


@dataclass(frozen=True)
class Const:
    """A constant appearing in a rule atom (written quoted in rule files)."""

    value: str

    def __str__(self):
        return f'"{self.value}"'


Term = "str | Const"  # variables are bare strings


@dataclass(frozen=True)
class Atom:
    relation: str
    args: tuple  # of variable names (str) or Const

    def variables(self) -> Iterator[str]:
        for a in self.args:
            if isinstance(a, str):
                yield a

    def __str__(self):
        return f"{self.relation}({','.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Rule:
    id: str
    head: Atom
    body: tuple[Atom, ...]

    def variables(self) -> list[str]:
        """All variables, in first-occurrence order (head first)."""
        seen: dict[str, None] = {}
        for atom in (self.head, *self.body):
            for v in atom.variables():
                seen.setdefault(v)
        return list(seen)

    def __str__(self):
        body = ", ".join(str(a) for a in self.body)
        return f"{self.head} :- {body}."


def validate_rule(rule: Rule, decls: Mapping[str, RelationDecl]) -> None:
    """Raise SemanticError unless the rule is well-formed against the declarations."""
    if not rule.body:
        raise SemanticError(f"rule {rule.id}: empty body")
    for atom in (rule.head, *rule.body):
        decl = decls.get(atom.relation)
        if decl is None:
            raise SemanticError(f"rule {rule.id}: undeclared relation {atom.relation}")
        if len(atom.args) != decl.arity:
            raise SemanticError(
                f"rule {rule.id}: {atom.relation} expects {decl.arity} args, got {len(atom.args)}")
    if decls[rule.head.relation].kind != OUTPUT:
        raise SemanticError(f"rule {rule.id}: head relation {rule.head.relation} is not an output relation")
    body_vars = {v for atom in rule.body for v in atom.variables()}
    for v in rule.head.variables():
        if v not in body_vars:
            raise SemanticError(f"rule {rule.id}: head variable {v} not bound in body")


class Database:
    """An immutable set of ground tuples, indexed by relation name."""

    __slots__ = ("_tuples",)

    def __init__(self, facts: Iterable[Fact] = ()):
        by_rel: dict[str, set[Fact]] = {}
        for f in facts:
            by_rel.setdefault(f.relation, set()).add(f)
        object.__setattr__(self, "_tuples",
                           {rel: tuple(sorted(fs)) for rel, fs in sorted(by_rel.items())})

    @property
    def tuples(self) -> Mapping[str, tuple[Fact, ...]]:
        return self._tuples

    def relation(self, name: str) -> tuple[Fact, ...]:
        return self._tuples.get(name, ())

    def facts(self) -> Iterator[Fact]:
        for fs in self._tuples.values():
            yield from fs

    def __contains__(self, fact: Fact) -> bool:
        return fact in self._tuples.get(fact.relation, ())

    def __len__(self):
        return sum(len(fs) for fs in self._tuples.values())

    def __eq__(self, other):
        return isinstance(other, Database) and self._tuples == other._tuples

    def __hash__(self):
        return hash(tuple(self._tuples.items()))

    def union(self, other: "Database") -> "Database":
        return Database([*self.facts(), *other.facts()])

    def __repr__(self):
        return f"Database({len(self)} tuples over {len(self._tuples)} relations)"


@dataclass(frozen=True)
class LabelSet:
    positive: frozenset[Fact]
    negative: frozenset[Fact]

    def __post_init__(self):
        overlap = self.positive & self.negative
        if overlap:
            raise SemanticError(f"tuples labeled both positive and negative: {sorted(overlap)}")


@dataclass(frozen=True)
class GroundClause:
    """A rule instantiated with constants.

    ``antecedents`` preserves body-literal order and multiplicity; use
    ``antecedent_set`` for the set A_g.
    """

    rule_id: str
    antecedents: tuple[Fact, ...]
    conclusion: Fact

    @property
    def antecedent_set(self) -> frozenset[Fact]:
        return frozenset(self.antecedents)


class CandidateRuleSet:
    """The candidate pool the synthesizer selects from; rule ids are unique."""

    __slots__ = ("_rules", "_by_id")

    def __init__(self, rules: Iterable[Rule]):
        rules = tuple(rules)
        by_id: dict[str, Rule] = {}
        for r in rules:
            if r.id in by_id:
                raise SemanticError(f"duplicate rule id {r.id}")
            by_id[r.id] = r
        self._rules = rules
        self._by_id = by_id

    @property
    def rules(self) -> tuple[Rule, ...]:
        return self._rules

    def __iter__(self) -> Iterator[Rule]:
        return iter(self._rules)

    def __len__(self):
        return len(self._rules)

    def __getitem__(self, rule_id: str) -> Rule:
        return self._by_id[rule_id]

    def __contains__(self, rule_id: str) -> bool:
        return rule_id in self._by_id

    def ids(self) -> list[str]:
        return [r.id for r in self._rules]

    def subset(self, rule_ids: Iterable[str]) -> "CandidateRuleSet":
        wanted = set(rule_ids)
        missing = wanted - set(self._by_id)
        if missing:
            raise SemanticError(f"unknown rule ids: {sorted(missing)}")
        return CandidateRuleSet(r for r in self._rules if r.id in wanted)


class Problem(NamedTuple):
    relations: dict[str, RelationDecl]
    input: Database
    labels: LabelSet
    rules: CandidateRuleSet


# ---------------------------------------------------------------------------
# Grounding and Boolean evaluation
# ---------------------------------------------------------------------------

def _match_atom(atom: Atom, fact: Fact, binding: dict[str, Constant]) -> dict[str, Constant] | None:
    new = None
    for term, const in zip(atom.args, fact.args):
        if isinstance(term, Const):
            if term.value != const:
                return None
        else:
            bound = binding.get(term) if new is None else new.get(term, binding.get(term))
            if bound is None:
                if new is None:
                    new = dict(binding)
                new[term] = const
            elif bound != const:
                return None
    return binding if new is None else new


def ground(rule: Rule, facts: Database) -> set[GroundClause]:
    """All instantiations of ``rule`` whose body atoms all match facts."""
    clauses: set[GroundClause] = set()

    def extend(i: int, binding: dict[str, Constant], ants: list[Fact]):
        if i == len(rule.body):
            head_args = tuple(
                a.value if isinstance(a, Const) else binding[a] for a in rule.head.args)
            clauses.add(GroundClause(rule.id, tuple(ants), Fact(rule.head.relation, head_args)))
            return
        atom = rule.body[i]
        for fact in facts.relation(atom.relation):
            nb = _match_atom(atom, fact, binding)
            if nb is not None:
                ants.append(fact)
                extend(i + 1, nb, ants)
                ants.pop()

    extend(0, {}, [])
    return clauses


def boolean_fixpoint(rules: Iterable[Rule], input: Database) -> Database:
    """Least fixpoint under classical semantics; returns derived tuples only."""
    rules = tuple(rules)
    derived: set[Fact] = set()
    current = input
    while True:
        new = set()
        for rule in rules:
            for clause in ground(rule, current):
                if clause.conclusion not in derived and clause.conclusion not in input:
                    new.add(clause.conclusion)
        if not new:
            return Database(derived)
        derived |= new
        current = Database([*input.facts(), *derived])


@dataclass(frozen=True)
class SolutionCheck:
    accepted: bool
    missing: frozenset[Fact]
    spurious: frozenset[Fact]


def check_solution(rules: Iterable[Rule], input: Database, labels: LabelSet) -> SolutionCheck:
    """Accept iff the rules derive every positive label and no negative label."""
    fixpoint = boolean_fixpoint(rules, input)
    missing = frozenset(t for t in labels.positive if t not in fixpoint)
    spurious = frozenset(t for t in labels.negative if t in fixpoint)
    return SolutionCheck(not missing and not spurious, missing, spurious)


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""[ \t]*(?:(?P<id>[A-Za-z_][A-Za-z0-9_]*)
                                  |(?P<str>"[^"]*")
                                  |(?P<sym>:-|[(),.:]))""", re.VERBOSE)


def _tokenize_rule_line(text: str, path, lineno: int) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos] in " \t":
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.start(m.lastgroup) != pos:
            raise ParseError(f"unexpected character {text[pos]!r}", path, lineno, pos + 1)
        tokens.append((m.lastgroup, m.group(m.lastgroup), pos + 1))
        pos = m.end()
    return tokens


class _RuleParser:
    def __init__(self, tokens, path, lineno):
        self.tokens = tokens
        self.path = path
        self.lineno = lineno
        self.i = 0

    def peek(self, offset=0):
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else (None, None, None)

    def take(self, kind=None, value=None):
        k, v, col = self.peek()
        if k is None:
            raise ParseError("unexpected end of rule", self.path, self.lineno)
        if (kind is not None and k != kind) or (value is not None and v != value):
            raise ParseError(f"unexpected token {v!r}", self.path, self.lineno, col)
        self.i += 1
        return v

    def atom(self) -> Atom:
        name = self.take("id")
        self.take("sym", "(")
        args: list = []
        while True:
            k, v, col = self.peek()
            if k == "id":
                self.take()
                # lowercase/underscore-initial tokens are variables; others constants
                args.append(v if v[0].islower() or v[0] == "_" else Const(v))
            elif k == "str":
                self.take()
                args.append(Const(v[1:-1]))
            else:
                raise ParseError(f"expected argument, got {v!r}", self.path, self.lineno, col)
            if self.peek()[1] == ",":
                self.take()
            else:
                break
        self.take("sym", ")")
        return Atom(name, tuple(args))

    def rule(self, default_id: str) -> Rule:
        rule_id = default_id
        if self.peek()[0] == "id" and self.peek(1)[1] == ":":
            rule_id = self.take("id")
            self.take("sym", ":")
        head = self.atom()
        self.take("sym", ":-")
        body = [self.atom()]
        while self.peek()[1] == ",":
            self.take()
            body.append(self.atom())
        self.take("sym", ".")
        if self.peek()[0] is not None:
            raise ParseError("trailing tokens after rule", self.path, self.lineno, self.peek()[2])
        return Rule(rule_id, head, tuple(body))


def parse_rule_line(text: str, default_id: str, path=None, lineno: int = 0) -> Rule:
    tokens = _tokenize_rule_line(text, path, lineno)
    return _RuleParser(tokens, path, lineno).rule(default_id)


def parse_rules(text: str, path=None) -> list[Rule]:
    rules = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        rules.append(parse_rule_line(line, f"r{lineno}", path, lineno))
    return rules


def format_term(term) -> str:
    return f'"{term.value}"' if isinstance(term, Const) else term


def format_atom(atom: Atom) -> str:
    return f"{atom.relation}({','.join(format_term(a) for a in atom.args)})"


def format_rule(rule: Rule, with_id: bool = True) -> str:
    body = ", ".join(format_atom(a) for a in rule.body)
    text = f"{format_atom(rule.head)} :- {body}."
    return f"{rule.id}: {text}" if with_id else text


def parse_relations(text: str, path=None) -> dict[str, RelationDecl]:
    decls: dict[str, RelationDecl] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] not in (INPUT, OUTPUT):
            raise ParseError("expected 'input|output <name> <arity>'", path, lineno)
        kind, name, arity_text = parts
        if not IDENT_RE.match(name):
            raise ParseError(f"invalid relation name {name!r}", path, lineno)
        try:
            arity = int(arity_text)
        except ValueError:
            raise ParseError(f"invalid arity {arity_text!r}", path, lineno) from None
        if arity < 1:
            raise ParseError("arity must be >= 1", path, lineno)
        if name in decls:
            raise ParseError(f"duplicate relation {name}", path, lineno)
        decls[name] = RelationDecl(name, arity, kind)
    return decls


def parse_fact_lines(text: str, decl: RelationDecl, path=None) -> list[Fact]:
    facts = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != decl.arity:
            raise ParseError(
                f"{decl.name} has arity {decl.arity}, got {len(fields)} fields", path, lineno)
        facts.append(Fact(decl.name, tuple(f.strip() for f in fields)))
    return facts


def parse_label_lines(text: str, decls: Mapping[str, RelationDecl], path=None) -> list[Fact]:
    facts = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        name = fields[0].strip()
        decl = decls.get(name)
        if decl is None:
            raise ParseError(f"undeclared relation {name}", path, lineno)
        if decl.kind != OUTPUT:
            raise ParseError(f"labeled relation {name} is not an output relation", path, lineno)
        if len(fields) - 1 != decl.arity:
            raise ParseError(
                f"{name} has arity {decl.arity}, got {len(fields) - 1} fields", path, lineno)
        facts.append(Fact(name, tuple(f.strip() for f in fields[1:])))
    return facts


def parse_problem(directory: str | Path) -> Problem:
    """Load and validate a problem directory.

    Layout: relations.txt, <relation>.facts per input relation (optional,
    empty if absent), labels.pos / labels.neg (optional), rules.dl.
    """
    directory = Path(directory)
    rel_path = directory / "relations.txt"
    if not rel_path.is_file():
        raise ProblemError(f"missing {rel_path}")
    decls = parse_relations(rel_path.read_text(), rel_path)

    for facts_path in directory.glob("*.facts"):
        name = facts_path.stem
        decl = decls.get(name)
        if decl is None:
            raise SemanticError(f"{facts_path}: facts file for undeclared relation {name}")
        if decl.kind != INPUT:
            raise SemanticError(f"{facts_path}: facts file for non-input relation {name}")

    facts: list[Fact] = []
    for decl in decls.values():
        if decl.kind != INPUT:
            continue
        facts_path = directory / f"{decl.name}.facts"
        if facts_path.is_file():
            facts.extend(parse_fact_lines(facts_path.read_text(), decl, facts_path))
    input_db = Database(facts)

    def load_labels(filename: str) -> frozenset[Fact]:
        path = directory / filename
        if not path.is_file():
            return frozenset()
        return frozenset(parse_label_lines(path.read_text(), decls, path))

    labels = LabelSet(load_labels("labels.pos"), load_labels("labels.neg"))

    rules_path = directory / "rules.dl"
    if not rules_path.is_file():
        raise ProblemError(f"missing {rules_path}")
    rules = parse_rules(rules_path.read_text(), rules_path)
    for rule in rules:
        validate_rule(rule, decls)
    return Problem(decls, input_db, labels, CandidateRuleSet(rules))


def write_problem(directory: str | Path, decls: Mapping[str, RelationDecl],
                  input: Database, labels: LabelSet, rules: Iterable[Rule]) -> None:
    """Write a problem directory in the standard layout."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [f"{d.kind} {d.name} {d.arity}" for d in decls.values()]
    (directory / "relations.txt").write_text("\n".join(lines) + "\n")
    for decl in decls.values():
        if decl.kind != INPUT:
            continue
        rows = ["\t".join(f.args) for f in input.relation(decl.name)]
        (directory / f"{decl.name}.facts").write_text("\n".join(rows) + ("\n" if rows else ""))
    for filename, tuples in (("labels.pos", labels.positive), ("labels.neg", labels.negative)):
        rows = ["\t".join((f.relation, *f.args)) for f in sorted(tuples)]
        (directory / filename).write_text("\n".join(rows) + ("\n" if rows else ""))
    rule_lines = [format_rule(r) for r in rules]
    header = "# candidate rules\n"
    (directory / "rules.dl").write_text(header + "\n".join(rule_lines) + ("\n" if rule_lines else ""))
