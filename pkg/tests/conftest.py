"""Shared fixtures: the family-tree instance and small helpers."""

import pytest

# one-line verdicts from the acceptance suite, echoed after the test run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from difflog.core import (Atom, CandidateRuleSet, Database, Fact, LabelSet,
                          Problem, RelationDecl, Rule)

PARENT_PAIRS = [
    ("Will", "Noah"), ("Ann", "Noah"), ("Jim", "Emma"),
    ("Ava", "Emma"), ("Noah", "Liam"), ("Emma", "Liam"),
]


def make_family_rules() -> CandidateRuleSet:
    r1 = Rule("r1", Atom("samegen", ("x", "y")),
              (Atom("parent", ("x", "z")), Atom("parent", ("y", "z"))))
    r2 = Rule("r2", Atom("samegen", ("x", "u")),
              (Atom("parent", ("x", "y")), Atom("parent", ("u", "v")),
               Atom("samegen", ("y", "v"))))
    return CandidateRuleSet([r1, r2])


@pytest.fixture
def family_decls():
    return {"parent": RelationDecl("parent", 2, "input"),
            "samegen": RelationDecl("samegen", 2, "output")}


@pytest.fixture
def family_input():
    return Database(Fact("parent", p) for p in PARENT_PAIRS)


@pytest.fixture
def family_rules():
    return make_family_rules()


@pytest.fixture
def family_labels():
    return LabelSet(
        frozenset({Fact("samegen", ("Ann", "Jim"))}),
        frozenset({Fact("samegen", ("Ava", "Liam")), Fact("samegen", ("Jim", "Emma"))}))


@pytest.fixture
def family_problem(family_decls, family_input, family_labels, family_rules):
    return Problem(family_decls, family_input, family_labels, family_rules)
