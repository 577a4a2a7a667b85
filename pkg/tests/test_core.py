"""Data model, parsing, grounding, and Boolean fixpoint tests."""

import pytest

from difflog.core import (Atom, CandidateRuleSet, Const, Database, Fact,
                          LabelSet, ParseError, Rule, SemanticError,
                          boolean_fixpoint, check_solution, format_rule,
                          ground, parse_fact_lines, parse_problem,
                          parse_relations, parse_rule_line, parse_rules,
                          validate_rule, write_problem)
from conftest import PARENT_PAIRS, make_family_rules


def test_fact_ordering_and_str():
    a = Fact("edge", ("a", "b"))
    b = Fact("edge", ("a", "c"))
    assert a < b
    assert str(a) == "edge(a, b)"


def test_database_dedups_and_indexes():
    f = Fact("edge", ("a", "b"))
    db = Database([f, f, Fact("node", ("a",))])
    assert len(db) == 2
    assert db.relation("edge") == (f,)
    assert f in db
    assert Fact("edge", ("b", "a")) not in db


def test_database_union_and_equality():
    d1 = Database([Fact("p", ("a",))])
    d2 = Database([Fact("p", ("b",))])
    merged = d1.union(d2)
    assert len(merged) == 2
    assert merged == Database([Fact("p", ("b",)), Fact("p", ("a",))])
    assert hash(merged) == hash(Database([Fact("p", ("a",)), Fact("p", ("b",))]))


def test_labelset_rejects_overlap():
    t = Fact("out", ("a",))
    with pytest.raises(SemanticError):
        LabelSet(frozenset({t}), frozenset({t}))


def test_candidate_rule_set_unique_ids():
    r = Rule("r1", Atom("q", ("x",)), (Atom("p", ("x",)),))
    with pytest.raises(SemanticError):
        CandidateRuleSet([r, r])


def test_candidate_rule_set_subset():
    rules = make_family_rules()
    sub = rules.subset(["r2"])
    assert sub.ids() == ["r2"]
    with pytest.raises(SemanticError):
        rules.subset(["r9"])


def test_rule_variables_first_occurrence_order():
    rules = make_family_rules()
    assert rules["r2"].variables() == ["x", "u", "y", "v"]


def test_validate_rule_errors(family_decls):
    head = Atom("samegen", ("x", "y"))
    with pytest.raises(SemanticError, match="empty body"):
        validate_rule(Rule("r", head, ()), family_decls)
    with pytest.raises(SemanticError, match="undeclared"):
        validate_rule(Rule("r", head, (Atom("friend", ("x", "y")),)), family_decls)
    with pytest.raises(SemanticError, match="expects 2 args"):
        validate_rule(Rule("r", head, (Atom("parent", ("x",)),)), family_decls)
    with pytest.raises(SemanticError, match="not an output relation"):
        validate_rule(Rule("r", Atom("parent", ("x", "y")),
                           (Atom("parent", ("x", "y")),)), family_decls)
    with pytest.raises(SemanticError, match="head variable y not bound"):
        validate_rule(Rule("r", head, (Atom("parent", ("x", "z")),)), family_decls)


def test_ground_joins_on_shared_variables(family_input, family_rules):
    clauses = ground(family_rules["r1"], family_input)
    conclusions = {c.conclusion for c in clauses}
    assert Fact("samegen", ("Will", "Ann")) in conclusions
    assert Fact("samegen", ("Ann", "Will")) in conclusions
    assert Fact("samegen", ("Will", "Jim")) not in conclusions
    # reflexive instantiations are real clauses too
    assert Fact("samegen", ("Will", "Will")) in conclusions


def test_ground_handles_constants_in_rules(family_input, family_decls):
    rule = Rule("r", Atom("samegen", ("x", "x")),
                (Atom("parent", (Const("Will"), "x")),))
    validate_rule(rule, family_decls)
    clauses = ground(rule, family_input)
    assert {c.conclusion for c in clauses} == {Fact("samegen", ("Noah", "Noah"))}


def test_boolean_fixpoint_family(family_input, family_rules):
    fixpoint = boolean_fixpoint(family_rules, family_input)
    derived = set(fixpoint.facts())
    assert len(derived) == 20
    assert Fact("samegen", ("Ann", "Jim")) in derived
    assert Fact("samegen", ("Noah", "Emma")) in derived
    assert Fact("samegen", ("Ava", "Liam")) not in derived
    assert Fact("samegen", ("Jim", "Emma")) not in derived
    # derived-only: input tuples are not repeated in the result
    assert Fact("parent", ("Will", "Noah")) not in derived


def test_check_solution_accepts_target(family_input, family_labels, family_rules):
    check = check_solution(family_rules, family_input, family_labels)
    assert check.accepted
    assert not check.missing and not check.spurious


def test_check_solution_reports_spurious(family_input, family_labels, family_rules):
    bad = Rule("r3", Atom("samegen", ("x", "y")), (Atom("parent", ("x", "y")),))
    check = check_solution([*family_rules, bad], family_input, family_labels)
    assert not check.accepted
    assert check.spurious == frozenset({Fact("samegen", ("Jim", "Emma"))})


def test_check_solution_reports_missing(family_input, family_labels, family_rules):
    check = check_solution([family_rules["r1"]], family_input, family_labels)
    assert not check.accepted
    assert check.missing == frozenset({Fact("samegen", ("Ann", "Jim"))})


def test_parse_rule_line_with_and_without_name():
    rule = parse_rule_line("t1: samegen(x,y) :- parent(x,z), parent(y,z).", "r1")
    assert rule.id == "t1"
    assert rule.head == Atom("samegen", ("x", "y"))
    assert len(rule.body) == 2
    anon = parse_rule_line("samegen(x,y) :- parent(x,y).", "r7")
    assert anon.id == "r7"


def test_parse_rule_capitalized_and_quoted_constants():
    rule = parse_rule_line('q(x) :- p(x, Will), p(x, "lower case").', "r1")
    assert rule.body[0].args == ("x", Const("Will"))
    assert rule.body[1].args == ("x", Const("lower case"))


def test_parse_rule_syntax_errors():
    with pytest.raises(ParseError):
        parse_rule_line("samegen(x,y)", "r1")
    with pytest.raises(ParseError):
        parse_rule_line("samegen(x,y) :- parent(x y).", "r1")
    with pytest.raises(ParseError):
        parse_rule_line("samegen(x,y) :- parent(x,y). extra", "r1")


def test_parse_rules_skips_comments_and_blanks():
    text = "# header\n\nr1: q(x) :- p(x).\nq(x) :- p(x), p(x).  # inline\n"
    rules = parse_rules(text)
    assert [r.id for r in rules] == ["r1", "r4"]


def test_format_rule_round_trip(family_rules):
    for rule in family_rules:
        again = parse_rule_line(format_rule(rule), "fallback")
        assert again == rule


def test_parse_relations_and_errors():
    decls = parse_relations("# comment\ninput parent 2\noutput samegen 2\n")
    assert decls["parent"].kind == "input"
    assert decls["samegen"].arity == 2
    for bad in ("parent 2", "input parent two", "inout parent 2",
                "input parent 0", "input parent 2\ninput parent 2"):
        with pytest.raises(ParseError):
            parse_relations(bad)


def test_parse_fact_lines_arity_check(family_decls):
    facts = parse_fact_lines("Will\tNoah\n# c\n\nAnn\tNoah\n", family_decls["parent"])
    assert len(facts) == 2
    with pytest.raises(ParseError):
        parse_fact_lines("Will\n", family_decls["parent"])


def test_problem_round_trip(tmp_path, family_problem):
    write_problem(tmp_path, family_problem.relations, family_problem.input,
                  family_problem.labels, family_problem.rules)
    loaded = parse_problem(tmp_path)
    assert loaded.input == family_problem.input
    assert loaded.labels == family_problem.labels
    assert loaded.rules.ids() == family_problem.rules.ids()
    assert loaded.relations == family_problem.relations


def test_parse_problem_rejects_stray_facts(tmp_path, family_problem):
    write_problem(tmp_path, family_problem.relations, family_problem.input,
                  family_problem.labels, family_problem.rules)
    (tmp_path / "mystery.facts").write_text("a\tb\n")
    with pytest.raises(SemanticError, match="undeclared relation mystery"):
        parse_problem(tmp_path)


def test_parse_problem_missing_pieces(tmp_path):
    with pytest.raises(Exception, match="relations.txt"):
        parse_problem(tmp_path)
    (tmp_path / "relations.txt").write_text("input p 1\noutput q 1\n")
    with pytest.raises(Exception, match="rules.dl"):
        parse_problem(tmp_path)


def test_parse_problem_rejects_labels_on_input_relations(tmp_path):
    (tmp_path / "relations.txt").write_text("input p 1\noutput q 1\n")
    (tmp_path / "rules.dl").write_text("q(x) :- p(x).\n")
    (tmp_path / "labels.pos").write_text("p\ta\n")
    with pytest.raises(ParseError, match="not an output relation"):
        parse_problem(tmp_path)


def test_fixpoint_matches_on_parsed_problem(tmp_path, family_problem):
    write_problem(tmp_path, family_problem.relations, family_problem.input,
                  family_problem.labels, family_problem.rules)
    loaded = parse_problem(tmp_path)
    assert boolean_fixpoint(loaded.rules, loaded.input) == \
        boolean_fixpoint(family_problem.rules, family_problem.input)


def test_parent_fixture_shape():
    assert len(PARENT_PAIRS) == 6
