import pytest
from hypothesis import given, strategies as st

from policycheck.criteria import (
    CriteriaError,
    QuestionnaireAnswers,
    Severity,
    Status,
    check_all,
    evaluate,
    is_complete,
    parse_criteria,
)
from policycheck.prediction import PolicyMetadataPresence


def make_answers(**overrides):
    values = dict(
        q1_controller_identity="Hikari Bank Ltd",
        q2_transfer_outside=True,
        q3_other_recipients=True,
        q4_core_activities=frozenset({"special_categories"}),
        q5_location="inside_europe",
        q6_collection="Both",
        q5_representative_identity="",
    )
    values.update(overrides)
    return QuestionnaireAnswers(**values)


def exact_presence(registry, present_paths):
    chosen = {registry.get(p) for p in present_paths}
    return PolicyMetadataPresence(
        present={t: t in chosen for t in registry}, indices={}
    )


def by_id(criteria):
    return {c.id: c for c in criteria}


def test_q1_required():
    with pytest.raises(CriteriaError, match="Q1"):
        make_answers(q1_controller_identity="  ")


def test_representative_required_iff_outside():
    with pytest.raises(CriteriaError, match="representative"):
        make_answers(q5_location="outside_europe")
    with pytest.raises(CriteriaError, match="representative"):
        make_answers(q5_representative_identity="Holding Bank Services")
    answers = make_answers(
        q5_location="outside_europe",
        q5_representative_identity="Holding Bank Services",
    )
    assert answers.q5_location == "outside_europe"


def test_unknown_core_activity_rejected():
    with pytest.raises(CriteriaError, match="Q4"):
        make_answers(q4_core_activities=frozenset({"sorcery"}))


def test_default_set_has_23_in_order(criteria):
    assert [c.number for c in criteria] == list(range(1, 24))


def test_c5_is_a_conjunction_of_four_singletons(registry, criteria):
    c5 = by_id(criteria)["C5"]
    assert [len(group) for group in c5.postcondition] == [1, 1, 1, 1]
    names = {str(group[0]) for group in c5.postcondition}
    assert names == {
        "Data Subject Right.Access",
        "Data Subject Right.Complaint",
        "Data Subject Right.Rectification",
        "Data Subject Right.Restriction",
    }


def test_c2_is_one_disjunction_group(criteria):
    c2 = by_id(criteria)["C2"]
    assert len(c2.postcondition) == 1
    assert {str(t) for t in c2.postcondition[0]} == {
        "Controller.Contact.Legal Address",
        "Controller.Contact.Email",
        "Controller.Contact.Phone Number",
    }


def test_warning_partition(criteria):
    warnings = {c.id for c in criteria if c.severity is Severity.WARNING}
    assert warnings == {"C6", "C11", "C12", "C13", "C14", "C16", "C18"}


def test_c9_violation_lists_missing_groups(registry, criteria):
    presence = exact_presence(registry, ["Legal Basis.Consent"])
    finding = evaluate(by_id(criteria)["C9"], make_answers(), presence, registry)
    assert finding.status is Status.VIOLATION
    missing = {str(g[0]) for g in finding.missing_groups}
    assert "Data Subject Right.Withdraw Consent" in missing


def test_c3_not_applicable_inside_europe(registry, criteria):
    presence = exact_presence(registry, [])
    finding = evaluate(by_id(criteria)["C3"], make_answers(), presence, registry)
    assert finding.status is Status.NOT_APPLICABLE


def test_c11_not_required_without_transfer(registry, criteria):
    presence = exact_presence(registry, [])
    finding = evaluate(by_id(criteria)["C11"], make_answers(), presence, registry)
    assert finding.status is Status.NOT_REQUIRED


def test_c22_gates(registry, criteria):
    c22 = by_id(criteria)["C22"]
    presence = exact_presence(registry, ["Legal Basis.Legal Obligation"])
    assert (
        evaluate(c22, make_answers(q6_collection="Indirect"), presence, registry).status
        is Status.NOT_APPLICABLE
    )
    no_basis = exact_presence(registry, [])
    assert evaluate(c22, make_answers(), no_basis, registry).status is Status.NOT_REQUIRED
    assert evaluate(c22, make_answers(), presence, registry).status is Status.VIOLATION
    with_pd = exact_presence(
        registry, ["Legal Basis.Legal Obligation", "PD Provision Obliged"]
    )
    assert evaluate(c22, make_answers(), with_pd, registry).status is Status.SATISFIED


def test_descendant_satisfies_requirement(registry, criteria):
    presence = exact_presence(registry, ["Controller.Identity.Legal Name"])
    finding = evaluate(by_id(criteria)["C1"], make_answers(), presence, registry)
    assert finding.status is Status.SATISFIED


def test_check_all_empty_presence(registry, criteria):
    findings = check_all(exact_presence(registry, []), make_answers(), criteria, registry)
    assert len(findings) == 23
    statuses = {f.criterion_id: f.status for f in findings}
    # unconditional criteria violate outright
    for cid in ("C1", "C2", "C5", "C20", "C21"):
        assert statuses[cid] is Status.VIOLATION
    # presence-gated warnings degrade to NOT_REQUIRED
    for cid in ("C6", "C11", "C12", "C13", "C14", "C16", "C18"):
        assert statuses[cid] is Status.NOT_REQUIRED
    assert not is_complete(findings)


def test_check_all_everything_present(registry, criteria):
    presence = exact_presence(registry, [str(t) for t in registry])
    answers = make_answers(
        q5_location="outside_europe",
        q5_representative_identity="Holding Bank Services",
    )
    findings = check_all(presence, answers, criteria, registry)
    assert all(f.status is Status.SATISFIED for f in findings)
    assert is_complete(findings)


def test_adding_presence_is_monotone(registry, criteria):
    base_paths = ["Legal Basis.Consent", "Data Subject Right.Erasure"]
    base = exact_presence(registry, base_paths)
    answers = make_answers()
    before = {
        f.criterion_id: f.status
        for f in check_all(base, answers, criteria, registry)
    }
    for extra in ("Recipients", "PD Time Stored", "Data Subject Right.Object"):
        more = exact_presence(registry, base_paths + [extra])
        after = {
            f.criterion_id: f.status
            for f in check_all(more, answers, criteria, registry)
        }
        for cid, status in before.items():
            if status is Status.SATISFIED:
                assert after[cid] is Status.SATISFIED
            if status is Status.NOT_APPLICABLE:
                assert after[cid] is Status.NOT_APPLICABLE


@given(st.data())
def test_monotonicity_on_random_presence_sets(registry, criteria, data):
    paths = sorted(str(t) for t in registry)
    base_paths = data.draw(st.sets(st.sampled_from(paths), max_size=8))
    extra = data.draw(st.sampled_from(paths))
    answers = make_answers()
    before = {
        f.criterion_id: f.status
        for f in check_all(exact_presence(registry, base_paths), answers, criteria, registry)
    }
    after = {
        f.criterion_id: f.status
        for f in check_all(
            exact_presence(registry, set(base_paths) | {extra}), answers, criteria, registry
        )
    }
    for cid, status in before.items():
        if status is Status.SATISFIED:
            assert after[cid] is Status.SATISFIED
        if status is Status.NOT_APPLICABLE:
            assert after[cid] is Status.NOT_APPLICABLE


def test_parse_rejects_unknown_type(registry):
    with pytest.raises(CriteriaError, match="unknown"):
        parse_criteria("C1 | violation | PRE: none | POST: {Nonexistent.Type}", registry)


def test_parse_rejects_bad_severity(registry):
    with pytest.raises(CriteriaError):
        parse_criteria("C1 | fatal | PRE: none | POST: {Recipients}", registry)


def test_parse_custom_criterion_round_trip(registry):
    [criterion] = parse_criteria(
        "C7 | warning | PRE: A6 in {Both} AND present(Children) | POST: {Recipients} & {PD Security}",
        registry,
    )
    assert criterion.severity is Severity.WARNING
    assert criterion.answer_atoms[0].values == ("Both",)
    assert [str(g[0]) for g in criterion.postcondition] == ["Recipients", "PD Security"]
    assert str(criterion.presence_groups[0][0]) == "Children"
