import pytest

from policycheck.classifiers import KeywordIndex
from policycheck.criteria import check_all
from policycheck.evaluation import (
    ConfusionCounts,
    baseline_identify,
    count_issues,
    count_manifestations,
    metrics,
)
from policycheck.nlp import RawDocument
from policycheck.prediction import PolicyMetadataPresence


def test_overlapping_prediction_is_tp():
    assert count_manifestations((7, 12), (3, 7)) == ConfusionCounts(tp=1)


def test_disjoint_prediction_is_double_penalty():
    assert count_manifestations((12,), (3, 7)) == ConfusionCounts(fp=1, fn=1)


def test_spurious_prediction_is_fp_only():
    assert count_manifestations((12,), ()) == ConfusionCounts(fp=1)


def test_missed_manifestation_is_fn():
    assert count_manifestations((), (3,)) == ConfusionCounts(fn=1)


def test_absent_everywhere_is_tn():
    assert count_manifestations((), ()) == ConfusionCounts(tn=1)


def test_manifestation_counting_partitions():
    cases = [((7,), (7,)), ((12,), (3,)), ((1,), ()), ((), (2,)), ((), ())]
    for predicted, gold in cases:
        c = count_manifestations(predicted, gold)
        assert c.tp + c.fn + c.tn <= 1
        assert c.fp <= 1
        assert c.total >= 1
        double_penalty = c.fp == 1 and c.fn == 1
        disjoint = bool(predicted) and bool(gold) and not (set(predicted) & set(gold))
        assert double_penalty == disjoint


def test_metrics_summary_row():
    m = metrics(ConfusionCounts(tp=300, fp=23, fn=34, tn=1035))
    assert m.precision * 100 == pytest.approx(92.9, abs=0.1)
    assert m.recall * 100 == pytest.approx(89.8, abs=0.1)
    assert m.f_beta * 100 == pytest.approx(90.4, abs=0.1)
    assert m.accuracy * 100 == pytest.approx(95.9, abs=0.1)


def test_metrics_perfect_row():
    m = metrics(ConfusionCounts(tp=2, fp=0, fn=0, tn=46))
    assert (m.accuracy, m.precision, m.recall) == (1.0, 1.0, 1.0)


def test_metrics_two_thirds_precision():
    m = metrics(ConfusionCounts(tp=2, fp=1, fn=0, tn=45))
    assert m.precision * 100 == pytest.approx(66.7, abs=0.1)


def test_f_beta_equals_p_when_p_equals_r():
    for beta in (0.5, 1.0, 2.0, 3.0):
        m = metrics(ConfusionCounts(tp=8, fp=2, fn=2, tn=36), beta=beta)
        assert m.f_beta == pytest.approx(m.precision)


def test_undefined_ratios_are_none_not_zero():
    m = metrics(ConfusionCounts(tp=0, fp=0, fn=3, tn=45))
    assert m.precision is None
    assert m.recall == 0.0
    assert m.f_beta is None


def test_all_zero_counts_all_none():
    m = metrics(ConfusionCounts())
    assert (m.accuracy, m.precision, m.recall, m.f_beta) == (None, None, None, None)


def test_beta_must_be_positive():
    with pytest.raises(ValueError):
        metrics(ConfusionCounts(tp=1), beta=0)


def _findings_for(registry, criteria, answers, present_paths):
    chosen = {registry.get(p) for p in present_paths}
    presence = PolicyMetadataPresence(
        present={t: t in chosen for t in registry}, indices={}
    )
    return {f.criterion_id: f for f in check_all(presence, answers, criteria, registry)}


def test_conjunctive_criterion_counts_per_group(registry, criteria, fixture_answers):
    c9 = next(c for c in criteria if c.id == "C9")
    gold = _findings_for(
        registry, criteria, fixture_answers,
        ["Legal Basis.Consent", "Data Subject Right.Erasure"],
    )["C9"]
    predicted = _findings_for(
        registry, criteria, fixture_answers, ["Legal Basis.Consent"]
    )["C9"]
    counts = count_issues(predicted, gold, c9)
    # Four units: Erasure flagged-but-fine (FP); Object/Portability/Withdraw
    # Consent genuinely missing and flagged (TP).
    assert counts.total == 4
    assert counts == ConfusionCounts(tp=3, fp=1, fn=0, tn=0)


def test_48_policies_yield_192_units_for_c9(registry, criteria, fixture_answers):
    c9 = next(c for c in criteria if c.id == "C9")
    finding = _findings_for(
        registry, criteria, fixture_answers, ["Legal Basis.Consent"]
    )["C9"]
    total = ConfusionCounts()
    for _ in range(48):
        total = total + count_issues(finding, finding, c9)
    assert total.total == 192


def test_disjunctive_criterion_counts_once(registry, criteria, fixture_answers):
    c2 = next(c for c in criteria if c.id == "C2")
    gold = _findings_for(registry, criteria, fixture_answers, [])["C2"]
    predicted = _findings_for(
        registry, criteria, fixture_answers, ["Controller.Contact.Email"]
    )["C2"]
    counts = count_issues(predicted, gold, c2)
    assert counts.total == 1
    assert counts == ConfusionCounts(fn=1)


def test_identical_findings_have_no_errors(registry, criteria, fixture_answers):
    for cid in ("C2", "C9", "C20"):
        criterion = next(c for c in criteria if c.id == cid)
        finding = _findings_for(
            registry, criteria, fixture_answers, ["Legal Basis.Consent"]
        )[cid]
        counts = count_issues(finding, finding, criterion)
        assert counts.fp == 0 and counts.fn == 0


def test_not_required_counts_as_clean_units(registry, criteria, fixture_answers):
    c9 = next(c for c in criteria if c.id == "C9")
    finding = _findings_for(registry, criteria, fixture_answers, [])["C9"]
    counts = count_issues(finding, finding, c9)
    assert counts == ConfusionCounts(tn=4)


def test_baseline_empty_index_finds_nothing(registry, pipeline_config):
    doc = RawDocument(id="d", text="You have the right to access your data.")
    presence = baseline_identify(doc, KeywordIndex(), pipeline_config, registry)
    assert not any(presence.present.values())


def test_baseline_keyword_hit(registry, pipeline_config, keyword_index):
    doc = RawDocument(id="d", text="You have the right to access your data.")
    presence = baseline_identify(doc, keyword_index, pipeline_config, registry)
    assert presence.is_present(registry.get("Data Subject Right.Access"))


def test_baseline_is_deterministic(registry, pipeline_config, keyword_index):
    doc = RawDocument(id="d", text="We use cookies. You may lodge a complaint.")
    a = baseline_identify(doc, keyword_index, pipeline_config, registry)
    b = baseline_identify(doc, keyword_index, pipeline_config, registry)
    assert a.present == b.present and a.indices == b.indices
