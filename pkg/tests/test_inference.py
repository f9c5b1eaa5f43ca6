import pytest

from pattern_kb.alignment import Score
from pattern_kb.errors import InferenceError
from pattern_kb.inference import (
    CoverageGroup,
    extract_inferences,
    group_by_coverage,
    inferred_symbols,
    probability_report,
    recognize,
    relative_probabilities,
)
from pattern_kb.patternfile import load_kb
from pattern_kb.search import RankedAlignment

from conftest import FIGURE1_QUERY, FIGURE1_ROWS, align, row_labels, store_from


def _group(*b_e):
    members = tuple(RankedAlignment(None, Score(b_n=10.0, b_e=value)) for value in b_e)
    return CoverageGroup(frozenset({0}), members)


class TestExtractInferences:
    def test_figure1_infers_the_unseen_attributes(self, figure1_ranked):
        best = figure1_ranked[0].alignment
        assert inferred_symbols(best) >= {"Jones", "doctor", "male", "beard", "deep"}

    def test_matched_and_id_symbols_are_never_inferred(self, figure1_ranked):
        best = figure1_ranked[0].alignment
        names = inferred_symbols(best)
        assert not names & {"Jack", "stethoscope", "fair-hair", "blue-eyes", "Dorking"}
        assert "jack1" not in names
        assert not any(name.startswith("#") for name in names)

    def test_context_is_the_innermost_boundary_pair(self, figure1_ranked):
        best = figure1_ranked[0].alignment
        by_symbol = {inf.symbols: inf for inf in extract_inferences(best) if inf.label == "male"}
        assert by_symbol[("deep",)].context == ("voice", "#voice")
        assert by_symbol[("beard",)].context == ("chin", "#chin")
        jones = next(inf for inf in extract_inferences(best) if inf.symbols == ("Jones",))
        assert (jones.label, jones.context) == ("jack1", ("name", "#name"))

    def test_context_needs_both_twins_in_the_row(self):
        paired = align(store_from("A k j g deep #g ;\n"), "k j")[0].alignment
        assert [inf.context for inf in extract_inferences(paired) if inf.symbols == ("deep",)] == [("g", "#g")]
        lone = align(store_from("A k j g deep ;\n"), "k j")[0].alignment
        assert [inf.context for inf in extract_inferences(lone)] == [None]

    def test_unmatched_opening_boundary_is_listed_alone(self, figure1_ranked):
        best = figure1_ranked[0].alignment
        male_rows = [inf.symbols for inf in extract_inferences(best) if inf.label == "male"]
        assert ("voice",) in male_rows
        assert ("voice", "deep") not in male_rows


class TestRelativeProbabilities:
    def test_single_member(self):
        assert relative_probabilities(_group(7.5)) == (1.0,)

    def test_equal_costs_split_evenly(self):
        assert relative_probabilities(_group(4.0, 4.0)) == pytest.approx((0.5, 0.5))

    def test_one_bit_halves_the_weight(self):
        assert relative_probabilities(_group(3.0, 4.0)) == pytest.approx((2 / 3, 1 / 3))

    def test_large_costs_do_not_underflow(self):
        assert relative_probabilities(_group(5000.0, 5001.0)) == pytest.approx((2 / 3, 1 / 3))

    def test_empty_group_is_an_error(self):
        with pytest.raises(InferenceError):
            relative_probabilities(CoverageGroup(frozenset(), ()))


class TestCoverageGroups:
    def test_groups_partition_the_ranking(self, figure1_ranked):
        groups = group_by_coverage(figure1_ranked)
        assert sum(len(g.members) for g in groups) == len(figure1_ranked)
        assert groups[0].best is figure1_ranked[0]
        for group in groups:
            assert all(item.alignment.covered == group.covered for item in group.members)
        assert len({g.covered for g in groups}) == len(groups)

    def test_probability_laws(self, figure1_ranked):
        for group in group_by_coverage(figure1_ranked):
            report = probability_report(group)
            assert sum(report.p_rel) == pytest.approx(1.0)
            assert all(0.0 < p <= 1.0 for p in report.p_rel)
            assert list(report.p_rel) == sorted(report.p_rel, reverse=True)
            assert all(0.0 < p <= 1.0 for p in report.p_inf.values())


class TestDefaultReasoning:
    def test_a_bird_can_fly(self, tweety):
        ranked = align(tweety, "Tweety bird")
        assert row_labels(ranked[0].alignment) == {"tweety", "bird"}
        assert "canfly" in inferred_symbols(ranked[0].alignment)
        report = probability_report(group_by_coverage(ranked)[0])
        assert report.p_inf["canfly"] >= 0.5
        assert "cannotfly" not in report.p_inf

    def test_a_penguin_cannot(self, tweety):
        ranked = align(tweety, "Tweety penguin")
        best = ranked[0].alignment
        assert row_labels(best) == {"tweety", "penguin"}
        assert "cannotfly" in inferred_symbols(best)
        report = probability_report(group_by_coverage(ranked)[0])
        assert "canfly" not in report.p_inf
        assert report.p_inf["cannotfly"] == pytest.approx(1.0)

    def test_the_default_class_stays_out_under_penguin(self, tweety):
        ranked = align(tweety, "Tweety penguin", top_k_reported=50)
        for item in group_by_coverage(ranked)[0].members:
            assert "bird" not in row_labels(item.alignment)

    def test_more_specific_evidence_revises_the_answer(self, tweety):
        before = probability_report(group_by_coverage(align(tweety, "Tweety bird"))[0]).p_inf
        after = probability_report(group_by_coverage(align(tweety, "Tweety penguin"))[0]).p_inf
        assert "canfly" in before and "cannotfly" not in before
        assert "cannotfly" in after and "canfly" not in after


class TestAbduction:
    def test_cause_probabilities_follow_frequency(self, car):
        ranked = align(car, "car-wont-start")
        groups = group_by_coverage(ranked)
        assert len(groups) == 1
        p_inf = probability_report(groups[0]).p_inf
        assert p_inf["flat-battery"] == pytest.approx(50 / 530)
        assert p_inf["no-fuel"] == pytest.approx(30 / 530)
        assert p_inf["dirty-plugs"] == pytest.approx(20 / 530)
        assert p_inf["flat-battery"] > p_inf["no-fuel"] > p_inf["dirty-plugs"]


class TestRecognize:
    def test_figure1_rows_are_reported(self, figure1_ranked):
        entries = recognize(figure1_ranked[0].alignment)
        assert {e.label for e in entries} == FIGURE1_ROWS
        for entry in entries:
            assert 1 <= entry.matched <= entry.length
        jack1 = next(e for e in entries if e.label == "jack1")
        assert jack1.length == 11

    def test_penguin_is_recognized_as_a_bird_class_member(self, tweety):
        best = align(tweety, "Tweety penguin")[0].alignment
        assert {e.label for e in recognize(best)} == {"tweety", "penguin"}


def _colour_kb(black: int) -> str:
    return (
        "hair: %hair %hcolour %#hcolour %#hair ;\n"
        f"black: {black} x %black %hcolour black-hair %#hcolour ;\n"
        "red: %red %hcolour red-hair %#hcolour ;\n"
    )


class TestFrequencyMonotonicity:
    def test_raising_one_alternative_never_lowers_it(self):
        previous = 0.0
        for black in range(1, 6):
            ranked = align(store_from(_colour_kb(black)), "hair #hair")
            groups = group_by_coverage(ranked)
            assert len(groups) == 1
            p_inf = probability_report(groups[0]).p_inf
            assert p_inf["black-hair"] == pytest.approx(black / (black + 1))
            assert p_inf["red-hair"] == pytest.approx(1 / (black + 1))
            assert p_inf["black-hair"] >= previous
            previous = p_inf["black-hair"]


CORPUS_QUERIES = [
    ("figure1", FIGURE1_QUERY),
    ("figure1", "Jack Dorking"),
    ("figure1-extended", FIGURE1_QUERY),
    ("tweety", "Tweety bird"),
    ("tweety", "Tweety penguin"),
    ("car", "car-wont-start"),
    ("toy", "a b"),
    ("toy", "a b c d"),
]


@pytest.mark.parametrize("kb, query", CORPUS_QUERIES)
def test_probability_laws_hold_for_every_group(kb_dir, kb, query):
    ranked = align(load_kb(kb_dir / f"{kb}.sp"), query)
    for group in group_by_coverage(ranked):
        report = probability_report(group)
        assert sum(report.p_rel) == pytest.approx(1.0, abs=1e-9)
        assert all(0.0 < p <= 1.0 for p in report.p_rel)
        assert all(0.0 < p <= 1.0 for p in report.p_inf.values())
        shared = frozenset.intersection(*(inferred_symbols(i.alignment) for i in group.members))
        for name in shared:
            assert report.p_inf[name] == pytest.approx(1.0, abs=1e-9)
