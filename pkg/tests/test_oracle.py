import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from pattern_kb.alignment import validate_alignment
from pattern_kb.errors import OracleLimitError
from pattern_kb.oracle import brute_force_best
from pattern_kb.patternfile import parse_new
from pattern_kb.store import build_store

from conftest import align, store_from


def _best(store, text, max_rows=4):
    return brute_force_best(store, store.costs, parse_new(text, store), max_rows=max_rows)


def _cost(store, name):
    return store.costs.cost(store.table.lookup(name))


class TestOracle:
    def test_single_candidate(self):
        store = store_from("X a #X ;\n")
        result = _best(store, "a")
        assert len(result.alignments) == 1
        expected = _cost(store, "a") - _cost(store, "X") - _cost(store, "#X")
        assert result.best.cd == pytest.approx(expected)

    def test_nothing_matches(self):
        store = store_from("X a #X ;\n")
        result = _best(store, "q")
        assert not result.found
        assert result.alignments == []

    def test_disjoint_patterns_give_the_best_connected_alignment(self):
        store = store_from("X a b #X ;\nY c #Y ;\n")
        result = _best(store, "a b c")
        x_only = _cost(store, "a") + _cost(store, "b") - _cost(store, "X") - _cost(store, "#X")
        assert result.best.cd == pytest.approx(x_only)
        assert all(validate_alignment(a) == [] for a in result.alignments)

    def test_toy_kb(self, toy):
        result = _best(toy, "a b")
        assert result.best.cd == pytest.approx(2.0)
        assert [row.pattern.label for row in result.alignments[0].rows[1:]] == ["x"]

    def test_refuses_large_instances(self, figure1):
        with pytest.raises(OracleLimitError):
            _best(figure1, "Jack")
        store = store_from("X a #X ;\n")
        with pytest.raises(OracleLimitError):
            _best(store, "a", max_rows=5)
        with pytest.raises(OracleLimitError):
            _best(store, "a a a a a a a a a")


class TestBeamMatchesOracle:
    @pytest.mark.parametrize(
        "kb, query",
        [
            ("X a #X ;\nY X #X b #Y ;\n", "a b"),
            ("X a b c #X ;\nY c d #Y ;\nZ X #X e #Z ;\n", "a b"),
            ("X a b #X ;\nY b c #Y ;\n", "a b c"),
            ("3 x X a b c #X ;\nY a #Y ;\n", "a b c"),
            ("a b c ;\n", "a b c"),
        ],
    )
    def test_curated_instances(self, kb, query):
        store = store_from(kb)
        oracle = _best(store, query)
        ranked = align(store, query, max_rows=4, beam_width=200)
        if oracle.found and oracle.best.cd > 0:
            assert ranked[0].score.cd == pytest.approx(oracle.best.cd, abs=1e-9)
        else:
            assert ranked == []


ALPHABET = [chr(c) for c in range(ord("a"), ord("q"))]


@st.composite
def instances(draw):
    patterns = draw(
        st.lists(
            st.lists(st.sampled_from(ALPHABET), min_size=1, max_size=8, unique=True),
            min_size=1,
            max_size=3,
        )
    )
    frequencies = draw(st.lists(st.integers(1, 5), min_size=len(patterns), max_size=len(patterns)))
    known = sorted({symbol for pattern in patterns for symbol in pattern})
    query = draw(st.lists(st.sampled_from(known), min_size=1, max_size=4))
    if draw(st.booleans()):
        query.append("novel")
    store = build_store([(p, f, None) for p, f in zip(patterns, frequencies)])
    return store, query


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(instances())
def test_beam_matches_the_oracle(instance):
    store, query = instance
    oracle = brute_force_best(store, store.costs, parse_new(query, store), max_rows=4)
    ranked = align(store, " ".join(query), max_rows=4, beam_width=200)
    if oracle.found and oracle.best.cd > 0:
        assert ranked
        assert ranked[0].score.cd == pytest.approx(oracle.best.cd, abs=1e-9)
        assert validate_alignment(ranked[0].alignment) == []
    else:
        assert ranked == []
