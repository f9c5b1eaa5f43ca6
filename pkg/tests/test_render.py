from pattern_kb.alignment import Hit, MultiAlignment, extend_alignment
from pattern_kb.patternfile import parse_new
from pattern_kb.render import SEPARATOR, parse_rendered_columns, render_alignment, render_row_order

from conftest import store_from


def _columns_of(alignment):
    return sorted(
        (c.symbol.name, tuple(sorted(alignment.rows[r].label for r in c.rows)))
        for c in alignment.columns
    )


class TestRenderAlignment:
    def test_smallest_alignment(self):
        store = store_from("X a #X ;\n")
        start = MultiAlignment.from_new(parse_new("a", store))
        a = extend_alignment(start, [Hit(("o", 0, 0), 1)], store.pattern(0))
        text = render_alignment(a)
        assert text == "New |   a\np0  | X a #X\n"
        assert parse_rendered_columns(text) == [("a", ("New", "p0"))]

    def test_one_line_per_row_new_first(self, figure1_ranked):
        best = figure1_ranked[0].alignment
        lines = render_alignment(best).splitlines()
        assert len(lines) == len(best.rows)
        assert lines[0].startswith("New")
        assert all(SEPARATOR in line for line in lines)
        assert render_row_order(best)[0] == 0

    def test_jack_sits_at_one_offset_on_three_lines(self, figure1_ranked):
        best = figure1_ranked[0].alignment
        columns = dict(parse_rendered_columns(render_alignment(best)))
        assert columns["Jack"] == ("New", "jack1", "jackmale")

    def test_rendered_columns_match_the_alignment(self, figure1_ranked):
        for item in figure1_ranked:
            a = item.alignment
            assert sorted(parse_rendered_columns(render_alignment(a))) == _columns_of(a)

    def test_rendering_is_stable(self, figure1_ranked):
        best = figure1_ranked[0].alignment
        assert render_alignment(best) == render_alignment(best)


class TestParseRenderedColumns:
    def test_ignores_lines_without_separator(self):
        text = "header line\nNew | a b\np0  | a   c\n"
        assert parse_rendered_columns(text) == [("a", ("New", "p0"))]

    def test_differing_tokens_at_one_offset_are_skipped(self):
        text = "New | a\np0  | b\n"
        assert parse_rendered_columns(text) == []
