import string

import pytest
from hypothesis import given, strategies as st

from taxoroll.errors import DepthExceeded, InvalidCode
from taxoroll.hierarchy import (
    BreakdownLevel,
    Hierarchy,
    ancestors,
    is_descendant_or_self,
    load_hierarchy,
    parent_of,
    parse_code,
)

codes = st.text(alphabet=string.ascii_uppercase, min_size=1, max_size=3)


class TestParseCode:
    def test_identity_after_validation(self):
        assert parse_code("LNA") == "LNA"

    def test_uppercases(self):
        assert parse_code("qa") == "QA"

    @pytest.mark.parametrize("bad", ["L4", "", "LNAB", "l-n", "1", "LN A"])
    def test_rejects_bad_codes(self, bad):
        with pytest.raises(InvalidCode):
            parse_code(bad)


class TestParentAncestors:
    def test_parent_drops_last_letter(self):
        assert parent_of("LNA") == "LN"
        assert parent_of("LN") == "L"

    def test_root_has_no_parent(self):
        assert parent_of("M") is None

    def test_ancestors_nearest_first(self):
        assert ancestors("LNA") == ["LN", "L"]
        assert ancestors("QA") == ["Q"]
        assert ancestors("L") == []

    @given(codes)
    def test_parent_is_one_shorter_prefix(self, code):
        parent = parent_of(code)
        if len(code) == 1:
            assert parent is None
        else:
            assert len(parent) == len(code) - 1
            assert code.startswith(parent)

    @given(codes)
    def test_ancestor_count(self, code):
        assert len(ancestors(code)) == len(code) - 1


class TestDescendantOrSelf:
    def test_examples(self):
        assert is_descendant_or_self("LNA", "L")
        assert is_descendant_or_self("LNA", "LNA")
        assert not is_descendant_or_self("LA", "LN")

    @given(codes)
    def test_reflexive(self, a):
        assert is_descendant_or_self(a, a)

    @given(codes, codes)
    def test_antisymmetric_on_distinct(self, a, b):
        if a != b and is_descendant_or_self(a, b):
            assert not is_descendant_or_self(b, a)

    @given(codes, codes, codes)
    def test_transitive(self, a, b, c):
        if is_descendant_or_self(a, b) and is_descendant_or_self(b, c):
            assert is_descendant_or_self(a, c)


class TestHierarchy:
    def test_requires_parent_closure(self):
        with pytest.raises(InvalidCode):
            Hierarchy(BreakdownLevel.BL1, ["L", "LNA"])

    def test_depth_limit_bl0(self):
        with pytest.raises(DepthExceeded):
            Hierarchy(BreakdownLevel.BL0, ["M", "MA"])

    def test_queries(self, bl1_hierarchy):
        h = bl1_hierarchy
        assert h.roots == ("L", "M")
        assert h.leaves == ("LA", "LNA", "LNB", "M")
        assert h.children("LN") == ("LNA", "LNB")
        assert h.descendants_or_self("LN") == ("LN", "LNA", "LNB")
        assert h.path("LNA") == ["L", "LN", "LNA"]
        assert "LN" in h and "ZZ" not in h

    def test_auto_close_inserts_and_warns(self):
        h = Hierarchy.from_codes_closed(BreakdownLevel.BL1, ["LNA"])
        assert h.codes == ("L", "LN", "LNA")
        assert len(h.load_warnings) == 2


class TestLoadHierarchy:
    def test_plain_file(self, tmp_path):
        p = tmp_path / "h.txt"
        p.write_text("L\nLN\nLNA\n")
        h = load_hierarchy(p, BreakdownLevel.BL1)
        assert h.codes == ("L", "LN", "LNA")
        assert h.load_warnings == ()

    def test_auto_insertion_with_warnings(self, tmp_path):
        p = tmp_path / "h.txt"
        p.write_text("LNA\n")
        h = load_hierarchy(p, BreakdownLevel.BL1)
        assert h.codes == ("L", "LN", "LNA")
        assert len(h.load_warnings) == 2

    def test_depth_exceeded(self, tmp_path):
        p = tmp_path / "h.txt"
        p.write_text("LNAB\n")
        with pytest.raises((DepthExceeded, InvalidCode)):
            load_hierarchy(p, BreakdownLevel.BL1)

    def test_labels_comments_blanks(self, tmp_path):
        p = tmp_path / "h.txt"
        p.write_text("# comment\n\nL,Steam systems\nLN\n")
        h = load_hierarchy(p, BreakdownLevel.BL1)
        assert h.label_for("L") == "Steam systems"
        assert h.label_for("LN") is None

    def test_invalid_code_reports_line(self, tmp_path):
        p = tmp_path / "h.txt"
        p.write_text("L\nL4\n")
        with pytest.raises(InvalidCode, match=":2"):
            load_hierarchy(p, BreakdownLevel.BL1)

    def test_output_closed_under_parents(self, tmp_path):
        p = tmp_path / "h.txt"
        p.write_text("MAB\nQA\nLNB\n")
        h = load_hierarchy(p, BreakdownLevel.BL1)
        for code in h.codes:
            if len(code) > 1:
                assert code[:-1] in h
