import pytest
from hypothesis import given
from hypothesis import strategies as st

from afpmt.ontology import Namespace
from afpmt.predictions import (
    DataQualityWarning,
    Prediction,
    PredictionFormatError,
    parse_predictions,
    read_manifest,
    to_annotation_set,
    write_predictions,
)

MF, BP, CC = Namespace

CAFA_WRAPPED = """AUTHOR team
MODEL 1
KEYWORDS sequence alignment.
P14679\tGO:0016491\t0.9
END
"""


class TestParse:
    def test_plain_line(self):
        assert parse_predictions("P14679\tGO:0016491\t0.9") == [Prediction("P14679", "GO:0016491", 0.9)]

    def test_cafa_headers_skipped(self):
        assert parse_predictions(CAFA_WRAPPED, "cafa") == parse_predictions("P14679\tGO:0016491\t0.9")

    def test_cafa_space_separated(self):
        assert parse_predictions("AUTHOR x\nP1 GO:0000001 0.50\nEND\nP2 GO:0000002 1\n", "cafa") == [
            Prediction("P1", "GO:0000001", 0.5)]

    def test_score_default(self):
        assert parse_predictions("P1\tGO:0000001\n")[0].score == 1.0

    def test_comments_and_blanks(self):
        assert len(parse_predictions("# header\n\nP1\tGO:0000001\t0.1\n\n")) == 1

    def test_duplicate_keeps_max(self):
        with pytest.warns(DataQualityWarning, match="duplicate"):
            preds = parse_predictions("P1\tGO:0000001\t0.3\nP1\tGO:0000001\t0.7\n")
        assert preds == [Prediction("P1", "GO:0000001", 0.7)]

    def test_malformed_go_id_line_number(self):
        with pytest.raises(PredictionFormatError, match="line 2"):
            parse_predictions("P1\tGO:0000001\nP1\tGO:12\n")

    @pytest.mark.parametrize("score", ["1.5", "-0.1", "abc"])
    def test_bad_score(self, score):
        with pytest.raises(PredictionFormatError):
            parse_predictions(f"P1\tGO:0000001\t{score}\n")

    @given(st.lists(st.tuples(st.sampled_from(["P1", "P2"]), st.integers(1, 30),
                              st.floats(0, 1, allow_nan=False)), max_size=20, unique_by=lambda t: t[:2]),
           st.randoms())
    def test_order_insensitive_and_round_trip(self, rows, rnd):
        lines = [f"{p}\tGO:{t:07d}\t{s!r}" for p, t, s in rows]
        shuffled = lines[:]
        rnd.shuffle(shuffled)
        a = parse_predictions("\n".join(lines))
        assert a == parse_predictions("\n".join(shuffled))
        assert parse_predictions(write_predictions(a)) == a


class TestAnnotationSet:
    def test_single_mf_term(self, go_mini):
        a = to_annotation_set([Prediction("P", "GO:0004503", 0.9)], go_mini, "P", 0.5)
        assert a[MF] == {"GO:0004503"} and a[BP] == frozenset() and a[CC] == frozenset()

    def test_threshold_one(self, go_mini):
        preds = [Prediction("P", "GO:0004503", 0.99), Prediction("P", "GO:0006570", 0.5)]
        a = to_annotation_set(preds, go_mini, "P", 1.0)
        assert a.all_terms() == frozenset()

    def test_alt_id_resolved(self, go_mini):
        a = to_annotation_set([Prediction("P", "GO:0000004", 1.0)], go_mini, "P")
        assert a[BP] == {"GO:0008150"}

    def test_unknown_and_obsolete_dropped(self, go_mini):
        preds = [Prediction("P", "GO:0004872", 1.0), Prediction("P", "GO:7654321", 1.0),
                 Prediction("P", "GO:0004503", 1.0)]
        with pytest.warns(DataQualityWarning) as rec:
            a = to_annotation_set(preds, go_mini, "P")
        assert a.all_terms() == {"GO:0004503"}
        assert len(rec) == 2

    def test_other_proteins_ignored(self, go_mini):
        a = to_annotation_set([Prediction("Q", "GO:0004503", 1.0)], go_mini, "P")
        assert a.all_terms() == frozenset()

    def test_mixed_fixture_matches_per_term_scan(self, go_mini):
        terms = ["GO:0004503", "GO:0005507", "GO:0042438", "GO:0006570", "GO:0038110", "GO:0004911"]
        preds = [Prediction("P", t, 0.8) for t in terms]
        a = to_annotation_set(preds, go_mini, "P")
        expected = {ns: set() for ns in Namespace}
        for t in terms:
            expected[go_mini.namespace_of(t)].add(t)
        assert {ns: set(a[ns]) for ns in Namespace} == expected

    @given(st.lists(st.tuples(st.sampled_from(
        ["GO:0004503", "GO:0005507", "GO:0042438", "GO:0006570", "GO:0005886", "GO:0000004"]),
        st.floats(0, 1)), max_size=10), st.floats(0, 1), st.floats(0, 1))
    def test_monotone_threshold_and_partition(self, rows, t1, t2):
        from afpmt.config import BUNDLED_ONTOLOGY
        from afpmt.ontology import load_obo

        onto = _cached(BUNDLED_ONTOLOGY, load_obo)
        preds = [Prediction("P", t, s) for t, s in rows]
        lo, hi = sorted((t1, t2))
        a_lo = to_annotation_set(preds, onto, "P", lo)
        a_hi = to_annotation_set(preds, onto, "P", hi)
        for ns in Namespace:
            assert a_hi[ns] <= a_lo[ns]
        sets = [a_lo[ns] for ns in Namespace]
        assert sum(len(s) for s in sets) == len(a_lo.all_terms())
        assert a_lo.all_terms() == {onto.resolve(t) for t, s in rows if s >= lo}


_CACHE = {}


def _cached(key, fn):
    if key not in _CACHE:
        _CACHE[key] = fn(key)
    return _CACHE[key]


def test_manifest(tmp_path):
    (tmp_path / "a.tsv").write_text("")
    (tmp_path / "m.tsv").write_text("record_id\tpath\nP14679|VAR_007652\ta.tsv\n")
    assert read_manifest(tmp_path / "m.tsv") == {"P14679|VAR_007652": (tmp_path / "a.tsv").resolve()}
