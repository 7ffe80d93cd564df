import pytest
from hypothesis import given
from hypothesis import strategies as st

from afpmt.config import BUNDLED_MOCK_BASE
from afpmt.mockbench import (
    SYNTHETIC_BASE,
    SYNTHETIC_SLOTS,
    Behavior,
    MockError,
    MockSpec,
    load_mock_spec,
    mock_as_adapter,
    mock_predict,
    synthetic_collisions,
    synthetic_overlay,
    synthetic_term_id,
)
from afpmt.ontology import Namespace
from afpmt.predictions import load_predictions, to_annotation_set
from afpmt.runner import InProcessMode, SubprocessMode, distinct_records, run_tool
from afpmt.sequence import ProteinRecord

AA = "ACDEFGHIKLMNPQRSTVWY"
MF, BP, CC = Namespace


@pytest.fixture(scope="module")
def specs():
    return {b: load_mock_spec(BUNDLED_MOCK_BASE, b) for b in Behavior}


def terms_of(preds):
    return {p.term for p in preds}


class TestBehaviours:
    def test_blind_identical(self, specs, fixture_pairs):
        for p in fixture_pairs:
            assert terms_of(mock_predict(specs["variant-blind"], p.source)) == \
                terms_of(mock_predict(specs["variant-blind"], p.follow_up))

    @given(st.text(alphabet=AA, min_size=1, max_size=80))
    def test_blind_depends_on_id_only(self, seq):
        spec = MockSpec(Behavior.VARIANT_BLIND, {"P1": ["GO:0004503"]})
        assert terms_of(mock_predict(spec, ProteinRecord("P1|anything", "", seq))) == {"GO:0004503"}

    def test_aware_differs_in_synthetic_terms_only(self, specs, fixture_pairs):
        spec = specs["variant-aware"]
        for p in fixture_pairs:
            a = terms_of(mock_predict(spec, p.source))
            b = terms_of(mock_predict(spec, p.follow_up))
            diff = a ^ b
            assert diff
            assert all(990000 <= int(t[3:]) < 990000 + 3 * SYNTHETIC_SLOTS for t in diff)
            assert a - diff == set(spec.base_annotations[p.protein_id])

    def test_aware_one_synthetic_per_namespace_present(self, go_mini):
        spec = MockSpec(Behavior.VARIANT_AWARE, {"P1": ["GO:0004503"]}, ontology=go_mini)
        out = terms_of(mock_predict(spec, ProteinRecord("P1", "", "MKV")))
        assert out == {"GO:0004503", synthetic_term_id(MF, "MKV")}

    def test_ancestor_shift(self, specs, fixture_pairs, go_mini):
        spec = specs["ancestor-shift"]
        for p in fixture_pairs:
            src = terms_of(mock_predict(spec, p.source))
            fu = terms_of(mock_predict(spec, p.follow_up))
            assert src == set(spec.base_annotations[p.protein_id])
            assert fu.isdisjoint(src)
            for t in fu:
                assert any(t in go_mini.ancestors(s) for s in src)

    def test_empty(self, specs, fixture_pairs):
        for p in fixture_pairs:
            assert mock_predict(specs["empty"], p.follow_up) == []

    def test_unknown_canonical(self, specs):
        with pytest.raises(MockError):
            mock_predict(specs["variant-blind"], ProteinRecord("Q99999", "", "MK"))

    def test_empty_base_rejected(self):
        with pytest.raises(MockError):
            MockSpec(Behavior.VARIANT_BLIND, {})

    def test_seed_changes_synthetic_term(self):
        assert synthetic_term_id(MF, "MKV", 0) != synthetic_term_id(MF, "MKV", 1)


class TestSynthetic:
    def test_no_collisions_on_fixture(self, specs, fixture_pairs):
        assert synthetic_collisions(specs["variant-aware"], distinct_records(fixture_pairs)) == []

    def test_collision_detector(self, monkeypatch):
        import afpmt.mockbench as mb

        monkeypatch.setattr(mb, "synthetic_term_id", lambda ns, seq, seed=0: "GO:0990000")
        spec = MockSpec(Behavior.VARIANT_BLIND, {"P": ["GO:0004503"]})
        recs = [ProteinRecord("P|b", "", "MKV"), ProteinRecord("P|a", "", "MKW"),
                ProteinRecord("P|c", "", "MKW"), ProteinRecord("Q|a", "", "MKY")]
        assert synthetic_collisions(spec, recs) == [("P|a", "P|b")]

    def test_overlay(self, go_mini):
        onto = synthetic_overlay(go_mini)
        assert len(onto) == len(go_mini) + 3 * SYNTHETIC_SLOTS
        tid = synthetic_term_id(BP, "MKV")
        assert onto.namespace_of(tid) is BP
        assert onto.ancestors(tid) == {"GO:0008150"}
        assert f"GO:{SYNTHETIC_BASE[MF]:07d}" not in go_mini.terms

    def test_synthetic_terms_survive_annotation(self, go_mini):
        onto = synthetic_overlay(go_mini)
        spec = MockSpec(Behavior.VARIANT_AWARE, {"P1": ["GO:0004503", "GO:0006570"]}, ontology=go_mini)
        ann = to_annotation_set(mock_predict(spec, ProteinRecord("P1", "", "MKV")), onto, "P1")
        assert len(ann[MF]) == 2 and len(ann[BP]) == 2


class TestAdapter:
    def test_subprocess_self_exec(self, specs, fixture_pairs, tmp_path):
        adapter = mock_as_adapter(specs["variant-aware"])
        assert isinstance(adapter.mode, SubprocessMode)
        rec = fixture_pairs[0].follow_up
        res = run_tool(adapter, rec, tmp_path)
        assert res.ok, res.diagnostics
        assert load_predictions(res.prediction_path) == mock_predict(specs["variant-aware"], rec)

    def test_in_process(self, specs):
        adapter = mock_as_adapter(specs["empty"], tool_id="e", in_process=True)
        assert isinstance(adapter.mode, InProcessMode) and adapter.tool_id == "e"
