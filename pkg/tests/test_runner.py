import pytest

from afpmt.predictions import Prediction
from afpmt.runner import (
    DIAGNOSTICS_BUDGET,
    AdapterError,
    InProcessMode,
    OfflineMode,
    RunStatus,
    SubprocessMode,
    ToolAdapter,
    cache_path,
    distinct_records,
    execute_campaign,
    load_runs,
    run_tool,
    save_runs,
)
from afpmt.sequence import ProteinRecord
from conftest import PYTHON, write_stub

REC = ProteinRecord("P1", "", "MKTAYIAKQR")

ECHO_BODY = """\
rid = open(inp).readline()[1:].split()[0]
open(out, "w").write(rid + "\\tGO:0016491\\t0.9\\n")
"""


def stub_adapter(tmp_path, name, body, timeout=30.0):
    script = write_stub(tmp_path, f"{name}.py", body)
    return ToolAdapter(name, SubprocessMode(f"{PYTHON} {script} {{input_fasta}} {{output_file}}", timeout))


class TestModes:
    @pytest.mark.parametrize("tpl", ["tool {input_fasta}", "tool {output_file}",
                                     "tool {input_fasta} {input_fasta} {output_file}"])
    def test_template_placeholders(self, tpl):
        with pytest.raises(AdapterError):
            SubprocessMode(tpl)

    def test_timeout_positive(self):
        with pytest.raises(AdapterError):
            SubprocessMode("t {input_fasta} {output_file}", timeout=0)

    def test_bad_tool_id(self):
        with pytest.raises(AdapterError):
            ToolAdapter("a/b", InProcessMode(lambda r: []))


class TestOffline:
    def test_lookup_and_miss(self, tmp_path):
        (tmp_path / "p1.tsv").write_text("P1\tGO:0016491\t0.9\n")
        (tmp_path / "bad.tsv").write_text("P1\tnot-a-term\n")
        (tmp_path / "m.tsv").write_text("P1\tp1.tsv\nP3\tbad.tsv\n")
        a = ToolAdapter("off", OfflineMode(tmp_path / "m.tsv"))
        hit = run_tool(a, REC, tmp_path)
        assert hit.status is RunStatus.OK and hit.prediction_path == (tmp_path / "p1.tsv").resolve()
        miss = run_tool(a, ProteinRecord("P2", "", "MK"), tmp_path)
        assert (miss.status, miss.reason) == (RunStatus.TOOL_ERROR, "missing-output")
        bad = run_tool(a, ProteinRecord("P3", "", "MK"), tmp_path)
        assert bad.reason == "unparseable-output"


class TestSubprocess:
    def test_ok(self, tmp_path):
        r = run_tool(stub_adapter(tmp_path, "echo", ECHO_BODY), REC, tmp_path / "out")
        assert r.status is RunStatus.OK and r.exit_code == 0
        assert r.prediction_path == cache_path(tmp_path / "out", "echo", REC)
        assert r.prediction_path.read_text() == "P1\tGO:0016491\t0.9\n"

    def test_timeout(self, tmp_path):
        r = run_tool(stub_adapter(tmp_path, "slow", "time.sleep(30)\n", timeout=0.5), REC, tmp_path)
        assert r.status is RunStatus.TIMEOUT and r.prediction_path is None

    def test_crash(self, tmp_path):
        r = run_tool(stub_adapter(tmp_path, "crash", "print('boom')\nsys.exit(3)\n"), REC, tmp_path)
        assert (r.status, r.exit_code, r.reason) == (RunStatus.TOOL_ERROR, 3, "nonzero-exit")
        assert "boom" in r.diagnostics

    def test_no_output_file(self, tmp_path):
        r = run_tool(stub_adapter(tmp_path, "quiet", "pass\n"), REC, tmp_path)
        assert r.reason == "missing-output"

    def test_garbage_output(self, tmp_path):
        r = run_tool(stub_adapter(tmp_path, "junk", "open(out, 'w').write('x\\tGO:1\\n')\n"), REC, tmp_path)
        assert r.reason == "unparseable-output"
        assert not cache_path(tmp_path, "junk", REC).exists()

    def test_diagnostics_truncated(self, tmp_path):
        r = run_tool(stub_adapter(tmp_path, "loud", "print('x' * 100000)\nsys.exit(1)\n"), REC, tmp_path)
        assert len(r.diagnostics) <= DIAGNOSTICS_BUDGET

    def test_missing_executable(self, tmp_path):
        a = ToolAdapter("ghost", SubprocessMode("/nonexistent/tool {input_fasta} {output_file}"))
        assert run_tool(a, REC, tmp_path).reason == "harness-error"

    def test_environment_not_leaked(self, tmp_path, monkeypatch):
        monkeypatch.setenv("AFPMT_SECRET", "s3cret")
        body = "import os\nopen(out, 'w').write('')\nprint(os.environ.get('AFPMT_SECRET'))\n"
        r = run_tool(stub_adapter(tmp_path, "env", body), REC, tmp_path)
        assert "s3cret" not in r.diagnostics


class TestCampaign:
    def test_dedup(self, fixture_pairs):
        recs = distinct_records(fixture_pairs)
        assert len(recs) == 3 + 15
        assert [r.id for r in recs] == sorted(r.id for r in recs)

    def test_no_adapters(self, fixture_pairs, tmp_path):
        assert execute_campaign(fixture_pairs, [], tmp_path) == {}

    def test_duplicate_tool_ids(self, fixture_pairs, tmp_path):
        a = ToolAdapter("x", InProcessMode(lambda r: []))
        with pytest.raises(AdapterError):
            execute_campaign(fixture_pairs, [a, a], tmp_path)

    def test_two_tools_deterministic_and_cached(self, fixture_pairs, tmp_path):
        adapters = [stub_adapter(tmp_path, "t1", ECHO_BODY), stub_adapter(tmp_path, "t2", ECHO_BODY)]
        first = execute_campaign(fixture_pairs, adapters, tmp_path / "a", max_workers=4)
        assert len(first) == 36 and all(r.ok for r in first.values())
        assert not any(r.cached for r in first.values())
        save_runs(first, tmp_path / "a.json")

        second = execute_campaign(fixture_pairs, adapters, tmp_path / "a", max_workers=2)
        assert all(r.cached for r in second.values())
        save_runs(second, tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        assert load_runs(tmp_path / "a.json") == first

        fresh = execute_campaign(fixture_pairs, adapters, tmp_path / "a", use_cache=False)
        assert not any(r.cached for r in fresh.values())

    def test_exception_isolated(self, fixture_pairs, tmp_path):
        def predict(rec):
            if "|" in rec.id:
                raise RuntimeError("kaput")
            return [Prediction(rec.id, "GO:0016491", 1.0)]

        res = execute_campaign(fixture_pairs, [ToolAdapter("ip", InProcessMode(predict))], tmp_path)
        assert sum(r.ok for r in res.values()) == 3
        assert {r.reason for r in res.values() if not r.ok} == {"harness-error"}

    def test_changed_sequence_not_served_from_cache(self, tmp_path):
        a = ToolAdapter("ip", InProcessMode(lambda r: [Prediction(r.id, "GO:0016491", 1.0)]))
        run_tool(a, REC, tmp_path)
        again = run_tool(a, ProteinRecord("P1", "", "MKTAYIAKQW"), tmp_path)
        assert not again.cached
