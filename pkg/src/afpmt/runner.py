"""Running AFP tools on test cases, or ingesting their pre-computed outputs."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import shlex
import signal
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Sequence
from urllib.parse import quote

from .predictions import (
    Prediction,
    PredictionFormat,
    PredictionFormatError,
    load_predictions,
    read_manifest,
    write_predictions,
)
from .sequence import ProteinRecord, save_fasta
from .variants import TestCasePair

log = logging.getLogger(__name__)

INPUT_PLACEHOLDER = "{input_fasta}"
OUTPUT_PLACEHOLDER = "{output_file}"
DIAGNOSTICS_BUDGET = 16 * 1024
DEFAULT_ENV_ALLOW = ("PATH",)

MISSING_OUTPUT = "missing-output"
UNPARSEABLE_OUTPUT = "unparseable-output"
NONZERO_EXIT = "nonzero-exit"
HARNESS_ERROR = "harness-error"


class AdapterError(ValueError):
    pass


@dataclass(frozen=True)
class SubprocessMode:
    command_template: str
    timeout: float = 3600.0
    working_dir: Path | None = None
    env_allow: tuple[str, ...] = DEFAULT_ENV_ALLOW

    def __post_init__(self) -> None:
        for ph in (INPUT_PLACEHOLDER, OUTPUT_PLACEHOLDER):
            n = self.command_template.count(ph)
            if n != 1:
                raise AdapterError(f"command template must contain {ph} exactly once (found {n})")
        if not self.timeout > 0:
            raise AdapterError(f"timeout must be positive, got {self.timeout}")


@dataclass(frozen=True)
class OfflineMode:
    manifest_path: Path


@dataclass(frozen=True)
class InProcessMode:
    predict: Callable[[ProteinRecord], list[Prediction]]


@dataclass(frozen=True)
class ToolAdapter:
    tool_id: str
    mode: SubprocessMode | OfflineMode | InProcessMode
    prediction_format: PredictionFormat = PredictionFormat.PLAIN_TSV

    def __post_init__(self) -> None:
        if not self.tool_id or "/" in self.tool_id or self.tool_id in (".", ".."):
            raise AdapterError(f"invalid tool id {self.tool_id!r}")
        object.__setattr__(self, "prediction_format", PredictionFormat.parse(self.prediction_format))


class RunStatus(str, Enum):
    OK = "ok"
    TOOL_ERROR = "tool_error"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class RunResult:
    tool_id: str
    record_id: str
    status: RunStatus
    prediction_path: Path | None = None
    exit_code: int | None = None
    diagnostics: str = ""
    reason: str = ""
    cached: bool = field(default=False, compare=False)

    @property
    def ok(self) -> bool:
        return self.status is RunStatus.OK

    def to_dict(self) -> dict:
        return {
            "tool_id": self.tool_id,
            "record_id": self.record_id,
            "status": self.status.value,
            "prediction_path": str(self.prediction_path) if self.prediction_path else None,
            "exit_code": self.exit_code,
            "diagnostics": self.diagnostics,
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, d: dict) -> RunResult:
        return cls(
            tool_id=d["tool_id"],
            record_id=d["record_id"],
            status=RunStatus(d["status"]),
            prediction_path=Path(d["prediction_path"]) if d.get("prediction_path") else None,
            exit_code=d.get("exit_code"),
            diagnostics=d.get("diagnostics", ""),
            reason=d.get("reason", ""),
        )


def sequence_digest(record: ProteinRecord) -> str:
    return hashlib.sha256(record.sequence.encode("ascii")).hexdigest()


def safe_name(record_id: str) -> str:
    return quote(record_id, safe="-_.")


def cache_path(out_dir: Path, tool_id: str, record: ProteinRecord) -> Path:
    return (
        Path(out_dir) / "predictions" / safe_name(tool_id)
        / f"{safe_name(record.id)}.{sequence_digest(record)[:16]}.tsv"
    )


def _truncate(data: bytes) -> str:
    if len(data) > DIAGNOSTICS_BUDGET:
        data = data[-DIAGNOSTICS_BUDGET:]
    return data.decode("utf-8", errors="replace")


def _parses(path: Path, fmt: PredictionFormat) -> str | None:
    try:
        load_predictions(path, fmt)
    except (OSError, UnicodeDecodeError, PredictionFormatError) as exc:
        return str(exc)
    return None


def run_tool(
    adapter: ToolAdapter, record: ProteinRecord, out_dir: str | Path, use_cache: bool = True
) -> RunResult:
    """Produce (or look up) the prediction file of one tool for one record."""
    out_dir = Path(out_dir)
    mode = adapter.mode
    if isinstance(mode, OfflineMode):
        return _run_offline(adapter, mode, record)

    target = cache_path(out_dir, adapter.tool_id, record)
    if use_cache and target.is_file() and _parses(target, adapter.prediction_format) is None:
        return _cached_result(adapter, record, target)
    target.parent.mkdir(parents=True, exist_ok=True)

    if isinstance(mode, InProcessMode):
        preds = mode.predict(record)
        _atomic_write(target, write_predictions(preds))
        return RunResult(adapter.tool_id, record.id, RunStatus.OK, target)
    return _run_subprocess(adapter, mode, record, target)


def _log_path(target: Path) -> Path:
    return target.with_name(target.name + ".log")


def _cached_result(adapter: ToolAdapter, record: ProteinRecord, target: Path) -> RunResult:
    # a hit must serialise exactly like the run that filled the cache
    if isinstance(adapter.mode, InProcessMode):
        return RunResult(adapter.tool_id, record.id, RunStatus.OK, target, cached=True)
    log_file = _log_path(target)
    diag = log_file.read_text(encoding="utf-8") if log_file.is_file() else ""
    return RunResult(adapter.tool_id, record.id, RunStatus.OK, target, exit_code=0,
                     diagnostics=diag, cached=True)


def _atomic_write(target: Path, text: str) -> None:
    tmp = target.with_name(target.name + ".part")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, target)


def _run_offline(adapter: ToolAdapter, mode: OfflineMode, record: ProteinRecord) -> RunResult:
    try:
        manifest = read_manifest(mode.manifest_path)
    except (OSError, PredictionFormatError) as exc:
        return RunResult(adapter.tool_id, record.id, RunStatus.TOOL_ERROR,
                         diagnostics=str(exc), reason=MISSING_OUTPUT)
    path = manifest.get(record.id)
    if path is None or not path.is_file():
        msg = f"no output listed for {record.id}" if path is None else f"{path} does not exist"
        return RunResult(adapter.tool_id, record.id, RunStatus.TOOL_ERROR,
                         diagnostics=msg, reason=MISSING_OUTPUT)
    err = _parses(path, adapter.prediction_format)
    if err is not None:
        return RunResult(adapter.tool_id, record.id, RunStatus.TOOL_ERROR,
                         diagnostics=err, reason=UNPARSEABLE_OUTPUT)
    return RunResult(adapter.tool_id, record.id, RunStatus.OK, path)


def expand_command(template: str, input_fasta: Path, output_file: Path) -> list[str]:
    argv = []
    for tok in shlex.split(template):
        tok = tok.replace(INPUT_PLACEHOLDER, str(input_fasta))
        argv.append(tok.replace(OUTPUT_PLACEHOLDER, str(output_file)))
    return argv


def _run_subprocess(
    adapter: ToolAdapter, mode: SubprocessMode, record: ProteinRecord, target: Path
) -> RunResult:
    env = {k: os.environ[k] for k in mode.env_allow if k in os.environ}
    with tempfile.TemporaryDirectory(prefix="afpmt-") as tmp:
        tmpdir = Path(tmp)
        fasta = save_fasta([record], tmpdir / "input.fasta")
        output = tmpdir / "output.txt"
        argv = expand_command(mode.command_template, fasta, output)
        log.debug("running %s on %s: %s", adapter.tool_id, record.id, argv)
        try:
            proc = subprocess.Popen(
                argv,
                cwd=mode.working_dir,
                env=env,
                stdin=subprocess.DEVNULL,
                stdout=subprocess.PIPE,
                stderr=subprocess.STDOUT,
                start_new_session=True,
            )
        except OSError as exc:
            return RunResult(adapter.tool_id, record.id, RunStatus.TOOL_ERROR,
                             diagnostics=str(exc), reason=HARNESS_ERROR)
        try:
            captured, _ = proc.communicate(timeout=mode.timeout)
        except subprocess.TimeoutExpired:
            _kill_group(proc)
            captured, _ = proc.communicate()
            return RunResult(adapter.tool_id, record.id, RunStatus.TIMEOUT,
                             diagnostics=_truncate(captured or b""), reason="timeout")
        diag = _truncate(captured or b"")
        if proc.returncode != 0:
            return RunResult(adapter.tool_id, record.id, RunStatus.TOOL_ERROR,
                             exit_code=proc.returncode, diagnostics=diag, reason=NONZERO_EXIT)
        if not output.is_file():
            return RunResult(adapter.tool_id, record.id, RunStatus.TOOL_ERROR, exit_code=0,
                             diagnostics=diag, reason=MISSING_OUTPUT)
        err = _parses(output, adapter.prediction_format)
        if err is not None:
            return RunResult(adapter.tool_id, record.id, RunStatus.TOOL_ERROR, exit_code=0,
                             diagnostics=_truncate((diag + "\n" + err).encode()),
                             reason=UNPARSEABLE_OUTPUT)
        _atomic_write(_log_path(target), diag)
        part = target.with_name(target.name + ".part")
        part.write_bytes(output.read_bytes())
        os.replace(part, target)
    return RunResult(adapter.tool_id, record.id, RunStatus.OK, target, exit_code=0, diagnostics=diag)


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        proc.kill()


def distinct_records(pairs: Iterable[TestCasePair]) -> list[ProteinRecord]:
    """Sources and follow-ups with shared canonicals collapsed, sorted by id."""
    seen: dict[str, ProteinRecord] = {}
    for p in pairs:
        for rec in (p.source, p.follow_up):
            prev = seen.setdefault(rec.id, rec)
            if prev.sequence != rec.sequence:
                raise ValueError(f"record id {rec.id} used for two different sequences")
    return [seen[k] for k in sorted(seen)]


def execute_campaign(
    pairs: Sequence[TestCasePair],
    adapters: Sequence[ToolAdapter],
    out_dir: str | Path,
    max_workers: int | None = None,
    use_cache: bool = True,
) -> dict[tuple[str, str], RunResult]:
    """Run every tool once on every distinct record, with bounded parallelism.

    Failures of individual (tool, record) tasks are recorded, never raised.
    The returned mapping is ordered by (tool_id, record_id).
    """
    records = distinct_records(pairs)
    ids = [a.tool_id for a in adapters]
    if len(set(ids)) != len(ids):
        raise AdapterError(f"duplicate tool ids: {ids}")
    tasks = [(a, r) for a in adapters for r in records]
    if not tasks:
        return {}
    workers = max_workers or os.cpu_count() or 1

    def task(ar: tuple[ToolAdapter, ProteinRecord]) -> RunResult:
        a, r = ar
        try:
            return run_tool(a, r, out_dir, use_cache=use_cache)
        except Exception as exc:  # crash isolation
            log.exception("harness failure for %s on %s", a.tool_id, r.id)
            return RunResult(a.tool_id, r.id, RunStatus.TOOL_ERROR,
                             diagnostics=repr(exc), reason=HARNESS_ERROR)

    with ThreadPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        results = list(pool.map(task, tasks))
    return {(r.tool_id, r.record_id): r for r in sorted(results, key=lambda r: (r.tool_id, r.record_id))}


def save_runs(results: dict[tuple[str, str], RunResult], path: str | Path) -> Path:
    path = Path(path)
    payload = [results[k].to_dict() for k in sorted(results)]
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_runs(path: str | Path) -> dict[tuple[str, str], RunResult]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    out = {}
    for d in data:
        r = RunResult.from_dict(d)
        out[(r.tool_id, r.record_id)] = r
    return out
