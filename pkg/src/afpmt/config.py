"""Campaign configuration files (JSON) and bundled fixture data."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .mockbench import load_mock_spec, mock_as_adapter, synthetic_overlay
from .mr_engine import DEFAULT_NAMESPACES, DEFAULT_RELATION, RELATIONS
from .ontology import Namespace, Ontology, load_obo
from .predictions import PredictionFormat
from .runner import DEFAULT_ENV_ALLOW, OfflineMode, SubprocessMode, ToolAdapter
from .sequence import read_fasta
from .variants import TestCasePair, generate_pairs, read_variant_tsv

DATA_DIR = Path(__file__).resolve().parent / "data"
BUNDLED_ONTOLOGY = DATA_DIR / "go-mini.obo"
BUNDLED_VARIANTS = DATA_DIR / "variants.tsv"
BUNDLED_CANONICALS = tuple(DATA_DIR / f"{acc}.fasta" for acc in ("P14679", "P31785", "O00206"))
BUNDLED_MOCK_BASE = DATA_DIR / "mock_base.json"


class ConfigError(ValueError):
    pass


@dataclass
class ToolConfig:
    id: str
    mode: str
    options: dict[str, Any] = field(default_factory=dict)


@dataclass
class CampaignConfig:
    out_dir: Path
    tools: list[ToolConfig] = field(default_factory=list)
    ontology: Path = BUNDLED_ONTOLOGY
    variants: Path = BUNDLED_VARIANTS
    canonical_fasta: tuple[Path, ...] = BUNDLED_CANONICALS
    threshold: float = 0.0
    namespaces: tuple[Namespace, ...] = DEFAULT_NAMESPACES
    relation: str = DEFAULT_RELATION
    max_workers: int | None = None
    use_cache: bool = True
    synthetic_terms: bool = False
    fail_exit: bool = True
    anonymize: bool = False

    @property
    def uses_mocks(self) -> bool:
        return any(t.mode == "mock" for t in self.tools)

    def adapters(self) -> list[ToolAdapter]:
        return [_adapter(t) for t in self.tools]

    def load_ontology(self) -> Ontology:
        onto = load_obo(self.ontology)
        if self.synthetic_terms or self.uses_mocks:
            onto = synthetic_overlay(onto)
        return onto

    def load_pairs(self) -> list[TestCasePair]:
        canonicals = [rec for path in self.canonical_fasta for rec in read_fasta(path)]
        return generate_pairs(canonicals, read_variant_tsv(self.variants))


def _adapter(t: ToolConfig) -> ToolAdapter:
    o = t.options
    fmt = PredictionFormat.parse(o.get("format", "plain"))
    if t.mode == "subprocess":
        mode = SubprocessMode(
            command_template=o["command"],
            timeout=float(o.get("timeout", 3600)),
            working_dir=Path(o["working_dir"]) if o.get("working_dir") else None,
            env_allow=tuple(o.get("env", DEFAULT_ENV_ALLOW)),
        )
        return ToolAdapter(t.id, mode, fmt)
    if t.mode == "offline":
        return ToolAdapter(t.id, OfflineMode(Path(o["manifest"])), fmt)
    if t.mode == "mock":
        spec = load_mock_spec(o.get("base", BUNDLED_MOCK_BASE), o["behavior"], int(o.get("seed", 0)))
        return mock_as_adapter(spec, tool_id=t.id, in_process=bool(o.get("in_process", False)),
                               timeout=float(o.get("timeout", 60)))
    raise ConfigError(f"tool {t.id}: unknown mode {t.mode!r}")


_TOP_KEYS = {"out_dir", "tools", "ontology", "variants", "canonical_fasta", "threshold", "namespaces",
             "relation", "max_workers", "use_cache", "synthetic_terms", "fail_exit", "anonymize"}
_PATH_OPTIONS = {"manifest", "working_dir", "base"}


def config_from_dict(doc: dict, base_dir: str | Path = ".") -> CampaignConfig:
    """Build a config; relative paths are resolved against ``base_dir``."""
    base = Path(base_dir)

    def p(value: str) -> Path:
        return (base / value).resolve()

    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "out_dir" not in doc:
        raise ConfigError("config needs out_dir")
    try:
        tools = []
        for raw in doc.get("tools", []):
            raw = dict(raw)
            tid, mode = raw.pop("id"), raw.pop("mode")
            for k in _PATH_OPTIONS & set(raw):
                raw[k] = str(p(raw[k]))
            tools.append(ToolConfig(tid, mode, raw))
        cfg = CampaignConfig(
            out_dir=p(doc["out_dir"]),
            tools=tools,
            ontology=p(doc["ontology"]) if doc.get("ontology") else BUNDLED_ONTOLOGY,
            variants=p(doc["variants"]) if doc.get("variants") else BUNDLED_VARIANTS,
            canonical_fasta=tuple(p(f) for f in doc["canonical_fasta"]) if doc.get("canonical_fasta")
            else BUNDLED_CANONICALS,
            threshold=float(doc.get("threshold", 0.0)),
            namespaces=tuple(Namespace.parse(n) for n in doc.get("namespaces", [n.short for n in DEFAULT_NAMESPACES])),
            relation=doc.get("relation", DEFAULT_RELATION),
            max_workers=doc.get("max_workers"),
            use_cache=bool(doc.get("use_cache", True)),
            synthetic_terms=bool(doc.get("synthetic_terms", False)),
            fail_exit=bool(doc.get("fail_exit", True)),
            anonymize=bool(doc.get("anonymize", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
    if not 0.0 <= cfg.threshold <= 1.0:
        raise ConfigError(f"threshold {cfg.threshold} outside [0, 1]")
    if cfg.relation not in RELATIONS:
        raise ConfigError(f"unknown relation {cfg.relation!r}")
    if len({t.id for t in tools}) != len(tools):
        raise ConfigError("duplicate tool ids")
    try:
        cfg.adapters()
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid tool definition: {exc}") from exc
    return cfg


def load_config(path: str | Path) -> CampaignConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return config_from_dict(doc, path.parent)
