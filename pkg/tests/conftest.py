from __future__ import annotations

import shlex
import sys
from pathlib import Path

import pytest

from afpmt.config import BUNDLED_CANONICALS, BUNDLED_ONTOLOGY, BUNDLED_VARIANTS
from afpmt.ontology import load_obo, parse_obo
from afpmt.sequence import read_fasta
from afpmt.variants import generate_pairs, read_variant_tsv

PYTHON = shlex.quote(sys.executable)

TOY_OBO = """\
format-version: 1.2

[Term]
id: GO:0000001
name: root function
namespace: molecular_function

[Term]
id: GO:0000002
name: parent function
namespace: molecular_function
is_a: GO:0000001 ! root function
alt_id: GO:0000102

[Term]
id: GO:0000003
name: child function
namespace: molecular_function
is_a: GO:0000002 ! parent function

[Term]
id: GO:0000010
name: root process
namespace: biological_process

[Term]
id: GO:0000011
name: some process
namespace: biological_process
relationship: part_of GO:0000010 ! root process

[Term]
id: GO:0000012
name: regulated process
namespace: biological_process
is_a: GO:0000010
relationship: regulates GO:0000011

[Term]
id: GO:0000020
name: root component
namespace: cellular_component

[Term]
id: GO:0000099
name: obsolete thing
namespace: molecular_function
is_obsolete: true
"""


@pytest.fixture(scope="session")
def toy_onto():
    return parse_obo(TOY_OBO)


@pytest.fixture(scope="session")
def go_mini():
    return load_obo(BUNDLED_ONTOLOGY)


@pytest.fixture(scope="session")
def canonicals():
    return [rec for path in BUNDLED_CANONICALS for rec in read_fasta(path)]


@pytest.fixture(scope="session")
def variant_specs():
    return read_variant_tsv(BUNDLED_VARIANTS)


@pytest.fixture(scope="session")
def fixture_pairs(canonicals, variant_specs):
    return generate_pairs(canonicals, variant_specs)


def write_stub(tmp_path: Path, name: str, body: str) -> Path:
    """A small python tool stub taking <input_fasta> <output_file>."""
    path = tmp_path / name
    path.write_text("import sys, time, shutil\ninp, out = sys.argv[1], sys.argv[2]\n" + body)
    return path


# -- acceptance summary: one line per criterion --------------------------------

_ACCEPTANCE: dict[int, tuple[str, bool]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (rep.when != "call" and rep.passed):
        return
    number, title = marker.args
    ok = rep.passed and _ACCEPTANCE.get(number, (title, True))[1]
    _ACCEPTANCE[number] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}")
