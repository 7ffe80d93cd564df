"""
A campaign against the mock predictors
======================================

The four mocks stand in for tools with known behaviour, so the verdicts
are known in advance. Each mock runs as a subprocess of this package.
"""

import tempfile
from pathlib import Path

from afpmt.campaign import run_campaign
from afpmt.config import config_from_dict
from afpmt.report import emit

out = Path(tempfile.mkdtemp(prefix="afpmt-demo-"))
config = config_from_dict({
    "out_dir": str(out),
    "tools": [
        {"id": "blind", "mode": "mock", "behavior": "variant-blind"},
        {"id": "aware", "mode": "mock", "behavior": "variant-aware"},
        {"id": "shift", "mode": "mock", "behavior": "ancestor-shift"},
        {"id": "empty", "mode": "mock", "behavior": "empty"},
    ],
})
report = run_campaign(config, timestamp="2000-01-01T00:00:00+00:00")

# blind fails everywhere, aware and shift pass, empty is inconclusive
for (tool, ns), c in report.tool_totals.items():
    print(f"{tool:6s} {ns.short}  pass={c.passed:2d} fail={c.failed:2d} inconclusive={c.inconclusive:2d}")

print()
print(emit(report, "md").decode())
print("files in", out, sorted(p.name for p in out.iterdir()))
