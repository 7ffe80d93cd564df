"""
Checking predictions that were made elsewhere
=============================================

Tools that only run behind a web form can still be tested: save their
output per record and list the files in a manifest.
"""

import tempfile
from pathlib import Path

from afpmt.campaign import run_campaign
from afpmt.config import config_from_dict

work = Path(tempfile.mkdtemp(prefix="afpmt-offline-"))

# pretend a web tool returned the same two terms for tyrosinase and for its
# G47D variant; every other record is missing from the manifest
terms = [("GO:0004503", 0.91), ("GO:0042438", 0.77)]
for name, record_id in (("tyro.tsv", "P14679"), ("g47d.tsv", "P14679|VAR_007652")):
    (work / name).write_text("".join(f"{record_id}\t{t}\t{s}\n" for t, s in terms))
(work / "manifest.tsv").write_text(
    "record_id\tpath\n"
    "P14679\ttyro.tsv\n"
    "P14679|VAR_007652\tg47d.tsv\n"
)

config = config_from_dict({
    "out_dir": "out",
    "tools": [{"id": "webtool", "mode": "offline", "manifest": "manifest.tsv"}],
}, work)
report = run_campaign(config, timestamp="2000-01-01T00:00:00+00:00")

# identical output is a Fail; no output at all is Inconclusive, not a Fail
for v in report.verdicts:
    if v.pair_id in ("P14679|VAR_007652", "P14679|VAR_007658"):
        print(f"{v.pair_id:20s} {v.namespace.short} {v.outcome.value:12s} {v.reason}")
