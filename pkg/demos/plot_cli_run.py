"""
Running the bundled example config
==================================

The ``plscast`` command reads an INI config, builds the data, runs the
rolling comparison and writes a JSON summary plus CSV error tables.
"""

import json
import tempfile
from pathlib import Path

from plscast.cli import example_config_path, main

print(example_config_path().read_text())

with tempfile.TemporaryDirectory() as tmp:
    code = main(["run", str(example_config_path()), "--output-dir", tmp])
    print("exit code", code)
    print(sorted(p.name for p in Path(tmp).iterdir()))
    report = json.loads((Path(tmp) / "report.json").read_text())
    for name, m in report["models"].items():
        print(f"{name:8s} mae={m['mae']:.3f} rmse={m['rmse']:.3f}")
