"""The whole pipeline through the command-line entry point, on the bundled fixtures."""

import json
import sys
import tempfile
from pathlib import Path

import dlab
from dlab.cli import main

config = Path(dlab.__file__).parent / "fixtures" / "config.json"
out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="dlab-"))

code = main(["report", "--config", str(config), "--out", str(out)])
print("exit code", code)

for f in sorted((out / "report").iterdir()):
    print("  ", f.name)
print((out / "report" / "table_logistic.txt").read_text())
manifest = json.loads((out / "classify" / "manifest.json").read_text())
print("classify seed", manifest["seed"], "| outputs:", ", ".join(manifest["outputs"]))

# Plot data, e.g. with matplotlib:
#   import pandas as pd; pd.read_csv(out / "report" / "equity.csv").plot(x="date", y="equity")
#   pd.read_csv(out / "report" / "roc.csv").plot(x="fpr", y="tpr")
