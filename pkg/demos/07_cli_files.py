"""The command-line front end and its file formats, driven from Python.

Every capability is also reachable as `mimome <subcommand>`: matrices
travel as JSON {rows, cols, data} with [re, im] pairs in row-major order,
runs are described by small TOML/JSON scenario files, and sweep outputs
are CSV with a first comment line echoing version and parameters, so a
result file is reproducible from its own header. Outputs are byte-stable
for a fixed seed and version; the test suite pins one such file.
"""
import json
import tempfile
from pathlib import Path

import numpy as np

from mimome.channels import save_matrix
from mimome.cli import main

work = Path(tempfile.mkdtemp(prefix="mimome_demo_"))
rng = np.random.default_rng(1)
hb = (rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))) / np.sqrt(2)
he = (rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))) / np.sqrt(2)
save_matrix(work / "hb.json", hb)
save_matrix(work / "he.json", he)

(work / "scenario.toml").write_text(
    'constellation = "qpsk"\n'
    f'hb = "{work / "hb.json"}"\n'
    f'he = "{work / "he.json"}"\n'
    "power_db = 12.0\n"
)

print("$ mimome gsvd hb.json he.json")
main(["gsvd", str(work / "hb.json"), str(work / "he.json"),
      "--out", str(work / "gsvd.json")])
g = json.loads((work / "gsvd.json").read_text())
print(json.dumps({k: g[k] for k in ("k", "r", "s", "nu", "null_dim",
                                    "reconstruction_error")}, indent=2))

print("\n$ mimome allocate --scenario scenario.toml")
rc = main(["allocate", "--scenario", str(work / "scenario.toml"),
           "--out", str(work / "alloc.json")])
a = json.loads((work / "alloc.json").read_text())
print(f"exit {rc}: rate {a['rate_bits']:.4f} bits, powers "
      f"{[round(x, 3) for x in a['p']]}")

print("\n$ mimome sweep --scenario scenario.toml --methods dual,gaussian "
      "--snr-db 0:20:10")
main(["sweep", "--scenario", str(work / "scenario.toml"),
      "--methods", "dual,gaussian", "--snr-db", "0:20:10",
      "--out", str(work / "sweep.csv")])
print((work / "sweep.csv").read_text(), end="")

print(f"\nartifacts left in {work}")
