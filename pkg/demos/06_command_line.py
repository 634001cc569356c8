"""The ``motstab`` command line, driven from Python.

Every subcommand reads plain CSV-like files and writes results to stdout or
``--out``. Exit code 1 marks a negative mathematical answer (violation,
infeasible pair, failed run), 2 a usage or parse error, 3 a numerical failure.

Run with ``python3 demos/06_command_line.py``.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

work = Path(tempfile.mkdtemp())
files = {
    "delta0.csv": "0,1\n",
    "pm1.csv": "-1,0.5\n1,0.5\n",
    "pm2.csv": "-2,0.5\n2,0.5\n",
    # two copies of x=0 with conditional law (d0 + d1)/2
    "cand.csv": ",0,1\n0,0.5,0.5\n0,0.5,0.5\n",
}
for name, text in files.items():
    (work / name).write_text(text)


def run(*args):
    argv = [sys.executable, "-m", "motstab", *[str(work / a) if a in files else a for a in args]]
    res = subprocess.run(argv, capture_output=True, text=True)
    print("$ motstab", " ".join(args), f"   [exit {res.returncode}]")
    print(res.stdout + res.stderr)


run("convex-order", "--mu", "delta0.csv", "--nu", "pm1.csv")
run("solve-mot", "--mu", "pm1.csv", "--nu", "pm2.csv", "--cost", "abs")
run("solve-mot", "--mu", "pm2.csv", "--nu", "pm1.csv")
run("check-monotone", "--generic", "--candidates", "cand.csv", "--oracle", "minmass:0,1")
run("wasserstein", "--mu", "pm1.csv", "--nu", "pm2.csv", "--r", "2")
run("stability", "--mu", "pm1.csv", "--nu", "pm2.csv", "--steps", "5", "--format", "csv")
