"""
run_experiments.py
Regenerates every result file under results/ by running src/main.py once
per data set.

Run:
    python run_experiments.py            # all runs
    python run_experiments.py 03 07      # selected run ids
"""

import os
import subprocess
import sys

RESULTS_DIR = "results"

runs = [
    {"id": "01", "file": "rhs_curve_10_critical.csv",
     "args": ["rhs-curve", "--n", "1", "--l", "0", "--alphaZ", "0.510107"]},
    {"id": "02", "file": "rhs_curve_10_two_roots.csv",
     "args": ["rhs-curve", "--n", "1", "--l", "0", "--alphaZ", "0.3"]},
    {"id": "03", "file": "energy_10.csv",
     "args": ["sweep", "--n", "1", "--l", "0", "--min", "0.01", "--max", "0.51", "--steps", "51"]},
    {"id": "04", "file": "energy_20.csv",
     "args": ["sweep", "--n", "2", "--l", "0", "--min", "0.01", "--max", "1.4", "--steps", "140"]},
    {"id": "05", "file": "energy_21.csv",
     "args": ["sweep", "--n", "2", "--l", "1", "--min", "0.01", "--max", "1.22", "--steps", "122"]},
    {"id": "06", "file": "epsilon.csv",
     "args": ["epsilon-sweep", "--min", "0.01", "--max", "1.4", "--steps", "140"]},
    {"id": "07", "file": "ground_state.csv",
     "args": ["ground-state", "--min", "0.01", "--max", "1.5", "--steps", "150"]},
    {"id": "08", "file": "critical_10.json", "args": ["critical", "--n", "1", "--l", "0"]},
    {"id": "09", "file": "critical_20.json", "args": ["critical", "--n", "2", "--l", "0"]},
    {"id": "10", "file": "critical_21.json", "args": ["critical", "--n", "2", "--l", "1"]},
    {"id": "11", "file": "hydrogen_10.json",
     "args": ["solve", "--n", "1", "--l", "0", "--alphaZ", "7.29735e-3"]},
    {"id": "12", "file": "hydrogen_20.json",
     "args": ["solve", "--n", "2", "--l", "0", "--alphaZ", "7.29735e-3"]},
    {"id": "13", "file": "hydrogen_21.json",
     "args": ["solve", "--n", "2", "--l", "1", "--alphaZ", "7.29735e-3"]},
    {"id": "14", "file": "splitting_2_0.4.json", "args": ["splitting", "--n", "2", "--alphaZ", "0.4"]},
    {"id": "15", "file": "oracle_10_0.3.json",
     "args": ["oracle-check", "--n", "1", "--l", "0", "--alphaZ", "0.3"]},
]


def main(selected: list[str]) -> int:
    os.makedirs(RESULTS_DIR, exist_ok=True)
    failures = 0
    for run in runs:
        if selected and run["id"] not in selected:
            continue
        path = os.path.join(RESULTS_DIR, run["file"])
        result = subprocess.run(
            [sys.executable, "src/main.py", *run["args"], "--output", path],
            capture_output=True,
            text=True,
        )
        if result.returncode != 0:
            failures += 1
            print(f"[ERROR] Run {run['id']} failed (exit {result.returncode}):\n{result.stderr}")
        else:
            print(f"[OK] Run {run['id']} completed -> {path}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
