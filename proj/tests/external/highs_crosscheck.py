#!/usr/bin/env python3
"""Cross-check the built-in stage-1 solver against HiGHS through the LP
export and solution import of the mirrorvlc tool.

usage: highs_crosscheck.py TOOL SOLVER_SCRIPT
"""

import pathlib
import re
import subprocess
import sys
import tempfile

CONFIGS = {
    "tiny": """room_width = 3
room_depth = 2.5
room_height = 2.2
bulb_radius = 0.2
layers = 1,5,7
divergence_deg = 35
grid_x = 2
grid_y = 2
sensing_points = 16
phi2 = 0.5
phi1 = 1e6
mu = 0.3
""",
    "windowed": """room_width = 4
room_depth = 3
room_height = 2.5
bulb_radius = 0.2
layers = 1,6,9
divergence_deg = 40
grid_x = 3
grid_y = 2
sensing_points = 25
phi2 = 2
phi1 = 12
mu = 0.5
""",
}


def phi(text: str) -> float:
    m = re.search(r"^objective_phi: (\S+)$", text, re.M)
    if not m:
        raise SystemExit("no objective in output:\n" + text)
    return float(m.group(1))


def run(*args: str) -> str:
    r = subprocess.run(args, capture_output=True, text=True)
    if r.returncode != 0:
        raise SystemExit(f"{' '.join(args)} failed ({r.returncode}):\n{r.stdout}{r.stderr}")
    return r.stdout


def main() -> int:
    tool, solver = sys.argv[1], sys.argv[2]
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        root = pathlib.Path(tmp)
        for name, text in CONFIGS.items():
            for regime in ("none", "adjacent", "four"):
                cfg = root / f"{name}.cfg"
                cfg.write_text(text)
                lp = root / f"{name}_{regime}.lp"
                sol = root / f"{name}_{regime}.sol"
                built_in = phi(run(tool, "design", "--config", str(cfg), "--regime", regime, "--export", str(lp)))
                run(sys.executable, solver, str(lp), str(sol))
                imported = phi(run(tool, "design", "--config", str(cfg), "--regime", regime, "--import", str(sol)))
                ok = abs(built_in - imported) <= 1e-6 * max(1.0, abs(built_in))
                failures += not ok
                print(f"{'ok  ' if ok else 'FAIL'} {name} {regime}: built-in {built_in!r}, HiGHS {imported!r}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
