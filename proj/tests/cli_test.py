"""End-to-end checks of the gtsim command line: outputs, exit codes, SVG."""

import csv
import json
import subprocess
import sys
import tempfile
import xml.etree.ElementTree as ET
from pathlib import Path

CLI = sys.argv[1]
failures = 0


def run(*args):
    return subprocess.run([CLI, *args], capture_output=True, text=True)


def check(name, cond, detail=""):
    global failures
    print(("ok   " if cond else "FAIL ") + name + ("" if cond else f"  {detail}"))
    if not cond:
        failures += 1


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)

    trace = tmp / "ss.csv"
    summary = tmp / "ss.json"
    plot = tmp / "ss.svg"
    r = run("run", "--agents", "6", "--iters", "300", "--stride", "7", "--sigma", "0.1",
            "--out", str(trace), "--summary", str(summary), "--plot", str(plot))
    check("run exits 0", r.returncode == 0, r.stderr)
    rows = list(csv.reader(trace.open()))
    check("trace header", rows[0][:2] == ["t", "eta"] and rows[0][-1] == "subopt", rows[0])
    # t = 0, every 7th iteration, and the final one.
    check("trace row count", len(rows) - 1 == 1 + 300 // 7 + 1, len(rows))
    check("trace ends at the budget", rows[-1][0] == "300", rows[-1])
    s = json.loads(summary.read_text())
    check("summary parses", s["summary"]["iterations"] == 300, s.get("summary"))
    ET.parse(plot)
    check("run plot is well-formed SVG", True)

    r = run("run", "--algo", "assdsgt", "--agents", "8", "--iters", "200", "--out", str(tmp / "ass.csv"))
    check("assdsgt switches to lazy mixing", r.returncode == 0 and "lazy-metropolis" in r.stdout, r.stderr)

    r = run("run", "--algo", "dsgt", "--mixing", "random-gossip", "--agents", "6", "--iters", "200",
            "--out", str(tmp / "gossip.csv"))
    check("baseline with gossip runs", r.returncode == 0, r.stderr)

    svg = tmp / "overlay.svg"
    r = run("plot", str(trace), str(tmp / "ass.csv"), str(tmp / "gossip.csv"),
            "--label", "SS & co", "--label", "ASS", "--out", str(svg))
    check("plot exits 0", r.returncode == 0, r.stderr)
    root = ET.parse(svg).getroot()
    texts = [t.text for t in root.iter("{http://www.w3.org/2000/svg}text")]
    check("plot labels present", "SS & co" in texts and "ASS" in texts and "gossip" in texts, texts)
    check("plot has one line per series and panel",
          len(list(root.iter("{http://www.w3.org/2000/svg}polyline"))) == 6)

    bad_key = tmp / "bad_key.json"
    bad_key.write_text(json.dumps({"agents": 8, "problem": {"sigmaa": 1.0}}))
    r = run("run", "--config", str(bad_key))
    check("unknown key exits 2", r.returncode == 2, r.returncode)
    check("unknown key is named", "problem.sigmaa" in r.stderr, r.stderr)

    malformed = tmp / "malformed.json"
    malformed.write_text('{\n  "agents": 8,\n  nope\n}\n')
    r = run("run", "--config", str(malformed))
    check("malformed config exits 2", r.returncode == 2 and "line 3" in r.stderr, r.stderr)

    r = run("run", "--config", str(tmp / "missing.json"))
    check("missing config exits 2", r.returncode == 2, r.returncode)

    r = run("run", "--algo", "assdsgt", "--mixing", "random-gossip")
    check("assdsgt with gossip exits 2", r.returncode == 2 and "mixing" in r.stderr, r.stderr)

    r = run("run", "--topology", "grid", "--agents", "8")
    check("non-square grid exits 2", r.returncode == 2 and "agents" in r.stderr, r.stderr)

    r = run("run", "--bogus-flag")
    check("unknown flag exits 2", r.returncode == 2, r.returncode)

    r = run("validate-mixing", "--topology", "ring", "--agents", "16")
    lam = [line.split()[-1] for line in r.stdout.splitlines() if line.startswith("lambda2")]
    check("validate-mixing lambda2", r.returncode == 0 and lam and abs(float(lam[0]) - 0.9492530216741911) < 1e-10,
          r.stdout)

    r = run("validate-mixing", "--topology", "ring", "--agents", "32", "--mixing", "lazy-metropolis")
    check("validate-mixing reports the augmented fit", r.returncode == 0 and "theta_tilde" in r.stdout
          and "holds" in r.stdout, r.stdout)

    cfg = tmp / "grid.json"
    cfg.write_text(json.dumps({"topology": "grid", "agents": 9, "iters": 50}))
    r = run("run", "--config", str(cfg))
    check("config file drives a grid run", r.returncode == 0 and "9 (grid" in r.stdout, r.stderr)

    table = tmp / "sweep.csv"
    r = run("sweep", "--sweep-agents", "4", "6", "--sweep-algos", "ssdsgt", "assdsgt", "--sweep-seeds", "2",
            "--iters", "200000", "--eps", "1e-3", "--threads", "2", "--out", str(table))
    check("sweep exits 0", r.returncode == 0, r.stderr)
    check("sweep table rows", len(table.read_text().strip().splitlines()) == 5, table.read_text())

print(f"{failures} failure(s)")
sys.exit(1 if failures else 0)
