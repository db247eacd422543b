"""End-to-end check of the plotting frontend against real sweep output.

Skipped unless the frontend has been built (`npm run build` in frontend/)
and node is on PATH; the primary suites do not depend on it.
"""

import shutil
import subprocess
from pathlib import Path

import pytest

from rmsprl.harness import desk_preset, run_experiment, emit_run, write_report

FRONTEND_CLI = Path(__file__).resolve().parent.parent / "frontend" / "dist" / "cli.js"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not FRONTEND_CLI.exists(),
    reason="frontend not built (run `npm run build` in frontend/)",
)


def plot(command, sweep_dir, out_dir):
    return subprocess.run(
        ["node", str(FRONTEND_CLI), command, "--in", str(sweep_dir), "--out", str(out_dir)],
        capture_output=True,
        text=True,
    )


def test_criterion_11_plot_pipeline(tmp_path):
    from dataclasses import replace

    sweep_dir = tmp_path / "sweep"
    for method in ("intermediate", "rm_guided"):
        config = replace(desk_preset(method), iterations=8)
        for seed in (0, 1):
            emit_run(run_experiment(config, seed), sweep_dir)
    write_report(sweep_dir)

    out1, out2 = tmp_path / "out1", tmp_path / "out2"
    for command in ("curriculum", "returns", "table"):
        for out in (out1, out2):
            result = plot(command, sweep_dir, out)
            assert result.returncode == 0, result.stderr
    names = sorted(p.name for p in out1.iterdir())
    assert names == [
        "curriculum_mu_1.svg",
        "curriculum_mu_2.svg",
        "curriculum_var_1.svg",
        "curriculum_var_2.svg",
        "returns_eval_return.svg",
        "returns_success_ratio.svg",
        "variance_table.md",
    ]
    for name in names:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    print("[PASS] criterion 11 (plot pipeline): 3 commands, 7 files, byte-identical rerun")
