"""Acceptance criteria, one test each, at their stated tolerances and runtime budgets.

Every test appends a one-line verdict to ``conftest.ACCEPTANCE_LINES`` (shown
in the terminal summary) and prints it, so ``pytest -v -s`` shows it inline too.
"""

import json
from pathlib import Path

import pytest

import conftest
from logeit import suite
from logeit.cli import run

ALL_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "all.ini"

CRITERIA = [
    (1, "disk_oracle"),
    (2, "scaling_identity"),
    (3, "contour_crosscheck"),
    (4, "quadrature_crosscheck"),
    (5, "derivative_fd"),
    (6, "tau_rates"),
    (7, "boundedness"),
    (8, "order_inequalities"),
    (9, "norm_equivalence"),
    (10, "lipschitz"),
    (11, "neumann_series"),
    (12, "linearization"),
]


def _record(number, name, passed, detail):
    line = f"criterion {number:2d} ({name}): {'PASS' if passed else 'FAIL'}  {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.mark.parametrize("number, name", CRITERIA, ids=[n for _, n in CRITERIA])
def test_criterion(number, name):
    rep = suite.SUITE[name](seed=0)
    budget = rep.params["runtime_budget_s"]
    failed = [g for g in rep.gates if not g.passed]
    in_budget = rep.runtime < budget
    detail = f"{len(rep.gates) - len(failed)}/{len(rep.gates)} gates, {rep.runtime:.1f} s of {budget} s"
    if failed:
        detail += "; failing: " + "; ".join(g.describe() for g in failed)
    _record(number, name, not failed and in_budget, detail)
    assert not failed, "\n".join(g.describe() for g in failed)
    assert in_budget, f"runtime {rep.runtime:.1f} s exceeds {budget} s"


def test_criterion_13_determinism(tmp_path):
    manifests = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        code = run(ALL_CONFIG, out=str(out), seed=0)
        assert code in (0, 1)
        manifests.append(json.loads((out / "manifest.json").read_text()))
    same = manifests[0] == manifests[1]
    _record(13, "determinism", same, f"{len(manifests[0]['files'])} files, manifests identical: {same}")
    assert same
