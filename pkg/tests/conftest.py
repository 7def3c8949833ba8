import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from latchiral.expr import build_lattice  # noqa: E402
from latchiral.roots import RootConfig, run_vinberg  # noqa: E402

from figures import FIGURES, figure_expr, figure_vector  # noqa: E402


@pytest.fixture(scope="session")
def classification():
    """One verified run of the whole derivation script (about half a minute)."""
    from latchiral.tables import run_classification

    return run_classification(verify=True)


@pytest.fixture(scope="session")
def figure_runs():
    """Root sequences for every golden figure, run up to its last printed level."""
    out = {}
    for key, fig in FIGURES.items():
        L = build_lattice(figure_expr(key))
        p = figure_vector(fig, fig["p"])
        top = max(r[1] for r in fig["rows"])
        out[key] = (L, run_vinberg(L, RootConfig(p, fig.get("squares", (2, 6)), top)))
    return out


@pytest.fixture(scope="session")
def table_lattices():
    from latchiral.tables import generate_tables

    return [(e, build_lattice(e.expr)) for e in generate_tables()]


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion that ran."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in lines:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    passed = sum(ok for _, ok, _ in lines)
    terminalreporter.write_line(f"{passed}/{len(lines)} acceptance checks passed")
