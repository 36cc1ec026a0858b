"""All acceptance criteria at their stated tolerances.

Each criterion prints one PASS/FAIL line; the terminal summary repeats them
with the individual gate rows (reference, computed value, tolerance).
"""
import pytest

from maxdrag.reproduce import CRITERIA

TITLES = {
    1: "triangle oracle",
    2: "triangle decomposition integrals",
    3: "flat and deep rectangles",
    4: "two-segment optimum",
    5: "quadratic optimum",
    6: "zigzag-limit closed form",
    7: "pseudo-billiard vs closed form",
    8: "zigzag convergence",
    9: "mushroom",
    10: "billiard map properties",
    11: "body assembly",
}


@pytest.mark.parametrize("k", sorted(CRITERIA), ids=lambda k: f"criterion_{k:02d}")
def test_criterion(k, acceptance_log):
    gates = CRITERIA[k]()
    passed = all(g.passed for g in gates)
    acceptance_log[k] = (TITLES[k], passed, [g.row() for g in gates])
    print(f"criterion {k}: {TITLES[k]}: {'PASS' if passed else 'FAIL'}")
    for g in gates:
        print("  " + g.row())
    assert passed, "\n".join(g.row() for g in gates if not g.passed)
