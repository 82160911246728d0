from collections import defaultdict

import pytest

from smallsupport.quasigroup import validate

# criterion -> list of (part, passed, detail), filled by test_acceptance.py
ACCEPTANCE = defaultdict(list)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[criterion]
        ok = all(p for _, p, _ in parts)
        terminalreporter.write_line(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}")
        for part, passed, detail in parts:
            terminalreporter.write_line(f"    [{'pass' if passed else 'FAIL'}] {part}: {detail}")


@pytest.fixture
def z4():
    return validate([[(a + b) % 4 for b in range(4)] for a in range(4)])


@pytest.fixture
def z2():
    return validate([[0, 1], [1, 0]])
