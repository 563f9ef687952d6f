from __future__ import annotations

import pytest

# criterion number -> (title, [(part, passed, detail)])
GATE: dict[int, tuple[str, list]] = {}


class Gate:
    def record(self, number: int, title: str, passed: bool, detail: str = "", part: str = "") -> bool:
        GATE.setdefault(number, (title, []))[1].append((part, bool(passed), detail))
        return bool(passed)


@pytest.fixture(scope="session")
def gate() -> Gate:
    return Gate()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not GATE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(GATE):
        title, parts = GATE[number]
        ok = all(p for _, p, _ in parts)
        detail = "; ".join(f"{name + ': ' if name else ''}{'ok' if p else 'FAILED'} ({d})"
                           for name, p, d in parts)
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}")
