import pytest

from uavrra.scenario import ScenarioConfig, validate


@pytest.fixture
def table_i():
    """Reference scenario (all defaults)."""
    return validate(ScenarioConfig())


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call" and outcome != "error":
                continue
            if "test_acceptance.py::" not in rep.nodeid:
                continue
            label = dict(rep.user_properties).get("criterion", rep.nodeid.split("::")[-1])
            lines.append((label, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for label, status in sorted(lines):
            terminalreporter.write_line(f"{status}  {label}")
