import pytest

CRITERIA = {
    1: "RMT saturation (Haar states, N=14)",
    2: "symmetric-subspace RMT values",
    3: "clean regular fit",
    4: "Ehrenfest collapse and revival alignment",
    5: "quantum-classical correspondence",
    6: "chaotic saturation and ln N time scaling",
    7: "engine oracle equivalence",
    8: "chi versus disorder",
    9: "effective dimension endpoints",
    10: "spacing statistics",
    11: "cat-map closed form vs Monte Carlo",
    12: "noisy rotor closed form vs Monte Carlo",
    13: "phase-space means (slow)",
}

_SEVERITY = ["PASS", "SKIP", "FAIL"]
_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number n")


@pytest.fixture
def report(request):
    """Attach a measured-value line to the acceptance summary of this test."""
    def add(text):
        request.node.user_properties.append(("detail", text))
    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        n = marker.args[0]
        status = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
        details = [v for k, v in item.user_properties if k == "detail"]
        prev_status, prev_details = _results.get(n, ("PASS", []))
        # a criterion passes only if every test attached to it passes
        status = max(status, prev_status, key=_SEVERITY.index)
        _results[n] = (status, prev_details + details)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        status, details = _results.get(n, ("NOT RUN", []))
        line = f"criterion {n:2d}: {status:7s} {title}"
        if details:
            line += " | " + "; ".join(details)
        terminalreporter.write_line(line)
