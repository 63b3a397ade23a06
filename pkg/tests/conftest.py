import pytest

CRITERIA = {
    1: "exact Newton iterates 1/3, 1417/4221 and the k=2 value",
    2: "(a+2b)* modulo 2 is 1 supp(a*) + 2 supp(b b* a*)",
    3: "unfolding bijection on dimension-filtered counts",
    4: "convergence bound camb_{<=n+k} >= min(camb, 2^2^k)",
    5: "identities I1-I5 on random truncated series",
    6: "Presburger level sets agree with the oracle",
    7: "Datalog provenance: tropical, Boolean, why-provenance",
    8: "nonexpansive grammars converge at |V|-1, X -> XX | a never does",
    9: "index-dimension bounds with brute-force min_index",
}

_outcomes: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    failed = report.failed or (report.when == "call" and report.skipped)
    if report.when == "call" or failed:
        _outcomes.setdefault(n, []).append(not failed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        results = _outcomes.get(n)
        if results is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}  {CRITERIA[n]}")
