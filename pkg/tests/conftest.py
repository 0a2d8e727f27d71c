"""Shared pytest wiring: per-criterion verdict lines for the release gate.

The gate tests in test_acceptance.py register a label here; after each one
runs, the label is written through the terminal reporter so exactly one
PASS/FAIL line per criterion shows up even under output capture.
"""

import pytest

# test function name -> "[acceptance NN] slug"
acceptance_labels: dict[str, str] = {}

_config = None


def pytest_configure(config):
    global _config
    _config = config


@pytest.hookimpl(trylast=True)
def pytest_runtest_logreport(report):
    if report.when != "call" or _config is None:
        return
    label = acceptance_labels.get(report.nodeid.rsplit("::", 1)[-1])
    if label is None:
        return
    reporter = _config.pluginmanager.get_plugin("terminalreporter")
    if reporter is None:
        return
    verdict = "PASS" if report.passed else "FAIL"
    reporter.write_line(f"{label}: {verdict} ({report.duration:.2f}s)")
