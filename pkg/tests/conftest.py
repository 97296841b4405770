import numpy as np
import pytest

from fairweight.data import LabeledDataset

ACCEPTANCE_RESULTS = {}


def make_dataset(n: int, d: int, k: int, seed: int, labels=None) -> LabeledDataset:
    """Random dataset with standardized features and non-degenerate groups."""
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n, d))
    features = (features - features.mean(axis=0)) / features.std(axis=0)
    groups = np.zeros((n, k), dtype=np.int64)
    for col in range(k):
        while True:
            candidate = (rng.random(n) < 0.5).astype(np.int64)
            if 0 < candidate.sum() < n:
                groups[:, col] = candidate
                break
    if labels is None:
        beta = rng.standard_normal(d)
        scores = 1.0 / (1.0 + np.exp(-(features @ beta)))
        labels = (rng.random(n) < scores).astype(np.int64)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
    return LabeledDataset(features=features, labels=np.asarray(labels), groups=groups)


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): label a test as one acceptance criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    if report.when == "call":
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        ACCEPTANCE_RESULTS[name] = status
    elif report.when == "setup" and (report.skipped or report.failed):
        ACCEPTANCE_RESULTS[name] = "SKIP" if report.skipped else "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in sorted(ACCEPTANCE_RESULTS.items()):
        terminalreporter.write_line(f"{status:<5} {name}")
