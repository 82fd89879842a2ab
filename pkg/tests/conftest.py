import numpy as np
import pytest

from mlspec.models import MppmParams, Labeling, mppm_to_msbm, sample_labels, sample_msbm


def planted_network(n=200, K=2, p=(0.5, 0.5), q=(0.05, 0.05), seed=0):
    """Small two-community test network plus its true labels."""
    params = MppmParams(n=n, K=K, p=np.array(p), q=np.array(q), pi=np.full(K, 1.0 / K))
    labels = sample_labels(n, params.pi, "exact-balanced", seed=seed)
    net = sample_msbm(mppm_to_msbm(params), labels, seed=seed)
    return net, labels, params


def two_cliques(size=5):
    """Block-diagonal adjacency of two disjoint cliques."""
    n = 2 * size
    a = np.zeros((n, n))
    a[:size, :size] = 1.0
    a[size:, size:] = 1.0
    np.fill_diagonal(a, 0.0)
    truth = Labeling(np.repeat([0, 1], size))
    return a, truth


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one "[criterion N] PASS/FAIL" line per acceptance criterion, echoed
# after the test session so capture cannot swallow them
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
