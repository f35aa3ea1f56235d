import numpy as np
import pytest

from rfspectrum import gmm


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def base_model():
    return gmm.two_class_model(512, 3.0, 2.0)


@pytest.fixture(scope="session")
def base_data(base_model):
    return gmm.sample_mixture(base_model, 256, 0)


def random_model(rng, p, K):
    """Random means and full covariances (Wishart-like, O(1) norm)."""
    means = rng.normal(scale=2.0, size=(p, K))
    covs = []
    for _ in range(K):
        A = rng.normal(size=(p, p)) / np.sqrt(p)
        covs.append(0.5 * np.eye(p) + 0.5 * A @ A.T)
    props = rng.dirichlet(np.ones(K) * 3)
    props = props / props.sum()
    return gmm.MixtureModel(means, np.stack(covs), props)


ACCEPTANCE = {}


def report(number, title, ok, detail=""):
    """Record and print one line for an acceptance criterion, then assert it."""
    status = "PASS" if ok else "FAIL"
    ACCEPTANCE[number] = f"criterion {number:>2}: {status}  {title}  [{detail}]"
    print(ACCEPTANCE[number])
    assert ok, ACCEPTANCE[number]


def report_skip(number, title, reason):
    ACCEPTANCE[number] = f"criterion {number:>2}: SKIP  {title}  [{reason}]"
    print(ACCEPTANCE[number])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
