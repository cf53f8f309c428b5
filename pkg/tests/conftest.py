import numpy as np
import pytest

from uniclass.generate import haar_unitary, make_rng
from uniclass.matcore import BipartiteOperator

SHAPES = [(1, 1), (1, 3), (2, 1), (2, 2), (2, 3), (3, 2), (3, 3)]


def naive_partial_trace(x, n, k):
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            out[i, j] = sum(x[i * k + s, j * k + s] for s in range(k))
    return out


def naive_partial_transpose(x, n, k):
    out = np.zeros_like(x, dtype=complex)
    for i in range(n):
        for j in range(n):
            for s in range(k):
                for t in range(k):
                    out[i * k + s, j * k + t] = x[i * k + t, j * k + s]
    return out


def naive_channel(u, x, beta):
    n, k = u.n, u.k
    return naive_partial_trace(u.mat @ np.kron(x, beta) @ u.mat.conj().T, n, k)


def unit(i, j, d):
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1
    return m


def naive_choi(u, beta):
    n = u.n
    return sum(np.kron(unit(i, j, n), naive_channel(u, unit(i, j, n), beta))
               for i in range(n) for j in range(n))


def haar_op(n, k, seed):
    return BipartiteOperator(haar_unitary(n * k, seed), n, k)


@pytest.fixture
def rng():
    return make_rng(12345)


def pytest_configure(config):
    config.criterion_outcomes = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    number, title = mark.args
    state = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
    item.config.criterion_outcomes[number] = (title, state)


def pytest_terminal_summary(terminalreporter, config):
    outcomes = getattr(config, "criterion_outcomes", {})
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(outcomes):
        title, state = outcomes[number]
        terminalreporter.write_line(f"criterion {number:2d}: {state}  {title}")
