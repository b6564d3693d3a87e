import numpy as np
import pytest

from risaoi.channel import NetworkSizes, PathLossParams, draw_channels
from risaoi.numerics import RngStream
from risaoi.sca.problems import SlotProblem


def make_problem(seed=0, n_t=4, n_s=8, u_i=3, u_e=3, gamma_db=40.0, q_dbm=-15.0, p0=3.0, m=2, weights=None, pathloss=None):
    """A slot instance at the default geometry with every stream buffered."""
    ch = draw_channels(pathloss or PathLossParams(), NetworkSizes(n_t, n_s, u_i, u_e), RngStream(seed))
    w = np.arange(2.0, 2.0 + u_i) if weights is None else np.asarray(weights, float)
    return SlotProblem(
        channels=ch,
        weights=w,
        buffer=(w > 0).astype(np.int64),
        gamma_th=10 ** (gamma_db / 10),
        noise=1e-10,
        energy_threshold=10 ** (q_dbm / 10) * 1e-3,
        power_budget=p0,
        channels_available=m,
    )


@pytest.fixture
def problem():
    return make_problem()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
