import sys
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("pssl", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pssl")


@pytest.fixture(autouse=True)
def _quiet_size_warnings():
    from pssl.learners import SmallLabeledSampleWarning
    from pssl.sanitizer import SmallInputWarning

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallInputWarning)
        warnings.simplefilter("ignore", SmallLabeledSampleWarning)
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance suite's one-line-per-criterion report, when it ran."""
    lines = []
    for name, mod in list(sys.modules.items()):
        if name.split(".")[-1] == "test_acceptance":
            lines = getattr(mod, "REPORT", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
