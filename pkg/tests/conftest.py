import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from qsphere.qcoeff import ParamContext

settings.register_profile("qsphere", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qsphere")

ORACLES = json.loads(Path(__file__).with_name("oracle_values.json").read_text())


@pytest.fixture(scope="session")
def oracle():
    return ORACLES


def ctx_of(q="1/2", r="1", **kw) -> ParamContext:
    return ParamContext(q=Fraction(q), r=r, **kw)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = next((m for name, m in list(sys.modules.items()) if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
