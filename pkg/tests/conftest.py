import pytest

from qpscope.device_model import EnvConditions, measured_device


@pytest.fixture(scope="session")
def device():
    return measured_device()


@pytest.fixture(scope="session")
def env20():
    return EnvConditions(temp_k=0.020, gamma_offset=0.14, f0_ghz=10.0, g0=0.0)


@pytest.fixture(scope="session")
def acceptance_results():
    """Run the full acceptance suite once per session; shared by the
    acceptance tests and the end-to-end closure invariants."""
    from qpscope.acceptance import run_acceptance

    results = run_acceptance()
    for res in results:
        print(res.line())
    return {res.number: res for res in results}
