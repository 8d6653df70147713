import pytest


def pytest_configure(config):
    config.addinivalue_line(
        'markers',
        'reproduction: long runs that reproduce the reference experiments (select with -m reproduction)',
    )


@pytest.fixture(autouse=True)
def quiet_herding_logs(caplog):
    """
    Keep the per-iteration optimizer and integrator logs out of the test output.

    - Warnings and errors still show up in failure reports
    """
    caplog.set_level('WARNING')
