import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "spinlab",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("spinlab")


@pytest.fixture(scope="session")
def special3():
    from spinlab.landscape import special_points

    return special_points(3)[0]
