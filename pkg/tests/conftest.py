import pytest
from hypothesis import settings

settings.register_profile("slow_solves", deadline=None, max_examples=30)
settings.load_profile("slow_solves")


@pytest.fixture(scope="session")
def bundled_model():
    from mgsched.model import bundled_case_path, load_case

    return load_case(bundled_case_path())


@pytest.fixture(scope="session")
def det_case1(bundled_model):
    """One deterministic copper-plate run shared by cheap assertions."""
    from mgsched.scheduler import CASE1, run_deterministic

    return run_deterministic(bundled_model, CASE1)
