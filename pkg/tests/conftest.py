import pytest

from tantra.dataset import build_agri_dataset


@pytest.fixture(scope="session")
def demo_graph():
    return build_agri_dataset()


@pytest.fixture()
def demo_copy():
    # Mutation tests get their own build.
    return build_agri_dataset()
