import pytest

import effectsched as es

TINY_DOC = {
    "system": {"M": 1, "K": 1, "max_aoi": 2, "usefulness_levels": 2},
    "attributes": [{"alpha": 2.0, "beta": 5.0}],
    "goals": {"required_sets": [[1]]},
}


@pytest.fixture(scope="session")
def defaults():
    return es.load_config(None)


@pytest.fixture(scope="session")
def default_table(defaults):
    return es.build_transitions(defaults)


@pytest.fixture(scope="session")
def default_solve(defaults, default_table):
    return es.bisection_solve(default_table, defaults)


@pytest.fixture(scope="session")
def tiny_config():
    return es.load_config(TINY_DOC)


@pytest.fixture(scope="session")
def tiny_table(tiny_config):
    return es.build_transitions(tiny_config)
