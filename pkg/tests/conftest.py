import json
from importlib import resources

import numpy as np
import pytest

import clqr
from clqr.serialize import problem_from_dict


def load_double_integrator_doc() -> dict:
    text = resources.files("clqr.data").joinpath("double_integrator.json").read_text()
    return json.loads(text)


@pytest.fixture(scope="session")
def di_doc():
    return load_double_integrator_doc()


@pytest.fixture(scope="session")
def di_ocp(di_doc):
    return problem_from_dict(di_doc)


@pytest.fixture(scope="session")
def qp1(di_ocp):
    return clqr.condense(di_ocp, 1)


@pytest.fixture(scope="session")
def qp2(di_ocp):
    return clqr.condense(di_ocp, 2)


@pytest.fixture(scope="session")
def qp3(di_ocp):
    return clqr.condense(di_ocp, 3)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240824)
