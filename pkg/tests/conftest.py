import hypothesis
import numpy as np
import pytest

from arcflow import CircleSupport

hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.load_profile("ci")

np.seterr(all="warn", under="ignore")


@pytest.fixture(scope="session")
def unit_circle():
    return CircleSupport(1.0)
