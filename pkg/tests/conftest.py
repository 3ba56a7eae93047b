import os

import hypothesis
import numpy as np
import pytest

from micro_reynolds.model.params import FluidParams

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture
def unit_params() -> FluidParams:
    """alpha = 1 reference point."""
    return FluidParams(N2=0.25, Rc=1.0, alpha=1.0, beta=1.0)


@pytest.fixture
def alpha2_params() -> FluidParams:
    return FluidParams(N2=0.25, Rc=1.0, alpha=2.0, beta=1.0)


@pytest.fixture
def newtonian_params() -> FluidParams:
    return FluidParams(N2=1e-6, Rc=1.0, alpha=1.0, beta=1.0)
