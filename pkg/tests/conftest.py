import os
import tempfile

os.environ.setdefault("COEXSIM_LOG_FILE", os.path.join(tempfile.gettempdir(), "coexsim-test.log"))

import numpy as np
import pytest

from app.models.constellation import ConstellationSpec, ShellSpec, SystemRole


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def small_primary():
    return ConstellationSpec(name="small-p", role=SystemRole.primary,
                             shells=[ShellSpec(altitude_km=550, inclination_deg=53.0, num_planes=12, sats_per_plane=12)])
