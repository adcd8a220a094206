import json
import pathlib
import sys

import pytest

from rpflab.config_space import Configuration
from rpflab.rng import stream

DATA_DIR = pathlib.Path(__file__).parent / "data"
sys.path.insert(0, str(pathlib.Path(__file__).parent.parent / "scripts"))


@pytest.fixture(scope="session")
def airy_table():
    with open(DATA_DIR / "airy_oracle.json") as fh:
        return json.load(fh)


def poisson_replicas(intensity, lo, hi, n_reps, seed):
    """Homogeneous Poisson configurations on [lo, hi), one per replica."""
    out = []
    for rep in range(n_reps):
        rng = stream(seed, rep, 99)
        k = rng.poisson(intensity * (hi - lo))
        out.append(Configuration.from_reals(rng.uniform(lo, hi, size=k)))
    return out
