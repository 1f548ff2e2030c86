import numpy as np
import pytest

from ghzmc.lattice import Boundary, LatticeSpec, make_bipartition, preset_mask


@pytest.fixture
def chain2(request):
    """N=2 open chain (the single-bond analytic fixture)."""
    beta = getattr(request, "param", 1.0)
    return LatticeSpec(1, (2,), Boundary.OPEN, 1.0, beta)


@pytest.fixture
def ring6():
    return LatticeSpec(1, (6,), Boundary.PERIODIC, 1.0, 1.0)


@pytest.fixture
def torus3():
    return LatticeSpec(2, (3, 3), Boundary.PERIODIC, 1.0, 0.4)


@pytest.fixture
def torus4():
    return LatticeSpec(2, (4, 4), Boundary.PERIODIC, 1.0, 0.44)


def half_part(spec, name="half-cylinder"):
    return make_bipartition(spec, preset_mask(spec, name), name=name)


def single_site_part(spec):
    return make_bipartition(spec, preset_mask(spec, "single-site"), name="single-site")


def arc_mask(n_sites, sites):
    mask = np.zeros(n_sites, dtype=bool)
    mask[list(sites)] = True
    return mask
