import numpy as np
import pytest

from risklens.baseline import PerturbationSpec, grid_spec, perturb_explain
from risklens.explain import Explanation, NoDirection
from risklens.toyenvs import GridMap, bundled_map

OPEN_MAP = """\
#######
#.....#
#..S..#
#..L..#
#######
"""


def test_grid_spec_validity_and_labels():
    m = GridMap.parse(OPEN_MAP)
    spec = grid_spec(m, reach=2)
    assert spec.dim == 2
    assert spec.offsets == (tuple(range(-2, 3)), tuple(range(-2, 3)))
    assert spec.is_valid(np.array([0.0, 0.0]))  # start itself
    assert not spec.is_valid(np.array([0.0, -2.0]))  # wall above
    assert not spec.is_valid(np.array([99.0, 0.0]))  # off the map
    assert spec.is_valid(np.array([0.0, 1.0]))  # lava is a real position
    assert spec.label(np.array([0.0, 1.0])) == 1
    assert spec.label(np.array([1.0, 0.0])) == 0


def test_perturb_explain_finds_lava_direction():
    m = GridMap.parse(OPEN_MAP)
    ex = perturb_explain(np.array([0.0, 0.0]), grid_spec(m, reach=2), seed=3)
    assert isinstance(ex, Explanation)
    assert ex.mode == "classification"
    assert ex.g[1] > 0  # lava sits one row down (+y)
    assert ex.risky_count > 0


def test_perturb_explain_is_deterministic():
    m = GridMap.parse(OPEN_MAP)
    spec = grid_spec(m, reach=2)
    a = perturb_explain(np.array([0.0, 0.0]), spec, seed=9)
    b = perturb_explain(np.array([0.0, 0.0]), spec, seed=9)
    assert np.array_equal(a.g, b.g) and a.bias == b.bias
    assert a.sample_size == b.sample_size


def test_perturb_explain_single_class_no_direction():
    # no lava anywhere within reach of the start
    text = "#####\n#S..#\n#####\n"
    ex = perturb_explain(np.array([0.0, 0.0]), grid_spec(GridMap.parse(text), reach=2), seed=0)
    assert isinstance(ex, NoDirection)
    assert ex.risky_count == 0 and ex.sample_size > 0


def test_perturb_explain_all_invalid_raises():
    spec = PerturbationSpec(
        offsets=((0, 1), (0, 1)),
        is_valid=lambda s: False,
        label=lambda s: 0,
    )
    with pytest.raises(ValueError):
        perturb_explain(np.array([0.0, 0.0]), spec, samples=16, seed=0)


def test_perturb_explain_validates_inputs():
    m = GridMap.parse(OPEN_MAP)
    spec = grid_spec(m)
    with pytest.raises(ValueError):
        perturb_explain(np.array([0.0]), spec, seed=0)
    with pytest.raises(ValueError):
        perturb_explain(np.array([0.0, 0.0]), spec, samples=0, seed=0)
    with pytest.raises(ValueError):
        grid_spec(m, reach=0)
    with pytest.raises(ValueError):
        PerturbationSpec(offsets=(), is_valid=lambda s: True, label=lambda s: 0)


def test_blocked_corridor_contrast():
    # the engineered map: lava two cells east of start is real for the
    # perturbation oracle, so x gets blamed; every valid sample keeps y fixed,
    # so the y weight never moves off exactly zero
    grid = bundled_map("blocked_corridor")
    ex = perturb_explain(np.array([0.0, 0.0]), grid_spec(grid, reach=3), seed=7)
    assert isinstance(ex, Explanation)
    assert ex.g[0] > 0
    assert ex.g[1] == 0.0
