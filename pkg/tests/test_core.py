import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tokenprune import (
    BinaryMask,
    DataError,
    IndexSet,
    ConfigError,
    ScoreVector,
    ShapeError,
    TokenGrid,
    grid_reshape_roundtrip,
    mean_std,
    minmax_normalize,
)

finite_floats = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
)


def vec(values, grid=None):
    values = list(values)
    if grid is None:
        grid = TokenGrid(1, len(values), 1)
    return ScoreVector(np.array(values, dtype=float), grid)


class TestTokenGrid:
    def test_total_and_mapping(self):
        grid = TokenGrid(3, 4, 2)
        assert grid.total() == 12
        assert grid.rc(0) == (0, 0)
        assert grid.rc(5) == (1, 1)
        assert grid.rc(11) == (2, 3)

    def test_index_mapping_is_bijective(self):
        grid = TokenGrid(5, 7, 1)
        seen = {grid.rc(i) for i in range(grid.total())}
        assert len(seen) == grid.total()
        assert all(0 <= r < 5 and 0 <= c < 7 for r, c in seen)

    @pytest.mark.parametrize("rows,cols,patch", [(0, 1, 1), (1, 0, 1), (1, 1, 0), (-2, 3, 1)])
    def test_rejects_non_positive_dims(self, rows, cols, patch):
        with pytest.raises(ConfigError):
            TokenGrid(rows, cols, patch)


class TestScoreVector:
    def test_length_must_match_grid(self):
        with pytest.raises(ShapeError):
            ScoreVector(np.zeros(3), TokenGrid(2, 2, 1))

    def test_rejects_non_finite(self):
        with pytest.raises(DataError):
            ScoreVector(np.array([0.0, np.nan]), TokenGrid(1, 2, 1))
        with pytest.raises(DataError):
            ScoreVector(np.array([0.0, np.inf]), TokenGrid(1, 2, 1))

    def test_values_are_immutable(self):
        v = vec([1.0, 2.0])
        with pytest.raises(ValueError):
            v.values[0] = 5.0


class TestIndexSet:
    def test_requires_strictly_increasing(self):
        grid = TokenGrid(2, 2, 1)
        with pytest.raises(DataError):
            IndexSet((1, 1), grid)
        with pytest.raises(DataError):
            IndexSet((2, 1), grid)

    def test_rejects_out_of_range(self):
        with pytest.raises(DataError):
            IndexSet((0, 4), TokenGrid(2, 2, 1))

    def test_from_mask_roundtrip(self):
        grid = TokenGrid(2, 3, 1)
        mask = BinaryMask(np.array([1, 0, 1, 0, 0, 1], dtype=bool), grid)
        assert IndexSet.from_mask(mask).indices == (0, 2, 5)


class TestMinMaxNormalize:
    def test_affine_rescale(self):
        assert minmax_normalize(vec([0, 2, 4])).values.tolist() == [0.0, 0.5, 1.0]

    def test_degenerate_range_maps_to_zero(self):
        assert minmax_normalize(vec([5, 5, 5])).values.tolist() == [0.0, 0.0, 0.0]

    def test_idempotent_on_full_range_input(self):
        assert minmax_normalize(vec([0, 0.25, 1])).values.tolist() == [0.0, 0.25, 1.0]

    def test_rejects_non_finite_via_container(self):
        with pytest.raises(DataError):
            vec([1.0, float("nan")])

    @settings(max_examples=100)
    @given(st.lists(finite_floats, min_size=1, max_size=64))
    def test_idempotence(self, values):
        once = minmax_normalize(vec(values))
        twice = minmax_normalize(once)
        assert np.allclose(once.values, twice.values, atol=1e-12)

    @settings(max_examples=100)
    @given(
        st.lists(finite_floats, min_size=2, max_size=64),
        st.floats(min_value=1e-3, max_value=1e3),
        st.floats(min_value=-1e3, max_value=1e3),
    )
    def test_invariant_under_positive_affine_transform(self, values, a, b):
        base = minmax_normalize(vec(values))
        transformed = minmax_normalize(vec([a * v + b for v in values]))
        assert np.allclose(base.values, transformed.values, atol=1e-9)

    @settings(max_examples=100)
    @given(st.lists(finite_floats, min_size=1, max_size=64))
    def test_output_in_unit_interval(self, values):
        out = minmax_normalize(vec(values)).values
        assert out.min() >= 0.0 and out.max() <= 1.0


class TestMeanStd:
    def test_symmetric_two_values(self):
        assert mean_std(vec([0, 0, 1, 1])) == (0.5, 0.5)

    def test_constant_vector(self):
        mean, std = mean_std(vec([3.5, 3.5, 3.5]))
        assert mean == 3.5 and std == 0.0

    def test_population_divisor(self):
        mean, std = mean_std(vec([1, 2, 3, 4]))
        assert mean == 2.5
        assert std == pytest.approx(math.sqrt(1.25), abs=1e-12)

    @settings(max_examples=100)
    @given(
        st.lists(finite_floats, min_size=1, max_size=64),
        st.floats(min_value=-1e3, max_value=1e3),
    )
    def test_shift_moves_mean_not_std(self, values, shift):
        mean0, std0 = mean_std(vec(values))
        mean1, std1 = mean_std(vec([v + shift for v in values]))
        assert mean1 == pytest.approx(mean0 + shift, abs=1e-6)
        assert std1 == pytest.approx(std0, abs=1e-6)


class TestGridReshape:
    def test_2x2_roundtrip(self):
        grid = TokenGrid(2, 2, 1)
        v = ScoreVector(np.array([1.0, 2.0, 3.0, 4.0]), grid)
        assert grid_reshape_roundtrip(v).values.tolist() == [1.0, 2.0, 3.0, 4.0]

    def test_single_row(self):
        grid = TokenGrid(1, 4, 1)
        v = ScoreVector(np.array([9.0, 8.0, 7.0, 6.0]), grid)
        assert grid_reshape_roundtrip(v).values.tolist() == [9.0, 8.0, 7.0, 6.0]

    def test_row_major_layout(self):
        grid = TokenGrid(3, 2, 1)
        v = ScoreVector(np.arange(6, dtype=float), grid)
        assert v.as_grid()[1, 0] == v.values[2]
