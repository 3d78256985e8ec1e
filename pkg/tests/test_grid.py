import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mmreg.errors import GridError
from mmreg.grid import (
    Displacement,
    Grid,
    WrapIndex,
    circular_shift,
    from_signed_lag,
    make_grid,
    to_signed_lag,
)


def test_singleton():
    g = make_grid(1, 1, [5.0])
    assert g.width == g.height == 1
    assert g.at(0, 0) == 5.0


def test_row_major_layout():
    g = make_grid(2, 2, [1, 2, 3, 4])
    assert g.at(1, 0) == 2
    assert g.at(0, 1) == 3


def test_length_mismatch():
    with pytest.raises(GridError):
        make_grid(2, 2, [1, 2, 3])


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite_rejected(bad):
    with pytest.raises(GridError):
        make_grid(2, 1, [0.0, bad])


def test_grid_is_read_only():
    g = make_grid(2, 2, [1, 2, 3, 4])
    with pytest.raises(ValueError):
        g.values[0, 0] = 9


def test_grid_copies_input():
    a = np.zeros((2, 2))
    g = Grid(a)
    a[0, 0] = 1
    assert g.at(0, 0) == 0


def test_shift_identity_and_period():
    g = make_grid(3, 2, range(6))
    assert circular_shift(g, 0, 0) == g
    assert circular_shift(g, 3, 2) == g


def test_shift_hand_example():
    g = make_grid(2, 2, [1, 2, 3, 4])
    assert circular_shift(g, 1, 0).ravel() == [2, 1, 4, 3]


def test_shift_moves_content_forward():
    g = make_grid(5, 4, np.arange(20.0))
    s = circular_shift(g, 2, 1)
    for y in range(4):
        for x in range(5):
            assert s.at(x, y) == g.at((x - 2) % 5, (y - 1) % 4)


@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.floats(-1e6, 1e6)),
       st.integers(-20, 20), st.integers(-20, 20))
def test_shift_round_trip(values, a, b):
    g = Grid(values)
    assert circular_shift(circular_shift(g, a, b), -a, -b) == g


@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_bit_preservation(values):
    g = make_grid(values.shape[1], values.shape[0], values.ravel().tolist())
    assert np.array_equal(g.values.view(np.uint64), values.view(np.uint64))


@pytest.mark.parametrize("idx, expected", [((0, 0), (0, 0)), ((120, 2), (-8, 2)), ((64, 64), (64, 64))])
def test_signed_lag_examples(idx, expected):
    assert to_signed_lag(WrapIndex(*idx), 128, 128) == expected


@pytest.mark.parametrize("idx", [(128, 0), (0, -1), (0, 128)])
def test_signed_lag_out_of_range(idx):
    with pytest.raises(GridError):
        to_signed_lag(WrapIndex(*idx), 128, 128)


@given(st.integers(1, 40), st.integers(1, 40), st.data())
def test_signed_lag_bijection(w, h, data):
    ix = data.draw(st.integers(0, w - 1))
    iy = data.draw(st.integers(0, h - 1))
    lx, ly = to_signed_lag(WrapIndex(ix, iy), w, h)
    assert -w / 2 < lx <= w / 2 and -h / 2 < ly <= h / 2
    assert from_signed_lag(lx, ly, w, h) == (ix, iy)


def test_signed_lag_image_is_injective():
    images = {to_signed_lag(WrapIndex(ix, iy), 7, 6) for ix in range(7) for iy in range(6)}
    assert len(images) == 42


def test_displacement_rejects_non_finite():
    with pytest.raises(GridError):
        Displacement(math.nan, 0.0)


def test_displacement_arithmetic():
    d = Displacement(0.5, -1.0) - Displacement(0.25, 1.0)
    assert tuple(d) == (0.25, -2.0)
    assert (-d).dx == -0.25
