import itertools
import math

import pytest
from hypothesis import given, strategies as st

from trex.bits import BitString
from trex.designs import (
    C_DESIGN,
    DesignFamily,
    default_intersection,
    make_design,
    slice_seed,
    verify_design,
)

# Shared with the acceptance suite.
GRID = [
    (1, 5, 1), (2, 2, 1), (16, 8, 4), (4, 4, 2), (8, 6, 3),
    (16, 10, None), (32, 12, None), (64, 16, None), (128, 16, None), (256, 16, None),
    (256, 24, None), (256, 32, None), (64, 32, None), (100, 20, None), (200, 30, None),
    (32, 8, 1), (64, 12, 2), (128, 20, 3), (256, 32, 4), (48, 32, 8),
]


def independent_check(d):
    """Straight pairwise recount, separate from verify_design."""
    for s in d.sets:
        if len(set(s)) != d.l or min(s) < 0 or max(s) >= d.t:
            return False
    return all(len(set(a) & set(b)) <= d.r for a, b in itertools.combinations(d.sets, 2))


def test_examples():
    d = make_design(1, 5, 1)
    assert d.sets == ((0, 1, 2, 3, 4),) and d.t == 5
    d = make_design(2, 2, 1)
    assert d.t <= 4 and independent_check(d)
    d = make_design(16, 8, 4)
    assert verify_design(d) and independent_check(d)
    assert d.t <= C_DESIGN * 16


def test_verify_design_rejects():
    assert not verify_design(DesignFamily(4, 2, 1, ((0, 1), (0, 1))))
    assert not verify_design(DesignFamily(4, 2, 1, ((0, 1), (2, 4))))
    assert not verify_design(DesignFamily(4, 2, 1, ((0, 0), (2, 3))))
    assert verify_design(DesignFamily(3, 2, 1, ((0, 1), (1, 2), (0, 2))))


def test_errors():
    with pytest.raises(ValueError):
        make_design(4, 3, 4)
    with pytest.raises(ValueError):
        make_design(0, 3, 1)
    with pytest.raises(ValueError):
        make_design(4, 3, 0)


def test_default_intersection():
    assert [default_intersection(m) for m in (1, 2, 3, 4, 5, 256, 257)] == [1, 1, 2, 2, 3, 8, 9]


@pytest.mark.parametrize("m,l,r", GRID)
def test_published_constant_covers_grid(m, l, r):
    d = make_design(m, l, r)
    assert d.m == m and d.l == l
    assert independent_check(d)
    assert d.t <= C_DESIGN * math.ceil(l * l / d.r)


def test_deterministic_and_json_roundtrip():
    a, b = make_design(40, 12, 3), make_design(40, 12, 3)
    assert a == b
    assert DesignFamily.from_dict(a.to_dict()) == a


@pytest.mark.parametrize("l,r", [(8, 2), (8, 3), (12, 2), (10, 1)])
def test_t_non_decreasing_in_m(l, r):
    ts = [make_design(m, l, r).t for m in range(1, 41)]
    assert all(a <= b for a, b in zip(ts, ts[1:]))
    assert all(t <= C_DESIGN * math.ceil(l * l / r) for t in ts[1:])


def test_slice_seed_examples():
    y = BitString.from_str("10110")
    assert str(slice_seed(y, (0, 2, 4))) == "110"
    assert slice_seed(BitString.zeros(9), (1, 4, 6)) == BitString.zeros(3)
    assert slice_seed(y, (0, 1, 2)) == BitString.from_str("101")
    assert str(slice_seed(y, (4, 0, 2))) == "110"  # order of s does not matter


def test_slice_seed_errors():
    with pytest.raises(ValueError):
        slice_seed(BitString(0, 4), (0, 1), t=5)
    with pytest.raises(ValueError):
        slice_seed(BitString(0, 4), (0, 4))


@given(st.integers(0, 2**12 - 1), st.sets(st.integers(0, 11), min_size=1))
def test_slice_seed_reads_listed_bits(v, idx):
    y = BitString(v, 12)
    out = slice_seed(y, sorted(idx))
    assert list(out.bits) == [y[i] for i in sorted(idx)]
