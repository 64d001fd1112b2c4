import pytest
from hypothesis import given
from hypothesis import strategies as st

from rendezvous.labels import effective_bit, modified_label


@pytest.mark.parametrize("x, bits", [(5, "11001101"), (1, "1101"), (2, "110001"), (4, "11000001")])
def test_modified_label(x, bits):
    assert str(modified_label(x)) == bits


def test_domain():
    with pytest.raises(ValueError):
        modified_label(0)


def test_effective_bit():
    assert effective_bit(modified_label(5), 1) == 1
    assert effective_bit(modified_label(5), 9) == 0
    assert effective_bit(modified_label(2), 3) == 0
    with pytest.raises(ValueError):
        effective_bit(modified_label(2), 0)


@given(st.integers(1, 2**40))
def test_shape(x):
    m = modified_label(x)
    assert m.s == 2 * x.bit_length() + 2
    assert m.bits[:2] == (1, 1) and m.bits[-2:] == (0, 1)
    assert all(effective_bit(m, i) == 0 for i in range(m.s + 1, m.s + 5))


@given(st.integers(1, 2**20), st.integers(1, 2**20))
def test_prefix_free(x, y):
    if x == y:
        return
    a, b = str(modified_label(x)), str(modified_label(y))
    assert a != b
    assert not b.startswith(a)
