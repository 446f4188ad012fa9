import numpy as np
from hypothesis import given, strategies as st

from beurling.rng import MASK64, Xoshiro256, mix, splitmix64


def test_splitmix64_reference_value_from_zero_state():
    state, out = splitmix64(0)
    assert state == 0x9E3779B97F4A7C15
    assert out == 0xE220A8397B1DCDAF


def test_xoshiro_first_outputs_from_small_state():
    # hand evaluation: rotl(5 * 2, 7) * 9 = 11520 for state (1, 2, 3, 4)
    g = Xoshiro256(0)
    g._s = [1, 2, 3, 4]
    assert g.next_u64() == 11520
    assert g.next_u64() == 0


def test_same_seed_same_stream():
    a, b = Xoshiro256(42), Xoshiro256(42)
    assert [a.next_u64() for _ in range(20)] == [b.next_u64() for _ in range(20)]


def test_mix_is_splitmix_sequence():
    state = 7
    outs = []
    for _ in range(5):
        state, out = splitmix64(state)
        outs.append(out)
    assert outs == [mix(7, i) for i in range(5)]


@given(st.integers(0, MASK64), st.integers(0, 1000))
def test_mix_stays_in_64_bits(master, i):
    assert 0 <= mix(master, i) <= MASK64


def test_random_in_unit_interval_and_integers_inclusive():
    g = Xoshiro256(3)
    x = g.random_array(2000)
    assert np.all((0 <= x) & (x < 1))
    k = Xoshiro256(3).integers(-2, 2, 2000)
    assert set(k.tolist()) == {-2, -1, 0, 1, 2}


def test_complex_unit_disk_modulus():
    z = Xoshiro256(9).complex_unit_disk(500)
    assert np.all(np.abs(z) < 1)
