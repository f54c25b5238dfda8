import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochastic_spacetime.core import ParameterDomainError
from stochastic_spacetime.rng import RngStream, coin, philox_block, uniform_array

U64 = st.integers(0, 2**64 - 1)

# Known-answer vectors for Philox4x32-10.  Counter words are
# (counter lo, counter hi, stream lo, stream hi); key words (seed lo, seed hi).
KAT = [
    ((0, 0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
    ((2**64 - 1, 2**64 - 1, 2**64 - 1), (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
    (
        (0x299F31D0A4093822, 0x0370734413198A2E, 0x85A308D3243F6A88),
        (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1),
    ),
]


@pytest.mark.parametrize("args,expected", KAT)
def test_philox_known_answers(args, expected):
    assert philox_block(*args) == expected


@given(U64, U64, st.integers(0, 2**40))
def test_streams_replay(seed, stream, counter):
    r = RngStream(seed, stream, counter)
    a, r2 = r.uniforms(5)
    b, _ = r.uniforms(5)
    np.testing.assert_array_equal(a, b)
    assert r2.counter == (counter + 5) % 2**64


@given(U64, st.integers(0, 2**32), st.integers(1, 50))
def test_uniforms_in_unit_interval_and_addressable(seed, stream, n):
    r = RngStream(seed, stream)
    u, _ = r.uniforms(n)
    assert np.all((u >= 0) & (u < 1))
    # draw j of a stream is the same whether taken alone or in a batch
    np.testing.assert_array_equal(u[-1:], uniform_array(seed, stream, [n - 1]))


def test_normals_moments():
    x, nxt = RngStream(11).normals(200_001)
    assert nxt.counter == 100_001
    assert abs(x.mean()) < 0.01
    assert abs(x.var() - 1) < 0.01


def test_distinct_streams_differ():
    a, _ = RngStream(1, 0).uniforms(8)
    b, _ = RngStream(1, 1).uniforms(8)
    c, _ = RngStream(2, 0).uniforms(8)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)


def test_coin_frequency_and_edges():
    r = RngStream(3)
    heads = 0
    for _ in range(20_000):
        h, r = coin(r, 0.3)
        heads += h
    assert abs(heads / 20_000 - 0.3) < 0.015
    assert coin(RngStream(0), 1.0)[0] and not coin(RngStream(0), 0.0)[0]
    with pytest.raises(ParameterDomainError):
        coin(RngStream(0), 1.5)


def test_out_of_range_ids_rejected():
    with pytest.raises(ParameterDomainError):
        RngStream(-1)
    with pytest.raises(ParameterDomainError):
        RngStream(0, 2**64)


def test_adjacent_streams_uncorrelated():
    n = 100_000
    a, _ = RngStream(21, 5).uniforms(n)
    for other in (6, 5 + (1 << 32), 2**63 + 5):
        b, _ = RngStream(21, other).uniforms(n)
        for lag in (0, 1, 7):
            r = np.corrcoef(a[lag:], b[: n - lag])[0, 1]
            assert abs(r) < 5 / np.sqrt(n)
