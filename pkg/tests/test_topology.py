import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypersum.errors import NotPowerOfTwo, StageOutOfRange, TooFew
from hypersum.topology import Config, bits, dimension_count, hamming_distance, peer_index, subcube


@pytest.mark.parametrize("n, d", [(2, 1), (4, 2), (8, 3), (128, 7), (2**20, 20)])
def test_dimension_count(n, d):
    assert dimension_count(n) == d


@pytest.mark.parametrize("n", [3, 6, 12, 100])
def test_dimension_count_rejects_non_powers(n):
    with pytest.raises(NotPowerOfTwo):
        dimension_count(n)


@pytest.mark.parametrize("n", [0, 1, -4])
def test_dimension_count_too_few(n):
    with pytest.raises(TooFew):
        dimension_count(n)


def _xor_table(u, t, d, config):
    # brute force: flip the designated character of the bit string
    s = list(bits(u, d))
    pos = d - 1 - (t if config is Config.A else d - t - 1)
    s[pos] = "1" if s[pos] == "0" else "0"
    return int("".join(s), 2)


@pytest.mark.parametrize(
    "u, t, d, config, expected",
    [
        (0, 0, 3, Config.A, 1),
        (0, 0, 3, Config.B, 4),
        (5, 1, 3, Config.A, 7),
        (1, 2, 3, Config.A, 5),
    ],
)
def test_peer_index_examples(u, t, d, config, expected):
    assert peer_index(u, t, d, config) == expected
    assert _xor_table(u, t, d, config) == expected


def test_peer_index_matches_string_flip_everywhere():
    for d in range(1, 7):
        for t in range(d):
            for u in range(1 << d):
                for config in Config:
                    assert peer_index(u, t, d, config) == _xor_table(u, t, d, config)


@pytest.mark.parametrize("t", [-1, 3, 10])
def test_stage_out_of_range(t):
    with pytest.raises(StageOutOfRange):
        peer_index(0, t, 3, Config.A)


def test_party_out_of_range():
    with pytest.raises(ValueError):
        peer_index(8, 0, 3, Config.A)


@pytest.mark.parametrize("u, v, expected", [(0, 1, 1), (5, 5, 0), (0b101, 0b010, 3)])
def test_hamming_distance(u, v, expected):
    assert hamming_distance(u, v) == expected


@given(st.integers(1, 12).flatmap(lambda d: st.tuples(st.just(d), st.integers(0, d - 1), st.integers(0, 2**d - 1))))
def test_peer_properties(args):
    d, t, u = args
    for config in Config:
        v = peer_index(u, t, d, config)
        assert v != u
        assert peer_index(v, t, d, config) == u
        assert hamming_distance(u, v) == 1


def test_config_b_reverses_the_schedule():
    d = 5
    for t in range(d):
        assert peer_index(0, t, d, Config.B) == peer_index(0, d - t - 1, d, Config.A)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
@pytest.mark.parametrize("config", list(Config))
def test_subcube_grows_to_everyone(d, config):
    for u in range(1 << d):
        for t in range(d):
            members = subcube(u, t, d, config)
            assert len(members) == 2 ** (t + 1)
            assert u in members
        assert subcube(u, d - 1, d, config) == list(range(1 << d))


def test_config_parse():
    assert Config.parse("b") is Config.B
    with pytest.raises(ValueError):
        Config.parse("C")
