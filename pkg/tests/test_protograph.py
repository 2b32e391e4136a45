"""Protograph model: loading, validation, degrees, rates, expansion."""

import json
from fractions import Fraction

import numpy as np
import pytest

from protoldpc import (
    Protograph,
    ProtographError,
    degree_profile,
    expand,
    load_protograph,
    rates,
    save_protograph,
)

REGULAR_36 = {"name": "regular_3_6", "base": [[1] * 6] * 3}


def test_load_from_dict():
    proto = load_protograph(REGULAR_36)
    assert proto.name == "regular_3_6"
    assert proto.n_c == 3 and proto.n_v == 6
    assert proto.punctured == frozenset()
    assert proto.edge_count == 18


def test_load_from_json_string():
    proto = load_protograph(json.dumps(REGULAR_36))
    assert proto == Protograph(name="regular_3_6", base=np.ones((3, 6), int))


def test_round_trip_via_file(tmp_path):
    proto = Protograph(
        name="punctured", base=np.array([[1, 2, 1], [0, 1, 1]]), punctured=(1,)
    )
    path = tmp_path / "p.json"
    save_protograph(proto, path)
    assert load_protograph(path) == proto


def test_unknown_fields_ignored():
    doc = dict(REGULAR_36, comment="anything", source="fig")
    assert load_protograph(doc).n_v == 6


@pytest.mark.parametrize(
    "doc",
    [
        {"base": [[1, 1]]},
        {"name": "x"},
        {"name": "x", "base": []},
        {"name": "x", "base": [[1, 1], [1]]},
        {"name": "x", "base": [[1, 1.5]]},
        {"name": "x", "base": [[1, True]]},
        {"name": "x", "base": [[1, 1]], "punctured": 3},
    ],
)
def test_malformed_documents_rejected(doc):
    with pytest.raises(ProtographError):
        load_protograph(doc)


def test_invalid_matrices_rejected():
    with pytest.raises(ProtographError, match="negative"):
        Protograph(name="x", base=np.array([[1, -1, 1]]))
    with pytest.raises(ProtographError, match="isolated check"):
        Protograph(name="x", base=np.array([[1, 1, 1], [0, 0, 0]]))
    with pytest.raises(ProtographError, match="isolated variable"):
        Protograph(name="x", base=np.array([[1, 0, 1], [1, 0, 1]]))
    with pytest.raises(ProtographError, match="n_c < n_v"):
        Protograph(name="x", base=np.array([[1, 1], [1, 1]]))
    with pytest.raises(ProtographError, match="out of range"):
        Protograph(name="x", base=np.array([[1, 1, 1]]), punctured=(5,))
    with pytest.raises(ProtographError, match="transmitted"):
        Protograph(name="x", base=np.array([[1, 1]]), punctured=(0, 1))


def test_base_is_read_only():
    proto = load_protograph(REGULAR_36)
    with pytest.raises(ValueError):
        proto.base[0, 0] = 9


def test_degree_profile_regular():
    profile = degree_profile(load_protograph(REGULAR_36))
    assert profile.variable_degrees == (3,) * 6
    assert profile.check_degrees == (6,) * 3
    assert profile.regular_JK == (3, 6)
    assert profile.edge_count == 18


def test_degree_profile_irregular():
    proto = Protograph(name="rja", base=np.array([[3, 1, 1, 1], [1, 2, 2, 1]]))
    profile = degree_profile(proto)
    assert profile.variable_degrees == (4, 3, 3, 2)
    assert profile.check_degrees == (6, 6)
    assert profile.regular_JK is None


def test_rates_with_puncturing():
    proto = Protograph(
        name="arja",
        base=np.array([[1, 2, 0, 0, 0], [0, 3, 1, 1, 1], [0, 1, 2, 2, 1]]),
        punctured=(1,),
    )
    design, transmitted = rates(proto)
    assert design == Fraction(2, 5)
    assert transmitted == Fraction(1, 2)
    assert proto.transmitted == (0, 2, 3, 4)
    assert proto.m == 4


def test_expand_shape_and_degrees():
    proto = Protograph(name="rja", base=np.array([[3, 1, 1, 1], [1, 2, 2, 1]]))
    big = expand(proto, 2, seed=5)
    assert big.base.shape == (4, 8)
    # every entry b becomes an M x M block with row and column sums b,
    # spread over the copy-major grid (copy j of (c, v) at row j*2+c,
    # column j*4+v)
    for c in range(2):
        for v in range(4):
            block = big.base[np.ix_([c, 2 + c], [v, 4 + v])]
            b = proto.base[c, v]
            assert list(block.sum(axis=0)) == [b, b]
            assert list(block.sum(axis=1)) == [b, b]


def test_expand_preserves_puncturing_and_determinism():
    proto = Protograph(
        name="arja",
        base=np.array([[1, 2, 0, 0, 0], [0, 3, 1, 1, 1], [0, 1, 2, 2, 1]]),
        punctured=(1,),
    )
    a = expand(proto, 2, seed=0)
    b = expand(proto, 2, seed=0)
    assert np.array_equal(a.base, b.base)
    assert a.punctured == {1, 6}


def test_expand_seed_changes_draws():
    proto = load_protograph(REGULAR_36)
    a = expand(proto, 4, seed=0)
    b = expand(proto, 4, seed=1)
    assert not np.array_equal(a.base, b.base)


def test_expand_identity_for_m1():
    proto = load_protograph(REGULAR_36)
    assert expand(proto, 1, seed=0) is proto
