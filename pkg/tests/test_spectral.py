"""Asymptotic weight enumerator: check exponents, reductions, crossings."""

import math

import numpy as np
import pytest

from protoldpc.oracle import check_exponent_exact
from protoldpc.protograph import Protograph
from protoldpc.spectral import (
    STATUS_NO_CROSSING,
    STATUS_OK,
    SpectralOptions,
    build_check_system,
    check_enumerator,
    conv_bound,
    growth_rate,
    spectral_shape,
    _detect_plateau,
)
from protoldpc.unwrap import TrivialCutError

REGULAR_36 = Protograph(name="regular_3_6", base=np.ones((3, 6), dtype=np.int64))
ARJA = Protograph(
    name="arja",
    base=np.array([[1, 2, 0, 0, 0], [0, 3, 1, 1, 1], [0, 1, 2, 2, 1]], dtype=np.int64),
    punctured=(1,),
)


def _entropy(t):
    return -(t * math.log(t) + (1 - t) * math.log(1 - t))


def test_options_validate_normalization():
    with pytest.raises(ValueError):
        SpectralOptions(normalization="per_edge")


def test_check_enumerator_degenerate_cases():
    a0, _ = check_enumerator(np.zeros(4), parity=0)
    assert a0 == 0.0
    a1, _ = check_enumerator(np.zeros(4), parity=1)
    assert a1 == -math.inf
    # single effective edge cannot have even overlap at a nonzero fraction
    a, _ = check_enumerator(np.array([0.3]), parity=0)
    assert a == -math.inf
    a, _ = check_enumerator(np.array([0.3]), parity=1)
    assert a == pytest.approx(_entropy(0.3), rel=1e-12)


def test_check_enumerator_two_edges():
    a, t = check_enumerator(np.array([0.2, 0.2]), parity=0)
    assert a == pytest.approx(_entropy(0.2), rel=1e-10)
    assert t[0] == pytest.approx(0.25, rel=1e-9)
    a, _ = check_enumerator(np.array([0.2, 0.4]), parity=0)
    assert a == -math.inf
    a, _ = check_enumerator(np.array([0.3, 0.7]), parity=1)
    assert a == pytest.approx(_entropy(0.3), rel=1e-10)


def test_check_enumerator_boundary_edge_flips_parity():
    a, t = check_enumerator(np.array([1.0, 0.3, 0.7]), parity=0)
    assert a == pytest.approx(_entropy(0.3), rel=1e-10)
    assert t[0] == math.inf


def test_check_enumerator_symmetric_half():
    # marginals 1/2 admit the uniform even-pattern distribution
    a, _ = check_enumerator(np.full(3, 0.5), parity=0)
    assert a == pytest.approx(math.log(4.0), rel=1e-9)


@pytest.mark.parametrize(
    "x",
    [
        (0.2, 0.3, 0.4),
        (0.1, 0.1, 0.1),
        (0.05, 0.2, 0.15, 0.3, 0.1),
    ],
)
def test_check_enumerator_matches_exact_count_exponent(x):
    N = 400
    weights = tuple(int(round(xi * N)) for xi in x)
    exact = check_exponent_exact(N, weights)
    a, _ = check_enumerator(np.asarray(x), parity=0)
    # finite-N exponent carries polynomial corrections of order log(N)/N
    assert a == pytest.approx(exact, abs=0.05)
    assert a >= exact - 1e-12


def test_check_enumerator_gradient_is_saddle_point():
    x = np.array([0.1, 0.2, 0.15, 0.05])
    a, t = check_enumerator(x, parity=0)
    h = 1e-6
    for i in range(4):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        ap, _ = check_enumerator(xp, parity=0)
        am, _ = check_enumerator(xm, parity=0)
        assert (ap - am) / (2 * h) == pytest.approx(-math.log(t[i]), abs=1e-5)


def test_check_enumerator_validates_input():
    with pytest.raises(ValueError):
        check_enumerator(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        check_enumerator(np.array([0.2, 1.3]))


def test_check_system_regular():
    system = build_check_system(REGULAR_36)
    assert system.n_classes == 6
    assert system.n_pinned == 0
    assert all(len(m) == 1 for m in system.members)
    assert system.tx_weight.tolist() == [1.0] * 6
    assert system.h_coef.tolist() == [-2.0] * 6
    assert len(system.groups) == 1
    assert system.groups[0].degree == 6
    assert system.norm_len == 6


def test_check_system_pins_and_merges():
    proto = Protograph(name="cascade", base=np.array([[1, 1, 1], [1, 0, 0]]))
    system = build_check_system(proto)
    assert system.n_pinned == 1
    assert system.n_classes == 1
    assert system.members == ((1, 2),)
    assert not system.groups
    assert system.h_coef.tolist() == [1.0]


def test_check_system_transmitted_normalization():
    full = build_check_system(ARJA, "full")
    tx = build_check_system(ARJA, "transmitted")
    assert full.norm_len == 5
    assert tx.norm_len == 4
    assert tx.tx_weight.tolist() == [1.0, 0.0, 1.0, 1.0, 1.0]


def test_growth_rate_regular_36_reference():
    result = growth_rate(REGULAR_36)
    assert result.status == STATUS_OK
    assert result.delta_min == pytest.approx(0.0227265625, abs=2.5e-5)
    lo, hi = result.curve.bracket
    assert hi - lo <= SpectralOptions().bisect_tol + 1e-12
    assert result.crossing_profile is not None
    assert len(result.crossing_profile) == 6
    assert all(v > 0 for v in result.crossing_profile)
    assert result.curve.negativity_certificate  # r < 0 below the crossing
    payload = result.to_json()
    assert payload["delta_min"] == result.delta_min
    assert payload["status"] == "ok"


def test_growth_rate_reports_missing_crossing():
    result = growth_rate(REGULAR_36, SpectralOptions(delta_stop=0.01))
    assert result.status == STATUS_NO_CROSSING
    assert result.delta_min is None
    assert result.curve.bracket is None


def test_spectral_shape_sign_change_around_crossing():
    assert spectral_shape(REGULAR_36, 0.015) < 0
    assert spectral_shape(REGULAR_36, 0.035) > 0


def test_conv_bound_lambda_one_is_the_block_ensemble():
    curve = conv_bound(REGULAR_36, 1)
    assert curve.lambdas == (1,)
    assert curve.statuses == (STATUS_OK,)
    assert curve.bounds[0] == pytest.approx(0.0227265625, abs=2.5e-5)
    payload = curve.to_json()
    assert payload["expand_factor"] is None
    assert payload["lambdas"] == [1]


def test_conv_bound_requires_expansion_for_trivial_cuts():
    with pytest.raises(TrivialCutError, match=r"gcd\(3, 5\) = 1"):
        conv_bound(ARJA, 2)
    with pytest.raises(ValueError):
        conv_bound(REGULAR_36, 0)


def test_plateau_detector():
    lambdas = (1, 2, 3, 4, 5)
    rising = [0.1, 0.2, 0.3, 0.4, 0.5]
    assert _detect_plateau(lambdas, rising, 1e-3) == (None, None)
    flat = [0.1, 0.2, 0.2004, 0.2006, 0.2005]
    onset, value = _detect_plateau(lambdas, flat, 1e-3)
    assert onset == 2
    assert value == 0.2005
    gappy = [0.1, None, 0.2, 0.2, 0.2]
    onset, value = _detect_plateau(lambdas, gappy, 1e-3)
    assert onset == 3
