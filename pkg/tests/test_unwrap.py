"""Cutting protographs and reassembling tail-biting / windowed forms."""

import numpy as np
import pytest

from protoldpc import (
    Protograph,
    TrivialCutError,
    conv_window,
    cut,
    derived_params,
    tailbite,
    terminate,
)

REGULAR_36 = Protograph(name="regular_3_6", base=np.ones((3, 6), dtype=np.int64))
ARJA = Protograph(
    name="arja",
    base=np.array([[1, 2, 0, 0, 0], [0, 3, 1, 1, 1], [0, 1, 2, 2, 1]]),
    punctured=(1,),
)


def test_cut_partitions_the_base():
    unwrapping = cut(REGULAR_36)
    assert unwrapping.y == 3
    assert np.array_equal(unwrapping.lower + unwrapping.upper, REGULAR_36.base)
    # block grid: 1-row x 2-column blocks; lower keeps blocks i >= j
    expected_lower = np.array(
        [[1, 1, 0, 0, 0, 0], [1, 1, 1, 1, 0, 0], [1, 1, 1, 1, 1, 1]]
    )
    assert np.array_equal(unwrapping.lower, expected_lower)
    assert np.array_equal(unwrapping.upper, REGULAR_36.base - expected_lower)


def test_cut_block_triangularity_is_general():
    rng = np.random.default_rng(3)
    base = rng.integers(0, 3, size=(4, 6))
    base[base.sum(axis=1) == 0, 0] += 1
    base[:, base.sum(axis=0) == 0] += 1
    proto = Protograph(name="random", base=base)
    unwrapping = cut(proto)
    y = unwrapping.y
    rb, cb = proto.n_c // y, proto.n_v // y
    for i in range(y):
        for j in range(y):
            lower_block = unwrapping.lower[i * rb : (i + 1) * rb, j * cb : (j + 1) * cb]
            upper_block = unwrapping.upper[i * rb : (i + 1) * rb, j * cb : (j + 1) * cb]
            if i >= j:
                assert not upper_block.any()
            else:
                assert not lower_block.any()


def test_trivial_cut_raises_with_gcd_in_message():
    with pytest.raises(TrivialCutError, match=r"gcd\(3, 5\) = 1"):
        cut(ARJA)


def test_tailbite_lambda_1_restores_the_protograph():
    unwrapping = cut(REGULAR_36)
    tb = tailbite(unwrapping, 1)
    assert np.array_equal(tb.base, REGULAR_36.base)
    assert tb.punctured == REGULAR_36.punctured


def test_tailbite_structure_and_wrap():
    unwrapping = cut(REGULAR_36)
    lam = 3
    tb = tailbite(unwrapping, lam)
    assert tb.base.shape == (3 * lam, 6 * lam)
    n_c, n_v = 3, 6
    for t in range(lam):
        rows = slice(t * n_c, (t + 1) * n_c)
        diag = tb.base[rows, t * n_v : (t + 1) * n_v]
        wrap = tb.base[rows, ((t - 1) % lam) * n_v : ((t - 1) % lam + 1) * n_v]
        assert np.array_equal(diag, unwrapping.lower)
        assert np.array_equal(wrap, unwrapping.upper)
    # every variable keeps its block degree
    assert set(tb.base.sum(axis=0)) == {3}


def test_tailbite_propagates_puncturing():
    from protoldpc import expand

    unwrapping = cut(expand(ARJA, 2, seed=0))
    tb = tailbite(unwrapping, 3)
    n_v = 10
    expected = {t * n_v + v for t in range(3) for v in (1, 6)}
    assert tb.punctured == expected


def test_terminate_band_structure():
    unwrapping = cut(REGULAR_36)
    win = terminate(unwrapping, 2)
    # 3 block-rows of checks, minus the all-zero leading row of P_u
    assert win.base.shape == (8, 12)
    n_c, n_v = 3, 6
    assert np.array_equal(win.base[:n_c, :n_v], unwrapping.lower)
    # every period keeps the full base column degrees: the trailing
    # block-row terminates the band instead of truncating it
    assert np.array_equal(
        win.base.sum(axis=0), np.tile(REGULAR_36.base.sum(axis=0), 2)
    )
    assert not any(row.sum() == 0 for row in win.base)


def test_terminate_propagates_puncturing():
    proto = Protograph(
        name="punct", base=np.array([[2, 1, 0, 1], [0, 1, 2, 1]]), punctured=(0,)
    )
    win = terminate(cut(proto), 3)
    assert win.punctured == {0, 4, 8}
    assert np.array_equal(win.base.sum(axis=0), np.tile(proto.base.sum(axis=0), 3))


def test_terminate_rejects_bad_window_length():
    with pytest.raises(ValueError):
        terminate(cut(REGULAR_36), 0)


def test_conv_window_band():
    unwrapping = cut(REGULAR_36)
    window = conv_window(unwrapping, 4)
    assert window.matrix.shape == (12, 24)
    n_c, n_v = 3, 6
    for t in range(4):
        rows = slice(t * n_c, (t + 1) * n_c)
        assert np.array_equal(
            window.matrix[rows, t * n_v : (t + 1) * n_v], unwrapping.lower
        )
        if t:
            assert np.array_equal(
                window.matrix[rows, (t - 1) * n_v : t * n_v], unwrapping.upper
            )


def test_derived_params():
    unwrapping = cut(REGULAR_36)
    assert derived_params(unwrapping, N=1, lam=1) == (6, 3, 2)
    assert derived_params(unwrapping, N=500, lam=8) == (3000, 24, 2)
    with pytest.raises(ValueError):
        derived_params(unwrapping, N=0, lam=1)


def test_degenerate_band_has_zero_memory():
    # block-diagonal protograph: everything lands in the lower part
    proto = Protograph(name="diag", base=np.array([[2, 2, 0, 0], [0, 0, 2, 2]]))
    unwrapping = cut(proto)
    assert not unwrapping.upper.any()
    assert derived_params(unwrapping, N=2, lam=1)[2] == 0
