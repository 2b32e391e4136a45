"""Channel model, Monte Carlo harness, and reproducibility guarantees."""

import numpy as np
import pytest

from protoldpc.decode import DecoderConfig
from protoldpc.lift import LiftSpec
from protoldpc.protograph import Protograph
from protoldpc.sim import (
    StopRule,
    awgn_llr,
    ber_confidence_interval,
    ber_curve,
    make_block_code,
    make_tailbiting_code,
    noise_sigma,
    random_codeword,
    simulate_stream,
)
from protoldpc.unwrap import cut

REGULAR_36 = Protograph(name="regular_3_6", base=np.ones((3, 6), dtype=np.int64))
ARJA = Protograph(
    name="arja",
    base=np.array([[1, 2, 0, 0, 0], [0, 3, 1, 1, 1], [0, 1, 2, 2, 1]], dtype=np.int64),
    punctured=(1,),
)


def test_noise_sigma_reference_points():
    assert noise_sigma(0.0, 0.5) == pytest.approx(1.0)
    assert noise_sigma(3.0, 0.5) == pytest.approx(10 ** -0.15, rel=1e-12)
    assert noise_sigma(0.0, 1.0) == pytest.approx(np.sqrt(0.5), rel=1e-12)
    with pytest.raises(ValueError):
        noise_sigma(1.0, 0.0)


def test_awgn_llr_is_deterministic_and_sign_correct():
    bits = np.array([0, 1, 0, 1, 1, 0, 0, 1] * 8, dtype=np.uint8)
    a = awgn_llr(bits, 6.0, 0.5, seed=3)
    b = awgn_llr(bits, 6.0, 0.5, seed=3)
    assert (a == b).all()
    assert (awgn_llr(bits, 6.0, 0.5, seed=4) != a).any()
    # at high SNR most LLR signs agree with the transmitted bits
    agree = (a < 0) == bits.astype(bool)
    assert agree.mean() > 0.9


def test_awgn_llr_zeroes_punctured_positions_exactly():
    bits = np.zeros(16, dtype=np.uint8)
    mask = np.zeros(16, dtype=bool)
    mask[3] = mask[11] = True
    llr = awgn_llr(bits, 2.0, 0.5, seed=0, punctured_mask=mask)
    assert llr[3] == 0.0 and llr[11] == 0.0
    assert (llr[~mask] != 0.0).all()


def test_random_codeword_lies_in_the_nullspace():
    H = make_block_code(REGULAR_36, LiftSpec(N=4, seed=7)).H
    word = random_codeword(H, seed=5)
    assert word.any()
    assert (random_codeword(H, seed=5) == word).all()
    assert not (H.to_dense() @ word % 2).any()


def test_wilson_interval_properties():
    lo, hi = ber_confidence_interval(5, 100)
    assert lo == pytest.approx(0.0215428, abs=1e-4)
    assert hi == pytest.approx(0.1117524, abs=1e-4)
    assert ber_confidence_interval(0, 50)[0] == 0.0
    assert ber_confidence_interval(50, 50)[1] == 1.0
    assert ber_confidence_interval(0, 0) == (0.0, 1.0)


def test_block_code_rate_and_mask():
    block = make_block_code(ARJA, LiftSpec(N=4, seed=0))
    assert block.H.rows == 12 and block.H.cols == 20
    assert block.rate == pytest.approx(0.5)
    assert block.n_transmitted == 16
    assert not block.transmitted_mask[4:8].any()
    assert block.descriptor["kind"] == "block"
    assert block.descriptor["punctured"] == [1]


def test_tailbiting_code_assembly():
    code = make_tailbiting_code(cut(REGULAR_36), LiftSpec(N=2, seed=0), lam=2)
    assert code.H.rows == 12 and code.H.cols == 24
    assert code.rate == pytest.approx(0.5)
    assert code.descriptor["kind"] == "tail_biting"
    assert code.descriptor["lambda"] == 2


def _tiny_curve(stop=None, **kwargs):
    code = make_block_code(REGULAR_36, LiftSpec(N=2, seed=0))
    stop = stop or StopRule(min_frame_errors=8, max_frames=512)
    cfg = DecoderConfig(max_iterations=30)
    return ber_curve(code, [1.0, 2.0], cfg, stop, seed=11, **kwargs)


def test_ber_curve_is_independent_of_batch_size():
    # fixed frame budget: per-frame keying must make the counts identical
    stop = StopRule(min_frame_errors=10_000, max_frames=48)
    a = _tiny_curve(stop=stop, batch=3)
    b = _tiny_curve(stop=stop, batch=64)
    assert all(p.frames == 48 for p in a.points)
    assert [p.to_json() for p in a.points] == [p.to_json() for p in b.points]


def test_ber_curve_is_independent_of_worker_count():
    a = _tiny_curve(workers=1)
    b = _tiny_curve(workers=2)
    assert [p.to_json() for p in a.points] == [p.to_json() for p in b.points]


def test_ber_curve_record_contents():
    record = _tiny_curve()
    assert record.code["proto"] == "regular_3_6"
    assert record.stop == {"min_frame_errors": 8, "max_frames": 512}
    for point in record.points:
        assert 0.0 <= point.ber <= 1.0
        assert 0 < point.frames <= 512
        assert point.frame_errors <= point.frames
        assert point.bit_errors <= point.frames * 12
    csv = record.to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == "ebn0_db,ber,fer,frames,bit_errors,frame_errors"
    assert len(lines) == 3
    payload = record.to_json()
    assert payload["seed"] == 11
    assert len(payload["points"]) == 2


def test_stream_simulation_is_clean_at_high_snr():
    bit_errors, counted = simulate_stream(
        cut(REGULAR_36),
        LiftSpec(N=2, seed=0),
        ebn0_db=6.0,
        rate=0.5,
        periods=18,
        seed=1,
    )
    assert counted == 24
    assert bit_errors == 0
