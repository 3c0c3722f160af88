"""Tests for matgen: prescribed spectra, the eight test classes, beta shifts.

Expected values were frozen from oracle computations (pivoted-LU dets,
replayed stream draws) before wiring them to the implementation.
"""

import numpy as np
import pytest

import oracles

from randprep import densela, matgen, randmats
from randprep.errors import BisectFail
from randprep.matgen import SpectrumSpec, TestClass


def _stream(seed):
    return randmats.RngStream(seed)


# ---------------------------------------------------------------- spectra


def test_spectrum_reciprocal_values():
    spec = SpectrumSpec(6, 4, head="reciprocal", tail_value=1e-10)
    sigma = matgen.make_spectrum(spec, _stream(0))
    assert np.array_equal(sigma[:4], [1.0, 0.5, 1.0 / 3.0, 0.25])
    assert np.array_equal(sigma[4:], [1e-10, 1e-10])
    assert np.all(np.diff(sigma) <= 0)


def test_spectrum_sampled_head():
    spec = SpectrumSpec(12, 7, head="sampled", tail_value=1e-16)
    sigma = matgen.make_spectrum(spec, _stream(3))
    assert sigma[0] == 1.0
    assert sigma[6] == 0.1
    mids = sigma[1:6]
    assert np.all((0.1 <= mids) & (mids < 1.0))
    assert np.all(np.diff(sigma) <= 0)


def test_spectrum_sampled_tiny_heads():
    one = matgen.make_spectrum(SpectrumSpec(3, 1, head="sampled"), _stream(0))
    assert one[0] == 1.0
    two = matgen.make_spectrum(SpectrumSpec(3, 2, head="sampled"), _stream(0))
    assert two[0] == 1.0 and two[1] == 0.1


def test_spectrum_spec_validation():
    with pytest.raises(ValueError):
        SpectrumSpec(4, 0)
    with pytest.raises(ValueError):
        SpectrumSpec(4, 5)
    with pytest.raises(ValueError):
        SpectrumSpec(4, 2, head="linear")
    with pytest.raises(ValueError):
        SpectrumSpec(4, 2, tail_value=0.0)


# ------------------------------------------------------- svd_spec_matrix


def test_spec_matrix_cond_and_numrank():
    spec = SpectrumSpec(64, 8, head="reciprocal", tail_value=1e-10)
    a, _ = matgen.svd_spec_matrix(spec, False, _stream(1))
    assert densela.cond(a) == pytest.approx(1e10, rel=1e-3)
    assert densela.numrank(a, 1e-6) == 8


def test_spec_matrix_full_rho_cond_is_n():
    spec = SpectrumSpec(16, 16, head="reciprocal")
    a, _ = matgen.svd_spec_matrix(spec, True, _stream(2))
    assert densela.cond(a) == pytest.approx(16.0, rel=1e-9)


@pytest.mark.parametrize("symmetric", [False, True])
def test_spec_matrix_truth_reconstruction(symmetric):
    spec = SpectrumSpec(24, 6, head="sampled", tail_value=1e-12)
    a, truth = matgen.svd_spec_matrix(spec, symmetric, _stream(4))
    recon = truth.S @ (truth.sigma[:, None] * truth.T.T)
    assert densela.spectral_norm(a - recon) <= 1e-12
    eye = np.eye(24)
    assert np.abs(truth.S.T @ truth.S - eye).max() <= 1e-13
    assert np.abs(truth.T.T @ truth.T - eye).max() <= 1e-13
    if symmetric:
        assert np.abs(a - a.T).max() <= 1e-13
        assert truth.T is truth.S


def test_spec_matrix_deterministic():
    spec = SpectrumSpec(10, 4)
    a1, _ = matgen.svd_spec_matrix(spec, False, _stream(7))
    a2, _ = matgen.svd_spec_matrix(spec, False, _stream(7))
    assert np.array_equal(a1, a2)


# -------------------------------------------------------------- TestClass


def test_class_tag_normalization():
    assert TestClass("T1n", 16, 2).tag == "1n"
    assert TestClass("4s", 16, 2).tag == "4s"
    assert TestClass("2s", 16, 2).symmetric
    assert not TestClass("3n", 16, 2).symmetric


def test_class_validation():
    with pytest.raises(ValueError):
        TestClass("5n", 16, 2)
    with pytest.raises(ValueError):
        TestClass("2n", 16, 5)  # block classes need n >= 4r
    with pytest.raises(ValueError):
        TestClass("1n", 8, 7)  # class 1 needs r <= n - 2
    with pytest.raises(ValueError):
        TestClass("1n", 16, 0)


# --------------------------------------------------------------- Toeplitz


def test_toeplitz_dense_structure():
    vals = np.arange(8.0)
    t = matgen.toeplitz_dense(vals, 4, 5)
    for i in range(4):
        for j in range(5):
            assert t[i, j] == vals[i - j + 4]
    with pytest.raises(ValueError):
        matgen.toeplitz_dense(np.arange(7.0), 4, 5)


# ------------------------------------------------------------- class_base


def test_base_2s_symmetric_rank_deficit():
    base = matgen.class_base(TestClass("2s", 64, 4), _stream(3))
    assert np.abs(base - base.T).max() == 0.0
    sv = densela.singular_values(base)
    assert sv[59] == pytest.approx(1.0, abs=1e-12)
    assert sv[60] <= 1e-13
    assert densela.numrank(base, 1e-6) == 60


def test_base_2n_norm_and_rank():
    base = matgen.class_base(TestClass("2n", 64, 4), _stream(5))
    sv = densela.singular_values(base)
    assert sv[0] == pytest.approx(np.sqrt(2.0), abs=1e-13)
    assert sv[59] == pytest.approx(1.0, abs=1e-12)
    assert sv[60] <= 1e-13


@pytest.mark.parametrize("tag", ["3n", "3s"])
def test_base_class3_normalized_rank_deficit(tag):
    base = matgen.class_base(TestClass(tag, 64, 4), _stream(1))
    sv = densela.singular_values(base)
    assert sv[0] == pytest.approx(1.0, abs=1e-12)
    assert sv[59] >= 1e-4
    assert sv[60] <= 1e-13
    if tag == "3s":
        assert np.abs(base - base.T).max() == 0.0


def test_base_4n_det_vanishes_against_oracle():
    # Replay the draw (one 2n-1 diagonal vector, corner slot zeroed) to
    # recover the affine det slope from pivoted-LU oracle evaluations.
    n = 32
    base = matgen.class_base(TestClass("4n", n, 1), _stream(11))
    g = _stream(11).generator()
    vals = g.standard_normal(2 * n - 1)
    vals[2 * n - 2] = 0.0
    at0 = matgen.toeplitz_dense(vals, n, n)
    assert np.array_equal(base[: n - 1, :], at0[: n - 1, :])
    at1 = at0.copy()
    at1[n - 1, 0] = 1.0
    slope = oracles.det_pivoted(at1) - oracles.det_pivoted(at0)
    assert abs(oracles.det_pivoted(base)) <= 1e-10 * abs(slope)


@pytest.mark.parametrize("tag", ["4n", "4s"])
def test_base_class4_near_singular(tag):
    for seed in range(3):
        base = matgen.class_base(TestClass(tag, 32, 1), _stream(seed))
        sv = densela.singular_values(base)
        assert sv[-1] <= 1e-12 * sv[0]
        if tag == "4s":
            assert np.abs(base - base.T).max() == 0.0


def test_base_class4_ignores_r():
    a1 = matgen.class_base(TestClass("4n", 32, 1), _stream(6))
    a8 = matgen.class_base(TestClass("4n", 32, 8), _stream(6))
    assert np.array_equal(a1, a8)


# ------------------------------------------------------------- beta_shift


def test_beta_shift_zero_matrix():
    shifted, beta = matgen.beta_shift(np.zeros((8, 8)))
    assert beta == 1e-16
    assert np.array_equal(shifted, 1e-16 * np.eye(8))
    assert densela.cond(shifted) == 1.0


def test_beta_shift_symmetric_fixed_beta():
    base = matgen.class_base(TestClass("2s", 64, 4), _stream(3))
    shifted, beta = matgen.beta_shift(base)
    assert beta == 1e-16
    # Exact-arithmetic spectrum of the shift is {1 + beta, ..., beta},
    # i.e. kappa = 1e16 + 1; float measurement sees sigma_min noise only.
    scaled = base / densela.spectral_norm(base)
    assert np.array_equal(shifted, scaled + 1e-16 * np.eye(64))
    assert 1e15 <= densela.cond(shifted) <= 1e17


def test_beta_shift_nonsymmetric_window():
    base = matgen.class_base(TestClass("2n", 64, 4), _stream(3))
    shifted, beta = matgen.beta_shift(base)
    assert 1e-18 <= beta <= 1e-2
    assert 1e16 <= densela.cond(shifted) <= 1e18


def test_beta_shift_well_conditioned_fails():
    g = _stream(9).generator()
    q = randmats.random_orthogonal(16, g)
    with pytest.raises(BisectFail):
        matgen.beta_shift(q + 0.01 * g.standard_normal((16, 16)))


def test_beta_shift_rejects_rectangular():
    with pytest.raises(ValueError):
        matgen.beta_shift(np.ones((3, 4)))


# -------------------------------------------------------------- gen_class


@pytest.mark.parametrize("tag", matgen.CLASS_TAGS)
def test_gen_class_measured_kappa_window(tag):
    tc = TestClass(tag, 32, 2)
    for seed in (100, 101):
        a = matgen.gen_class(tc, _stream(seed))
        assert np.isfinite(a).all()
        assert densela.spectral_norm(a) == pytest.approx(1.0, abs=1e-6)
        lo, hi = matgen.KAPPA_WINDOW
        assert lo <= densela.cond(a) <= hi
        if tc.symmetric:
            assert np.abs(a - a.T).max() <= 1e-12


def test_gen_class_1n_kappa_near_1e16():
    # Nominal kappa is exactly 1e16 by construction (sigma head ends at
    # 0.1, tail 1e-16); the measured value carries sigma_min noise of a
    # few binary digits, hence the one-sided slack above.
    spec = SpectrumSpec(128, 127, head="sampled", tail_value=1e-16)
    sigma = matgen.make_spectrum(spec, _stream(0))
    assert sigma[126] == 0.1 and sigma[127] == 1e-16
    for seed in range(5):
        a = matgen.gen_class(TestClass("1n", 128, 1), _stream(seed))
        assert 5e15 <= densela.cond(a) <= 1e17


def test_gen_class_1s_exact_head_tail_values():
    tc = TestClass("1s", 32, 3)
    spec = SpectrumSpec(32, 29, head="sampled", tail_value=1e-16)
    sigma = matgen.make_spectrum(spec, _stream(0))
    assert sigma[28] == 0.1
    assert np.array_equal(sigma[29:], [1e-16] * 3)
    a = matgen.gen_class(tc, _stream(12))
    assert np.abs(a - a.T).max() <= 1e-13


def test_gen_class_deterministic():
    tc = TestClass("3n", 32, 2)
    a1 = matgen.gen_class(tc, _stream(21))
    a2 = matgen.gen_class(tc, _stream(21))
    assert np.array_equal(a1, a2)
