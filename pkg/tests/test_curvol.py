"""Tests for curvol: maximal-volume skeleton search, CUR cross errors, and
the skeleton-induced leading basis.

The brute-force oracle enumerates every submatrix independently of the
package's own certification pass.
"""

import numpy as np
import pytest

import oracles
from randprep import curvol, densela, matgen, randmats, subspace
from randprep.curvol import SkeletonPick
from randprep.errors import NoConvergence, SingularPivotBlock
from randprep.matgen import SpectrumSpec

SEED = 88


def _stream(seed, sid=0):
    return randmats.RngStream(seed, sid)


def _rank2_instance(t, noise=1e-6):
    st = randmats.RngStream(SEED, t)
    a = randmats.gaussian(6, 2, st.child(1)) @ randmats.gaussian(2, 6, st.child(2))
    return a + noise * randmats.gaussian(6, 6, st.child(3))


# ----------------------------------------------------------------- maxvol


def test_maxvol_diagonal_picks_largest():
    pick = curvol.maxvol(np.diag([1.0, 5.0, 3.0, 0.5, 4.0, 2.0]), 2)
    assert sorted(pick.row_idx.tolist()) == [1, 4]
    assert sorted(pick.col_idx.tolist()) == [1, 4]
    assert pick.volume == pytest.approx(20.0, rel=1e-12)
    assert pick.nu == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("t", range(25))
def test_maxvol_matches_exhaustive_optimum(t):
    a = _rank2_instance(t)
    pick = curvol.maxvol(a, 2)
    _, _, best = oracles.maxvol_exhaustive(a, 2)
    assert pick.volume == pytest.approx(best, rel=1e-9)


def test_maxvol_volume_monotone_across_sweeps():
    # Capped runs surface the interim pick; volumes never decrease.
    a = _rank2_instance(3)
    volumes = []
    for cap in range(1, 8):
        try:
            volumes.append(curvol.maxvol(a, 2, max_sweeps=cap).volume)
            break
        except NoConvergence as exc:
            volumes.append(exc.pick.volume)
    assert all(b >= a_ - 1e-12 for a_, b in zip(volumes, volumes[1:]))


def test_maxvol_dominance_at_convergence():
    st = _stream(90)
    a, _ = matgen.svd_spec_matrix(SpectrumSpec(32, 6), False, st.child(1))
    pick = curvol.maxvol(a, 6, dom_tol=0.01)
    a11 = a[np.ix_(pick.row_idx, pick.col_idx)]
    g = a[:, pick.col_idx] @ np.linalg.inv(a11)
    h = np.linalg.inv(a11) @ a[pick.row_idx, :]
    assert np.max(np.abs(g)) <= 1.01 + 1e-9
    assert np.max(np.abs(h)) <= 1.01 + 1e-9


def test_maxvol_sweep_cap_flags_pick():
    a = _rank2_instance(5)
    with pytest.raises(NoConvergence) as info:
        curvol.maxvol(a, 2, max_sweeps=0)
    pick = info.value.pick
    assert pick.volume > 0.0
    assert len(pick.row_idx) == 2


def test_maxvol_index_invariants():
    a = randmats.gaussian(9, 7, _stream(91))
    pick = curvol.maxvol(a, 3)
    assert len(set(pick.row_idx.tolist())) == 3
    assert len(set(pick.col_idx.tolist())) == 3
    assert pick.row_idx.max() < 9 and pick.row_idx.min() >= 0
    assert pick.col_idx.max() < 7 and pick.col_idx.min() >= 0
    assert pick.volume > 0.0


def test_maxvol_rho_validation():
    a = randmats.gaussian(4, 3, _stream(92))
    with pytest.raises(ValueError):
        curvol.maxvol(a, 0)
    with pytest.raises(ValueError):
        curvol.maxvol(a, 4)


# --------------------------------------------------------------------- cur


def test_cur_exact_rank_identity():
    st = _stream(93)
    a = randmats.gaussian(8, 3, st.child(1)) @ randmats.gaussian(3, 8, st.child(2))
    pick = curvol.maxvol(a, 3)
    _, _, _, err = curvol.cur(a, pick)
    assert err <= 1e-10 * densela.spectral_norm(a)


def test_cur_blocks_are_submatrices():
    a = randmats.gaussian(7, 6, _stream(94))
    pick = curvol.maxvol(a, 2)
    c_blk, a11, r_blk, _ = curvol.cur(a, pick)
    assert np.array_equal(c_blk, a[:, pick.col_idx])
    assert np.array_equal(r_blk, a[pick.row_idx, :])
    assert np.array_equal(a11, a[np.ix_(pick.row_idx, pick.col_idx)])


@pytest.mark.parametrize("t", range(25))
def test_cur_quasi_optimality_bound(t):
    # Certified nu on a 6x6 instance: zero violations of the cross bound.
    st = randmats.RngStream(89, t)
    a = randmats.gaussian(6, 3, st.child(1)) @ randmats.gaussian(3, 6, st.child(2))
    a += 1e-5 * randmats.gaussian(6, 6, st.child(3))
    pick = curvol.maxvol(a, 2)
    _, _, _, err = curvol.cur(a, pick)
    bound = 3 * densela.singular_values(a)[2] * pick.nu
    assert err <= bound * (1 + 1e-9)


def test_cur_rank_one_cross():
    a = randmats.gaussian(5, 5, _stream(95))
    pick = curvol.maxvol(a, 1)
    c_blk, a11, r_blk, _ = curvol.cur(a, pick)
    i, j = pick.row_idx[0], pick.col_idx[0]
    assert a11[0, 0] == a[i, j]
    assert pick.volume == pytest.approx(abs(a[i, j]), rel=1e-12)
    # The picked entry dominates its own row and column.
    assert abs(a[i, j]) >= np.max(np.abs(a[i, :])) - 1e-12
    assert abs(a[i, j]) >= np.max(np.abs(a[:, j])) - 1e-12


def test_cur_singular_block_rejected():
    a = np.eye(6)
    pick = SkeletonPick(
        np.array([0, 1]), np.array([2, 3]), 0.0, 1.0
    )
    with pytest.raises(SingularPivotBlock):
        curvol.cur(a, pick)


def test_cur_index_validation():
    a = randmats.gaussian(5, 5, _stream(96))
    with pytest.raises(ValueError):
        curvol.cur(a, SkeletonPick(np.array([0, 0]), np.array([1, 2]), 1.0, 1.0))
    with pytest.raises(ValueError):
        curvol.cur(a, SkeletonPick(np.array([0, 5]), np.array([1, 2]), 1.0, 1.0))
    with pytest.raises(ValueError):
        curvol.cur(a, SkeletonPick(np.array([0, 1]), np.array([1]), 1.0, 1.0))


def test_norm_bridge_on_error_matrices():
    # ||M|| <= sqrt(mn) ||M||_C on the generated cross errors.
    for t in range(10):
        a = _rank2_instance(t, noise=1e-4)
        pick = curvol.maxvol(a, 2)
        c_blk, a11, r_blk, err = curvol.cur(a, pick)
        resid = a - c_blk @ np.linalg.solve(a11, r_blk)
        assert densela.spectral_norm(resid) <= 6.0 * err * (1 + 1e-12)


# ------------------------------------------------------ leading_from_skeleton


def test_skeleton_basis_exact_rank():
    st = _stream(97)
    a = randmats.gaussian(9, 3, st.child(1)) @ randmats.gaussian(3, 9, st.child(2))
    pick = curvol.maxvol(a, 3)
    basis = curvol.leading_from_skeleton(a, pick)
    truth = densela.svd(a).S[:, :3]
    assert subspace.subspace_residual(basis, truth) <= 1e-10


def test_skeleton_basis_worked_input():
    hits = 0
    for t in range(100):
        st = randmats.RngStream(90, t)
        a, truth = matgen.svd_spec_matrix(SpectrumSpec(64, 8), False, st.child(1))
        pick = curvol.maxvol(a, 8)
        basis = curvol.leading_from_skeleton(a, pick)
        hits += subspace.subspace_residual(basis, truth.S[:, :8]) <= 1e-5
    assert hits >= 90


def test_skeleton_basis_vs_sketch():
    st = randmats.RngStream(91, 0)
    a, truth = matgen.svd_spec_matrix(SpectrumSpec(64, 8), False, st.child(1))
    pick = curvol.maxvol(a, 8)
    rn = subspace.subspace_residual(
        curvol.leading_from_skeleton(a, pick), truth.S[:, :8]
    )
    sketch = subspace.leading_sketch(a, 8, "gaussian", 0, st.child(2))
    assert rn <= 100.0 * sketch.rel_err


def test_skeleton_basis_orthonormal():
    a = randmats.gaussian(10, 8, _stream(98))
    pick = curvol.maxvol(a, 4)
    basis = curvol.leading_from_skeleton(a, pick)
    assert basis.shape == (10, 4)
    assert densela.spectral_norm(basis.T @ basis - np.eye(4)) <= 1e-12
