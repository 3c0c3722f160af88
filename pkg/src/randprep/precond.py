"""Preprocessing maps: normalization, bordered augmentations (west, north,
northwest), additive rank-r corrections, the bordered/additive
factorization bridge, and factor-Gaussian inputs for dual experiments.
"""

from dataclasses import asdict, dataclass

import numpy as np

from . import densela, randmats
from .errors import ShapeMismatch, ZeroMatrix
from .randmats import _gen

__all__ = [
    "AdditiveSpec",
    "AugmentSpec",
    "additive",
    "augment_north",
    "augment_northwest",
    "augment_west",
    "draw_uv",
    "factor_gaussian",
    "k_factor_blocks",
    "k_factorization",
    "make_w",
    "normalize",
]

DIRECTIONS = ("West", "North", "Northwest")
W_MODES = ("GaussianW", "IdentityW", "ZeroW")
SIGNS = ("Plus", "Minus")
COUPLINGS = ("Independent", "Shared")


@dataclass(frozen=True)
class AugmentSpec:
    """Bordering recipe: which side(s) get random blocks and how wide."""

    direction: str
    q: int = 0
    s: int = 0
    w_mode: str = "GaussianW"

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.w_mode not in W_MODES:
            raise ValueError(f"unknown w_mode {self.w_mode!r}")
        if self.q < 0 or self.s < 0:
            raise ValueError("block sizes must be nonnegative")
        if self.direction == "West" and self.s != 0:
            raise ValueError("West uses q only")
        if self.direction == "North" and self.q != 0:
            raise ValueError("North uses s only")
        if self.w_mode == "IdentityW" and self.q != self.s:
            raise ValueError("IdentityW requires q = s")

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class AdditiveSpec:
    """Rank-r additive correction recipe."""

    r: int
    sign: str = "Plus"
    coupling: str = "Independent"

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("r must be nonnegative")
        if self.sign not in SIGNS:
            raise ValueError(f"unknown sign {self.sign!r}")
        if self.coupling not in COUPLINGS:
            raise ValueError(f"unknown coupling {self.coupling!r}")

    def as_dict(self):
        return asdict(self)


def normalize(a):
    """Scale to unit spectral norm; returns (A/||A||, ||A||)."""
    arr = densela.dense(a)
    scale = densela.spectral_norm(arr)
    if scale == 0.0:
        raise ZeroMatrix("cannot normalize a zero matrix")
    return arr / scale, scale


def _tall_block(x, rows, name):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != rows:
        raise ShapeMismatch(f"{name} must have {rows} rows")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} must be finite")
    return arr


def augment_west(a, u):
    """K = (U | A); appends q random columns on the left."""
    arr = densela.dense(a)
    u = _tall_block(u, arr.shape[0], "U")
    return np.hstack([u, arr])


def augment_north(a, v):
    """K = [V^T; A]; appends s random rows on top (transposed mirror of west)."""
    arr = densela.dense(a)
    v = _tall_block(v, arr.shape[1], "V")
    return np.vstack([v.T, arr])


def augment_northwest(a, u, v, w):
    """K = [[W, V^T], [U, A]] with W: s x q, U: m x q, V: n x s."""
    arr = densela.dense(a)
    m, n = arr.shape
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2:
        raise ShapeMismatch("W must be 2-D")
    s, q = w.shape
    u = _tall_block(u, m, "U")
    v = _tall_block(v, n, "V")
    if u.shape[1] != q or v.shape[1] != s:
        raise ShapeMismatch("need U: m x q and V: n x s to match W: s x q")
    top = np.hstack([w, v.T])
    bottom = np.hstack([u, arr])
    return np.vstack([top, bottom])


def make_w(s, q, w_mode, rng=None):
    """Corner block for northwestern augmentation per the w_mode tag."""
    if w_mode == "GaussianW":
        return randmats.gaussian(s, q, rng)
    if w_mode == "IdentityW":
        if s != q:
            raise ValueError("IdentityW requires q = s")
        return np.eye(s)
    if w_mode == "ZeroW":
        return np.zeros((s, q))
    raise ValueError(f"unknown w_mode {w_mode!r}")


def additive(a, u, v, sign="Plus"):
    """C = A + UV^T (or A - UV^T); U: m x r, V: n x r."""
    arr = densela.dense(a)
    m, n = arr.shape
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 2 or v.ndim != 2 or u.shape[1] != v.shape[1]:
        raise ShapeMismatch("U and V must share their column count")
    if u.shape[0] != m or v.shape[0] != n:
        raise ShapeMismatch(
            f"U must have {m} rows and V {n} rows, got {u.shape[0]} and {v.shape[0]}"
        )
    if sign not in SIGNS:
        raise ValueError(f"unknown sign {sign!r}")
    if u.shape[1] == 0:
        return arr.copy()
    prod = u @ v.T
    return arr + prod if sign == "Plus" else arr - prod


def k_factor_blocks(u, v):
    """Explicit bridge factors: (U_hat, V_hat, U_hat^-1, V_hat^-1).

    For n x r blocks U, V these are the (n+r) x (n+r) matrices
    U_hat = [[0, I_r], [I_n, U]],  V_hat = [[0, I_n], [I_r, V^T]],
    with closed-form inverses [[-U, I_n], [I_r, 0]] and [[-V^T, I_r],
    [I_n, 0]].
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    n, r = u.shape
    if v.shape != (n, r):
        raise ShapeMismatch("U and V must both be n x r")
    eye_n, eye_r = np.eye(n), np.eye(r)
    u_hat = np.block([[np.zeros((r, n)), eye_r], [eye_n, u]])
    v_hat = np.block([[np.zeros((n, r)), eye_n], [eye_r, v.T]])
    u_hat_inv = np.block([[-u, eye_n], [eye_r, np.zeros((r, n))]])
    v_hat_inv = np.block([[-v.T, eye_r], [eye_n, np.zeros((n, r))]])
    return u_hat, v_hat, u_hat_inv, v_hat_inv


def k_factorization(a, u, v):
    """Bordered/additive bridge: returns (U_hat, V_hat, K, C) with
    K = [[I_r, V^T], [U, A]], C = A - UV^T, and K = U_hat diag(C, I_r) V_hat.

    The minus sign is forced by the block identity: K's trailing block
    comes out as C + UV^T, which must equal A.  Both identities (the
    product form and the recovery C from K through the inverse factors)
    are checked entrywise before returning.
    """
    arr = densela.dense(a)
    n = arr.shape[0]
    if arr.shape[1] != n:
        raise ShapeMismatch("A must be square")
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 2 or u.shape[0] != n or v.shape != u.shape:
        raise ShapeMismatch("U and V must both be n x r")
    r = u.shape[1]
    c = additive(arr, u, v, sign="Minus")
    if r == 0:
        return np.eye(n), np.eye(n), arr.copy(), c
    k = augment_northwest(arr, u, v, np.eye(r))
    u_hat, v_hat, u_hat_inv, v_hat_inv = k_factor_blocks(u, v)
    mid = np.zeros((n + r, n + r))
    mid[:n, :n] = c
    mid[n:, n:] = np.eye(r)
    tol = 1e-12 * (
        1.0
        + densela.spectral_norm(arr)
        + densela.spectral_norm(u) * densela.spectral_norm(v)
    )
    if np.abs(u_hat @ mid @ v_hat - k).max() > tol:
        raise RuntimeError("bridge product identity violated")
    recovered = (u_hat_inv @ k @ v_hat_inv)[:n, :n]
    if np.abs(recovered - c).max() > tol:
        raise RuntimeError("bridge recovery identity violated")
    return u_hat, v_hat, k, c


def draw_uv(m, n, r, rng, coupling="Independent", scaled=True):
    """Gaussian preprocessor pair U (m x r), V (n x r).

    scaled divides each factor by its own spectral norm, so the additive
    term UV^T has norm at most 1 against a normalized input.  Shared
    coupling reuses U as V (square inputs only).
    """
    if coupling not in COUPLINGS:
        raise ValueError(f"unknown coupling {coupling!r}")
    gen = _gen(rng)
    u = randmats.gaussian(m, r, gen)
    if scaled and r > 0:
        u = u / densela.spectral_norm(u)
    if coupling == "Shared":
        if m != n:
            raise ShapeMismatch("shared coupling needs m = n")
        return u, u
    v = randmats.gaussian(n, r, gen)
    if scaled and r > 0:
        v = v / densela.spectral_norm(v)
    return u, v


def factor_gaussian(m, n, rho, noise_norm, rng):
    """Rank-rho product of Gaussian factors plus scaled Gaussian noise.

    Returns (A_tilde, U_bar, V_bar) with A_tilde = U_bar V_bar^T + E and
    ||E|| = noise_norm.  Draw order: U_bar, V_bar, E.
    """
    if rho > min(m, n):
        raise ValueError("rho must not exceed min(m, n)")
    if noise_norm < 0:
        raise ValueError("noise_norm must be nonnegative")
    gen = _gen(rng)
    u_bar = randmats.gaussian(m, rho, gen)
    v_bar = randmats.gaussian(n, rho, gen)
    e = randmats.gaussian(m, n, gen)
    if noise_norm > 0:
        e = e * (noise_norm / densela.spectral_norm(e))
        a = u_bar @ v_bar.T + e
    else:
        a = u_bar @ v_bar.T
    return a, u_bar, v_bar
