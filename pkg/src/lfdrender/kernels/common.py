"""Constants and scalar reference routines shared by both kernel backends.

The counter-based RNG and the erfinv polynomial are specified here once; the
numba and numpy modules re-implement them with identical operation order so
jittered sampling is reproducible across backends. Keep the three in sync.
"""

import math

import numpy as np

# Untouched view-buffer word: depth key 0xFFFFFFFF never results from a write
# (keys clamp to 0xFFFFFFFE), so the high word doubles as the coverage mask.
CLEAR_WORD = np.uint64(0xFFFFFFFFFFFFFFFF)
DEPTH_KEY_MAX = 4294967294.0  # 2^32 - 2

# splitmix64 finalizer constants
GOLD = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)

# Texel channel layout used everywhere a material is flattened to 9 channels.
CH_ALBEDO = 0   # 0..2 rgb
CH_NORMAL = 3   # 3..5 xyz in [0,1]
CH_ROUGH = 6
CH_METAL = 7
CH_AO = 8
N_CHANNELS = 9

# Material texture slots (indices into the per-material texture-id table).
SLOT_ALBEDO = 0
SLOT_NORMAL = 1
SLOT_ROUGH = 2
SLOT_METAL = 3
SLOT_AO = 4
N_SLOTS = 5

SLOT_CHANNELS = ((0, 3), (3, 3), (6, 1), (7, 1), (8, 1))  # (first channel, count)

# Minimum roughness keeps the specular lobe finite.
ROUGH_FLOOR = 0.045

# erfinv polynomial (two branches on w = -log(1-x^2)); ~1e-6 absolute accuracy,
# evaluated in float64 with Horner order fixed by these tuples.
ERFINV_P1 = (2.81022636e-08, 3.43273939e-07, -3.5233877e-06, -4.39150654e-06,
             0.00021858087, -0.00125372503, -0.00417768164, 0.246640727,
             1.50140941)
ERFINV_P2 = (-0.000200214257, 0.000100950558, 0.00134934322, -0.00367342844,
             0.00573950773, -0.0076224613, 0.00943887047, 1.00167406,
             2.83297682)

SQRT2 = math.sqrt(2.0)


def _mix64(z):
    z = np.uint64(z)
    z = np.uint64((z ^ (z >> np.uint64(30))) * MIX1)
    z = np.uint64((z ^ (z >> np.uint64(27))) * MIX2)
    return np.uint64(z ^ (z >> np.uint64(31)))


def rng_uniform_py(seed, i0, i1, i2):
    """Reference counter-based uniform in [0,1): hash of (seed, i0, i1, i2)."""
    with np.errstate(over="ignore"):
        z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        z = _mix64(z + GOLD * np.uint64(i0 & 0xFFFFFFFFFFFFFFFF))
        z = _mix64(z + GOLD * np.uint64(i1 & 0xFFFFFFFFFFFFFFFF))
        z = _mix64(z + GOLD * np.uint64(i2 & 0xFFFFFFFFFFFFFFFF))
    return float(z >> np.uint64(11)) * (2.0 ** -53)


def erfinv_py(x):
    """Reference erfinv approximation (same polynomial as the kernels)."""
    w = -math.log((1.0 - x) * (1.0 + x))
    if w < 5.0:
        w = w - 2.5
        p = ERFINV_P1[0]
        for c in ERFINV_P1[1:]:
            p = p * w + c
    else:
        w = math.sqrt(w) - 3.0
        p = ERFINV_P2[0]
        for c in ERFINV_P2[1:]:
            p = p * w + c
    return p * x


def trunc_gauss_cdf_bounds(sigma, radius):
    """CDF window (lo, hi) of N(0, sigma^2) truncated to [-radius, radius]."""
    if sigma <= 0.0 or radius <= 0.0:
        return 0.5, 0.5
    z = radius / (sigma * SQRT2)
    lo = 0.5 * (1.0 - math.erf(z))
    return lo, 1.0 - lo


def pack_rgba8(r, g, b):
    """Reference payload packing: floor(c*255+0.5) per channel, alpha 255."""
    r8 = int(min(max(r, 0.0), 1.0) * 255.0 + 0.5)
    g8 = int(min(max(g, 0.0), 1.0) * 255.0 + 0.5)
    b8 = int(min(max(b, 0.0), 1.0) * 255.0 + 0.5)
    return (r8 << 24) | (g8 << 16) | (b8 << 8) | 0xFF


def default_shading():
    """Shared shading environment: unit light direction, light RGB, ambient RGB."""
    l = np.array([0.3, 0.5, 0.8])
    l = l / np.sqrt(np.sum(l * l))
    return np.concatenate([l, [1.0, 1.0, 1.0], [0.18, 0.18, 0.18]])
