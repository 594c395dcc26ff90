"""Back-of-envelope calculators for how big a classical reference frame and
a spin-based angle transmission need to be.
"""

import math


def frame_size_lower_bound(n_spins):
    """Minimum spins in a frame that extracts full directional information
    from n_spins transmitted spins: ceil(2^(N/2)) - N, floored at 0."""
    if n_spins < 1:
        raise ValueError("n_spins must be >= 1")
    return max(0, math.ceil(2.0 ** (n_spins / 2.0)) - n_spins)


def spins_for_angle(delta_theta):
    """Spin count whose total angular momentum resolves an angle delta_theta:
    N * hbar/2 >= hbar/delta_theta, so N = 2/delta_theta."""
    if not 0.0 < delta_theta < math.pi:
        raise ValueError("delta_theta must be in (0, pi)")
    return 2.0 / delta_theta


def bits_for_angle(delta_theta):
    """Bits to index equal planar angular patches of width delta_theta."""
    if not 0.0 < delta_theta < 2.0 * math.pi:
        raise ValueError("delta_theta must be in (0, 2*pi)")
    v = math.log2(2.0 * math.pi / delta_theta)
    # exact powers of two must not be pushed up by float round-off
    if abs(v - round(v)) < 1e-9:
        return int(round(v))
    return math.ceil(v)
