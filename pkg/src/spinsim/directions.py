"""Finite direction sets on the unit sphere, score functions, and the
classical baseline that encodes a direction as an equal-area patch index.
"""

from dataclasses import dataclass, field
import json
import math

import numpy as np

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class Direction:
    """Unit 3-vector."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        n2 = self.x * self.x + self.y * self.y + self.z * self.z
        if abs(n2 - 1.0) > 64 * _UNIT_TOL:
            raise ValueError(f"not a unit vector: |v|^2 = {n2!r}")

    @classmethod
    def from_array(cls, v):
        v = np.asarray(v, dtype=float)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("zero vector has no direction")
        return cls(*(v / n))

    @classmethod
    def from_angles(cls, theta, phi):
        """Polar angle theta from +z, azimuth phi from +x."""
        st = math.sin(theta)
        return cls(st * math.cos(phi), st * math.sin(phi), math.cos(theta))

    def as_array(self):
        return np.array([self.x, self.y, self.z])

    def dot(self, other):
        return self.x * other.x + self.y * other.y + self.z * other.z

    def angle_to(self, other):
        return math.acos(min(1.0, max(-1.0, self.dot(other))))


@dataclass(frozen=True)
class DirectionSet:
    """Ordered, duplicate-free finite set of directions."""

    directions: tuple
    labels: tuple = None

    def __post_init__(self):
        if len(self.directions) == 0:
            raise ValueError("direction set must be nonempty")
        object.__setattr__(self, "directions", tuple(self.directions))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            if len(self.labels) != len(self.directions):
                raise ValueError("labels length must match directions")
        arr = np.array([d.as_array() for d in self.directions])
        dots = arr @ arr.T
        np.fill_diagonal(dots, 0.0)
        if np.any(dots >= 1.0 - _UNIT_TOL):
            raise ValueError("duplicate directions in set")

    def __len__(self):
        return len(self.directions)

    def __getitem__(self, i):
        return self.directions[i]

    def as_matrix(self):
        return np.array([d.as_array() for d in self.directions])

    def to_json(self):
        return json.dumps([[d.x, d.y, d.z] for d in self.directions])

    @classmethod
    def from_json(cls, text):
        return cls(tuple(Direction(*v) for v in json.loads(text)))


def default_score(n, m):
    """(1 + n.m)/2: 1 for equal directions, 0 for antipodal; bounded by 1."""
    return 0.5 * (1.0 + n.dot(m))


@dataclass(frozen=True)
class ScoreFunction:
    """Bounded per-pair score with a declared least upper bound on |f|."""

    evaluator: callable
    f_max: float

    def __call__(self, n, m):
        return self.evaluator(n, m)

    def matrix(self, inputs, guesses):
        """Score table over a (sent, guessed) direction-set pair; checks the bound."""
        f = np.array([[self.evaluator(n, m) for m in guesses.directions]
                      for n in inputs.directions])
        if np.any(np.abs(f) > self.f_max + 1e-12):
            raise ValueError("score exceeds declared f_max on this set pair")
        return f


DEFAULT_SCORE = ScoreFunction(default_score, f_max=1.0)


# ---------------------------------------------------------------------------
# Equal-area band partition: one cap at each pole plus latitude collars,
# every patch of area 4*pi/2^N_bits.  Ordering: north cap, collars top to
# bottom (each swept in azimuth from phi=0), south cap.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpherePartition:
    """Equal-area partition of the sphere into 2^n_bits patches."""

    n_bits: int
    band_edges: tuple          # upper (larger-theta) edge of each band, ends at pi
    band_counts: tuple         # sectors per band
    band_offsets: tuple = field(default=None)

    def __post_init__(self):
        offsets = (0,) + tuple(np.cumsum(self.band_counts))[:-1]
        object.__setattr__(self, "band_offsets", tuple(int(o) for o in offsets))

    @property
    def n_patches(self):
        return 1 << self.n_bits

    def band_theta_range(self, band):
        lo = 0.0 if band == 0 else self.band_edges[band - 1]
        return lo, self.band_edges[band]

    def band_of_patch(self, index):
        if not 0 <= index < self.n_patches:
            raise ValueError(f"patch index {index} out of range")
        band = int(np.searchsorted(np.array(self.band_offsets), index, side="right")) - 1
        return band, index - self.band_offsets[band]

    def patch_center(self, index):
        band, sector = self.band_of_patch(index)
        lo, hi = self.band_theta_range(band)
        if self.band_counts[band] == 1 and (lo == 0.0 or hi == math.pi):
            return Direction(0.0, 0.0, 1.0 if lo == 0.0 else -1.0)
        theta = math.acos(0.5 * (math.cos(lo) + math.cos(hi)))
        width = 2.0 * math.pi / self.band_counts[band]
        return Direction.from_angles(theta, (sector + 0.5) * width)

    def patch_centers(self):
        return DirectionSet(tuple(self.patch_center(k) for k in range(self.n_patches)))

    def patch_solid_angle(self, index):
        band, _ = self.band_of_patch(index)
        lo, hi = self.band_theta_range(band)
        return 2.0 * math.pi * (math.cos(lo) - math.cos(hi)) / self.band_counts[band]

    def patch_angular_diameter(self, index):
        """Largest central angle between two points of the patch."""
        band, _ = self.band_of_patch(index)
        lo, hi = self.band_theta_range(band)
        m = self.band_counts[band]
        if m == 1:
            # polar cap (or full band): diameter through the pole unless the
            # band straddles the equator
            if lo == 0.0:
                return 2.0 * hi
            if hi >= math.pi:
                return 2.0 * (math.pi - lo)
        width = 2.0 * math.pi / m
        thetas = [lo, hi]
        if lo < 0.5 * math.pi < hi:
            thetas.append(0.5 * math.pi)
        best = 0.0
        for ta in thetas:
            for tb in thetas:
                for dphi in (0.0, min(width, math.pi)):
                    c = (math.cos(ta) * math.cos(tb)
                         + math.sin(ta) * math.sin(tb) * math.cos(dphi))
                    best = max(best, math.acos(min(1.0, max(-1.0, c))))
        return best


def build_band_partition(n_bits):
    """Equal-area cap+collar partition with 2^n_bits patches."""
    if not isinstance(n_bits, (int, np.integer)) or not 1 <= n_bits <= 30:
        raise ValueError(f"n_bits must be an integer in [1, 30], got {n_bits!r}")
    n_bits = int(n_bits)
    P = 1 << n_bits
    if P == 2:
        return SpherePartition(n_bits, (0.5 * math.pi, math.pi), (1, 1))

    # polar cap colatitude for area 4*pi/P: cos(theta_c) = 1 - 2/P
    theta_c = math.acos(1.0 - 2.0 / P)
    side = math.sqrt(4.0 * math.pi / P)     # side of an ideal square patch
    n_collars = max(1, round((math.pi - 2.0 * theta_c) / side))

    # provisional equal-height collars -> patch counts by cumulative rounding
    edges0 = np.linspace(theta_c, math.pi - theta_c, n_collars + 1)
    areas = 2.0 * math.pi * (np.cos(edges0[:-1]) - np.cos(edges0[1:]))
    ideal = areas / (4.0 * math.pi / P)
    counts = []
    placed = 0.0
    taken = 0
    for y in ideal:
        placed += y
        m = max(1, round(placed) - taken)
        counts.append(m)
        taken += m
    counts[-1] += (P - 2) - taken           # force exact total
    while counts[-1] < 1:                   # degenerate rounding: steal a patch
        k = int(np.argmax(counts[:-1]))
        counts[k] -= 1
        counts[-1] += 1

    # re-cut collar edges so each collar's area is exactly counts[i] patches
    edges = [theta_c]
    cum = 1
    for m in counts[:-1]:
        cum += m
        edges.append(math.acos(1.0 - 2.0 * cum / P))
    edges.append(math.pi - theta_c)
    band_edges = tuple(edges[1:]) + (math.pi,)
    band_edges = (theta_c,) + band_edges
    band_counts = (1,) + tuple(counts) + (1,)
    return SpherePartition(n_bits, band_edges, band_counts)


def patch_index(partition, d):
    """Index of the unique patch containing direction d (ties to lower index)."""
    theta = math.acos(min(1.0, max(-1.0, d.z)))
    edges = np.array(partition.band_edges)
    band = int(np.searchsorted(edges, theta, side="left"))
    band = min(band, len(partition.band_counts) - 1)
    m = partition.band_counts[band]
    if m == 1:
        return partition.band_offsets[band]
    phi = math.atan2(d.y, d.x) % (2.0 * math.pi)
    width = 2.0 * math.pi / m
    sector = int(phi / width)
    if sector > 0 and phi == sector * width:
        sector -= 1                          # boundary tie: lower index
    sector = min(sector, m - 1)
    return partition.band_offsets[band] + sector
