"""Small dense quantum oracle: N-spin encoding states, POVM measurements,
and the Born-rule joint distribution they induce over (sent, guessed)
direction pairs.  Hilbert space capped at 2^12 so everything stays dense.
"""

from dataclasses import dataclass
import json

import numpy as np

from .directions import Direction, DirectionSet
from .info import Distribution, JointDistribution

MAX_SPINS = 12
_PSD_TOL = 1e-9


@dataclass(frozen=True)
class PureState:
    """Unit vector of complex amplitudes, dimension 2^N."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", a)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("state must be a nonempty vector")
        n = np.linalg.norm(a)
        if abs(n - 1.0) > 1e-10:
            raise ValueError(f"state norm {n!r} is not 1")

    @property
    def dim(self):
        return self.amplitudes.size


@dataclass(frozen=True)
class Povm:
    """Positive operators summing to the identity; one element per guess."""

    elements: tuple

    def __post_init__(self):
        els = tuple(np.ascontiguousarray(e, dtype=complex) for e in self.elements)
        object.__setattr__(self, "elements", els)
        if not els:
            raise ValueError("POVM must have at least one element")
        dim = els[0].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for e in els:
            if e.shape != (dim, dim):
                raise ValueError("POVM elements must be square and same-dimension")
            if np.linalg.norm(e - e.conj().T) > 1e-9:
                raise ValueError("POVM element not Hermitian")
            if np.linalg.eigvalsh(e).min() < -_PSD_TOL:
                raise ValueError("POVM element not positive semidefinite")
            total += e
        if np.abs(total - np.eye(dim)).max() > _PSD_TOL:
            raise ValueError("POVM elements do not sum to the identity")

    def __len__(self):
        return len(self.elements)

    @property
    def dim(self):
        return self.elements[0].shape[0]


@dataclass(frozen=True)
class QuantumChannelSpec:
    """N spins, a prior over sent directions, per-direction encodings, and a
    guess POVM: everything needed to produce the target joint statistics."""

    n_spins: int
    input_set: DirectionSet
    prior: Distribution
    encodings: tuple            # one PureState per input direction
    povm: Povm
    guess_set: DirectionSet = None

    def __post_init__(self):
        dim = 1 << self.n_spins
        if len(self.prior) != len(self.input_set):
            raise ValueError("prior length must match input set")
        if len(self.encodings) != len(self.input_set):
            raise ValueError("need one encoding per input direction")
        for s in self.encodings:
            if s.dim != dim:
                raise ValueError("encoding dimension does not match n_spins")
        if self.povm.dim != dim:
            raise ValueError("POVM dimension does not match n_spins")
        if self.guess_set is not None and len(self.guess_set) != len(self.povm):
            raise ValueError("guess set size must match POVM size")

    def to_json(self):
        return json.dumps({
            "n_spins": self.n_spins,
            "input_set": [[d.x, d.y, d.z] for d in self.input_set.directions],
            "prior": self.prior.probabilities.tolist(),
            "encodings": [_c2j(s.amplitudes) for s in self.encodings],
            "povm": [_c2j(e) for e in self.povm.elements],
            "guess_set": ([[d.x, d.y, d.z] for d in self.guess_set.directions]
                          if self.guess_set else None),
        })

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(
            n_spins=d["n_spins"],
            input_set=DirectionSet(tuple(Direction(*v) for v in d["input_set"])),
            prior=Distribution(np.array(d["prior"])),
            encodings=tuple(PureState(_j2c(s)) for s in d["encodings"]),
            povm=Povm(tuple(_j2c(e) for e in d["povm"])),
            guess_set=(DirectionSet(tuple(Direction(*v) for v in d["guess_set"]))
                       if d.get("guess_set") else None),
        )


def _c2j(arr):
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def _j2c(nested):
    a = np.array(nested, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def bloch_state(d):
    """Single-spin state pointing along d: (cos(theta/2), e^{i phi} sin(theta/2))."""
    theta = np.arccos(np.clip(d.z, -1.0, 1.0))
    phi = np.arctan2(d.y, d.x)
    return np.array([np.cos(theta / 2),
                     np.exp(1j * phi) * np.sin(theta / 2)])


def product_state(d, n_spins):
    """N-fold tensor power of the single-spin state with Bloch vector d."""
    if not 1 <= n_spins <= MAX_SPINS:
        raise ValueError(f"n_spins must be in [1, {MAX_SPINS}], got {n_spins}")
    single = bloch_state(d)
    amps = single
    for _ in range(n_spins - 1):
        amps = np.kron(amps, single)
    return PureState(amps)


def projective_povm(dirs, n_spins=1):
    """Projectors |d><d|^{tensor N}; valid POVM only for antipodal pairs at N=1."""
    return Povm(tuple(np.outer(s.amplitudes, s.amplitudes.conj())
                      for s in (product_state(d, n_spins) for d in dirs.directions)))


def born_joint(spec):
    """Joint p(i, j) = prior(i) * <psi_i| E_j |psi_i>, with labeled axes."""
    probs = np.empty((len(spec.input_set), len(spec.povm)))
    for i, state in enumerate(spec.encodings):
        v = state.amplitudes
        for j, e in enumerate(spec.povm.elements):
            probs[i, j] = np.real(v.conj() @ e @ v)
    probs = np.clip(probs, 0.0, None)
    joint = spec.prior.probabilities[:, None] * probs
    return JointDistribution(joint / joint.sum())


def random_channel_spec(n_spins, sizes, seed):
    """Deterministic-for-seed spec: Haar-random pure encodings and a POVM from
    symmetrically normalized random PSD matrices."""
    ni, nj = sizes
    if not 1 <= n_spins <= MAX_SPINS:
        raise ValueError(f"n_spins must be in [1, {MAX_SPINS}]")
    rng = np.random.default_rng(seed)
    dim = 1 << n_spins

    def unit(v):
        return v / np.linalg.norm(v)

    encodings = tuple(
        PureState(unit(rng.normal(size=dim) + 1j * rng.normal(size=dim)))
        for _ in range(ni))

    raw = []
    for _ in range(nj):
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        raw.append(g @ g.conj().T)
    total = np.sum(raw, axis=0)
    evals, evecs = np.linalg.eigh(total)
    inv_sqrt = evecs @ np.diag(1.0 / np.sqrt(evals)) @ evecs.conj().T
    elements = tuple(inv_sqrt @ a @ inv_sqrt for a in raw)
    # symmetrize away round-off before validation
    elements = tuple(0.5 * (e + e.conj().T) for e in elements)

    prior = rng.dirichlet(np.ones(ni))

    def random_direction():
        v = rng.normal(size=3)
        return Direction.from_array(v)

    return QuantumChannelSpec(
        n_spins=n_spins,
        input_set=DirectionSet(tuple(random_direction() for _ in range(ni))),
        prior=Distribution(prior),
        encodings=encodings,
        povm=Povm(elements),
        guess_set=DirectionSet(tuple(random_direction() for _ in range(nj))),
    )
