"""Discrete entropy, mutual information, Blahut-Arimoto channel capacity,
and the N-bit mutual-information cap satisfied by N-spin measurement stats.

All logarithms are base 2; 0*log(0) is taken as 0.
"""

from dataclasses import dataclass
import json

import numpy as np

_SUM_TOL = 1e-10


@dataclass(frozen=True)
class Distribution:
    """Probability vector over a finite alphabet."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "probabilities", p)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("distribution must be a nonempty vector")
        if np.any(p < 0):
            raise ValueError("negative probability")
        if abs(p.sum() - 1.0) > _SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")

    def __len__(self):
        return self.probabilities.size

    def cdf(self):
        c = np.cumsum(self.probabilities)
        c[-1] = 1.0
        return c


@dataclass(frozen=True)
class JointDistribution:
    """Joint p[i, j] over (input, output) indices, with cached marginals."""

    p: np.ndarray
    input_labels: tuple = None
    output_labels: tuple = None

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "p", p)
        if p.ndim != 2 or p.size == 0:
            raise ValueError("joint distribution must be a nonempty matrix")
        if np.any(p < 0):
            raise ValueError("negative probability in joint")
        if abs(p.sum() - 1.0) > _SUM_TOL:
            raise ValueError(f"joint sums to {p.sum()!r}, not 1")

    @property
    def shape(self):
        return self.p.shape

    def input_marginal(self):
        return Distribution(self.p.sum(axis=1))

    def output_marginal(self):
        return Distribution(self.p.sum(axis=0))

    @classmethod
    def from_conditional(cls, conditional, input_dist):
        """Joint from p(j|i) rows and an input distribution."""
        cond = _check_stochastic(conditional)
        pi = np.asarray(input_dist.probabilities if isinstance(input_dist, Distribution)
                        else input_dist, dtype=float)
        return cls(pi[:, None] * cond)

    def conditional(self):
        """Rows p(j|i); rows with p(i)=0 are left uniform."""
        pi = self.p.sum(axis=1)
        cond = np.full_like(self.p, 1.0 / self.p.shape[1])
        nz = pi > 0
        cond[nz] = self.p[nz] / pi[nz, None]
        return cond

    def to_json(self):
        return json.dumps({
            "matrix": self.p.tolist(),
            "input_labels": list(self.input_labels) if self.input_labels else None,
            "output_labels": list(self.output_labels) if self.output_labels else None,
        })

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(np.array(d["matrix"], dtype=float),
                   tuple(d["input_labels"]) if d.get("input_labels") else None,
                   tuple(d["output_labels"]) if d.get("output_labels") else None)


def _check_stochastic(conditional):
    cond = np.asarray(conditional, dtype=float)
    if cond.ndim != 2 or cond.size == 0:
        raise ValueError("conditional must be a nonempty matrix")
    if np.any(cond < 0) or np.any(np.abs(cond.sum(axis=1) - 1.0) > 1e-9):
        raise ValueError("rows of the conditional must be distributions")
    return cond


def _plogp(p):
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = p[nz] * np.log2(p[nz])
    return out


def entropy(dist):
    """Shannon entropy in bits."""
    if not isinstance(dist, Distribution):
        dist = Distribution(np.asarray(dist, dtype=float))
    return float(-_plogp(dist.probabilities).sum())


def binary_entropy(q):
    return entropy(Distribution(np.array([q, 1.0 - q])))


def conditional_entropy(joint):
    """H(output | input) in bits."""
    pi = joint.p.sum(axis=1)
    h = 0.0
    for i in range(joint.p.shape[0]):
        if pi[i] > 0:
            h += pi[i] * entropy(Distribution(joint.p[i] / pi[i]))
    return h


def mutual_information(joint):
    """I(input; output) in bits; cross-checks the two standard expansions."""
    if not isinstance(joint, JointDistribution):
        joint = JointDistribution(np.asarray(joint, dtype=float))
    via_entropies = entropy(joint.output_marginal()) - conditional_entropy(joint)
    pi = joint.p.sum(axis=1)
    pj = joint.p.sum(axis=0)
    prod = pi[:, None] * pj[None, :]
    nz = joint.p > 0
    via_kl = float((joint.p[nz] * np.log2(joint.p[nz] / prod[nz])).sum())
    if abs(via_entropies - via_kl) > 1e-10:
        raise AssertionError(
            f"mutual information expansions disagree: {via_entropies} vs {via_kl}")
    return via_kl


def channel_capacity(conditional, tolerance=1e-9, max_iter=100_000):
    """Capacity of a discrete memoryless channel p(j|i), in bits.

    Blahut-Arimoto from the uniform input; stops when the standard
    upper/lower capacity bounds are within `tolerance`.  Returns
    (capacity, maximizing input Distribution).
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    w = _check_stochastic(conditional)
    m = w.shape[0]
    r = np.full(m, 1.0 / m)
    wlogw = _plogp(w).sum(axis=1)           # sum_j p(j|i) log p(j|i)
    for _ in range(max_iter):
        q = r @ w                           # output distribution
        # D_i = KL(p(.|i) || q); I(r) = sum r_i D_i <= C <= max_i D_i
        qa = np.where(q > 0, q, 1.0)
        d = wlogw - (w * np.log2(qa)).sum(axis=1)
        lower = float(r @ d)
        upper = float(d.max())
        if upper - lower < tolerance:
            return lower, Distribution(r)
        r = r * np.exp2(d - d.max())
        r /= r.sum()
    raise RuntimeError("Blahut-Arimoto failed to converge")


def holevo_check(joint, n_spins, slack=1e-9):
    """True iff the joint carries at most n_spins bits of mutual information."""
    return mutual_information(joint) <= n_spins + slack
