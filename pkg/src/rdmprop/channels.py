"""Bohr-frequency channel decomposition and frequency clustering.

A Hermitian coupling operator is split in the system eigenbasis into channel
operators, one per Bohr frequency (difference of eigen-subspace energies).
Summing all channels returns the operator. For the unified master equation,
nearby Bohr frequencies are grouped into clusters that share one decay rate
evaluated at the cluster center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CouplingOperator, DimensionError, SystemHamiltonian, max_norm

# Guard for float dust when a frequency gap lands exactly on the clustering
# threshold (the benzene example needs gap 0.091 to join a 0.091 cluster).
_CLUSTER_GAP_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class ChannelBlock:
    """One eigen-subspace block of a coupling operator.

    ``op`` is a full-dimension matrix whose only nonzero entries connect the
    target (row) and source (column) subspaces. The block moves population
    from the source subspace into the target subspace, and its frequency is
    e_source - e_target (positive for emission).
    """

    target: int
    source: int
    frequency: float
    op: np.ndarray

    @property
    def is_diagonal(self) -> bool:
        return self.target == self.source


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """Channel operators of one coupling operator, in the eigenbasis."""

    frequencies: tuple[float, ...]
    operators: tuple[np.ndarray, ...]
    blocks: tuple[ChannelBlock, ...]
    subspaces: tuple[tuple[int, ...], ...]
    subspace_energies: np.ndarray
    dim: int
    degeneracy_tol: float
    label: str = ""

    def operator(self, frequency: float) -> np.ndarray:
        try:
            return self.operators[self.frequencies.index(frequency)]
        except ValueError:
            raise KeyError(f"no channel at frequency {frequency!r}") from None

    def coupling_sum(self) -> np.ndarray:
        """Sum of all channels; reconstructs the eigenbasis coupling operator."""
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for op in self.operators:
            total = total + op
        return total

    @property
    def zero_index(self) -> int | None:
        for k, f in enumerate(self.frequencies):
            if f == 0.0:
                return k
        return None


def decompose(h: SystemHamiltonian, a: CouplingOperator,
              drop_tol: float = 1e-12) -> ChannelSet:
    """Split a coupling operator into Bohr-frequency channels.

    Channels are computed in the eigenbasis of ``h``. Frequencies that agree
    within ``h.degeneracy_tol`` are merged (their operators summed) and a
    merged frequency within the tolerance of zero is snapped to exactly 0.0.
    Blocks with max-norm below ``drop_tol`` are dropped.
    """
    if h.dim != a.dim:
        raise DimensionError(f"dimension mismatch: H is {h.dim}, A is {a.dim}")
    a_eig = h.to_eigenbasis(a.matrix)
    groups = h.degenerate_groups
    energies = h.subspace_energies

    raw: list[ChannelBlock] = []
    for i, gi in enumerate(groups):
        for j, gj in enumerate(groups):
            block = np.zeros((h.dim, h.dim), dtype=complex)
            block[np.ix_(gi, gj)] = a_eig[np.ix_(gi, gj)]
            if max_norm(block) < drop_tol:
                continue
            raw.append(ChannelBlock(i, j, float(energies[j] - energies[i]), block))

    raw.sort(key=lambda b: b.frequency)
    merged: list[list[ChannelBlock]] = []
    for blk in raw:
        if merged and blk.frequency - merged[-1][-1].frequency <= h.degeneracy_tol:
            merged[-1].append(blk)
        else:
            merged.append([blk])

    freqs: list[float] = []
    ops: list[np.ndarray] = []
    blocks: list[ChannelBlock] = []
    for group in merged:
        f = float(np.mean([b.frequency for b in group]))
        if abs(f) <= h.degeneracy_tol:
            f = 0.0
        freqs.append(f)
        op = np.zeros((h.dim, h.dim), dtype=complex)
        for b in group:
            op += b.op
            blocks.append(ChannelBlock(b.target, b.source, f, b.op))
        ops.append(op)

    channels = ChannelSet(
        frequencies=tuple(freqs),
        operators=tuple(ops),
        blocks=tuple(blocks),
        subspaces=groups,
        subspace_energies=energies,
        dim=h.dim,
        degeneracy_tol=h.degeneracy_tol,
        label=a.label,
    )
    # completeness can only be broken by the drop tolerance
    bound = 1e-10 + drop_tol * max(len(raw), 1)
    if max_norm(channels.coupling_sum() - a_eig) > bound:
        raise RuntimeError("channel decomposition failed completeness check")
    return channels


@dataclass(frozen=True, eq=False)
class Cluster:
    members: tuple[float, ...]
    center: float


@dataclass(frozen=True, eq=False)
class FrequencyClusters:
    """Partition of Bohr frequencies into gap-bounded clusters."""

    clusters: tuple[Cluster, ...]
    threshold: float

    @property
    def zero_cluster_index(self) -> int | None:
        """Index of the cluster containing frequency 0, if any."""
        for k, c in enumerate(self.clusters):
            if any(abs(m) < _CLUSTER_GAP_EPS for m in c.members):
                return k
        return None

    def index_of(self, frequency: float) -> int:
        for k, c in enumerate(self.clusters):
            if frequency in c.members:
                return k
        raise KeyError(f"frequency {frequency!r} is not in any cluster")

    def center_of(self, frequency: float) -> float:
        return self.clusters[self.index_of(frequency)].center

    @property
    def centers(self) -> tuple[float, ...]:
        return tuple(c.center for c in self.clusters)


def cluster(frequencies, threshold: float) -> FrequencyClusters:
    """Greedy left-to-right agglomeration of sorted frequencies.

    A new cluster starts whenever the gap to the previous frequency exceeds
    the threshold. The center is the plain arithmetic mean of the members.
    Threshold 0 yields singleton clusters (the secular limit). Clustering runs
    over the full signed axis, so mirror clusters form symmetrically.
    """
    if threshold < 0:
        raise ValueError("clustering threshold must be nonnegative")
    freqs = sorted(float(f) for f in frequencies)
    if len(set(freqs)) != len(freqs):
        raise ValueError("frequencies must be distinct")
    groups: list[list[float]] = []
    for f in freqs:
        if groups and f - groups[-1][-1] <= threshold + _CLUSTER_GAP_EPS:
            groups[-1].append(f)
        else:
            groups.append([f])
    clusters = tuple(Cluster(tuple(g), float(np.mean(g))) for g in groups)
    return FrequencyClusters(clusters=clusters, threshold=float(threshold))
