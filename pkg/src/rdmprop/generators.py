"""Dissipator and Lamb-shift construction for the three master-equation kinds.

Supported generators, all acting on a 1-electron reduced density matrix in
the system eigenbasis:

* ``rme``: full second-order generator with a complex rate for every ordered
  pair of Bohr frequencies.
* ``ume``: frequency-clustered generator; cross terms survive only inside a
  cluster and share one real rate evaluated at the cluster center. With
  singleton clusters this is the secular (Lindblad) limit.
* ``ule``: factorized-rate generator, equivalent to one jump operator per
  coupling operator.

Multiple coupling operators are treated as statistically independent noise
sources: each contributes its own double sum over channel pairs and the
dissipators add. Cross terms between different coupling operators never
appear.

Each kind also has a Pauli-blocked variant where every population-moving
term is scaled by the hole occupancy of the subspaces it fills. Blocking
factors are symmetrized over the two sides of each term so the generator
stays trace-preserving and annihilates the fully filled state exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .bath import BathModel, spectral_function_redfield, spectral_function_ule, \
    ule_lamb_coefficient, ule_rate, xi_integral
from .channels import ChannelSet, FrequencyClusters, cluster, decompose
from .core import CouplingOperator, DimensionError, PhysicalityError, \
    SystemHamiltonian, hermitize, max_norm

# Occupancies may leave [0, chi] by integration error before blocking factors
# clamp; beyond this margin the state is treated as unphysical.
OCCUPANCY_TOL = 1e-6


class MEKind(str, Enum):
    RME = "rme"
    UME = "ume"
    ULE = "ule"


class NonlinearGeneratorError(RuntimeError):
    """A linear-only operation was requested for a Pauli-blocked generator."""


@dataclass(eq=False)
class RateTable:
    """Bath rates evaluated at the union of Bohr frequencies in play.

    The table depends only on the bath and the frequency values, so all
    coupling operators of a generator share one table. ``one_sided`` holds
    the complex half-rate Gamma(w) (rme only); a pair rate is
    Gamma(w) + conj(Gamma(w')). ``center_rate`` and ``center_lamb`` are
    keyed by cluster centers (ume only). ``jump_amplitude`` holds the real
    factorized amplitude sqrt(2 pi J_hat(w)) (ule only) and ``lamb_pairs``
    its principal-value Lamb coefficients keyed by ordered frequency pairs
    that occur in chained channel products.
    """

    kind: MEKind
    bath: BathModel
    gamma_hat: dict[float, float] = field(default_factory=dict)
    one_sided: dict[float, complex] = field(default_factory=dict)
    center_rate: dict[float, float] = field(default_factory=dict)
    center_lamb: dict[float, float] = field(default_factory=dict)
    jump_amplitude: dict[float, float] = field(default_factory=dict)
    lamb_pairs: dict[tuple[float, float], float] = field(default_factory=dict)

    def pair_rate(self, w: float, wp: float,
                  clusters: FrequencyClusters | None = None) -> complex:
        """Coefficient of A_w rho A_wp^dagger in the dissipator."""
        if self.kind is MEKind.RME:
            return self.one_sided[w] + self.one_sided[wp].conjugate()
        if self.kind is MEKind.UME:
            if clusters is None:
                raise ValueError("ume pair rates need frequency clusters")
            ci, cj = clusters.index_of(w), clusters.index_of(wp)
            if ci != cj:
                return 0.0 + 0.0j
            return complex(self.center_rate[clusters.clusters[ci].center])
        return complex(self.jump_amplitude[w] * self.jump_amplitude[wp])

    def diagonal_rate(self, w: float,
                      clusters: FrequencyClusters | None = None) -> float:
        return self.pair_rate(w, w, clusters).real

    def symmetrized(self) -> "RateTable":
        """Table with rates averaged between each frequency and its mirror.

        The even part of the decay rate and the odd part of the level shift
        are kept: Gamma_s(w) = (Gamma(w) + conj(Gamma(-w))) / 2. The result
        satisfies Gamma_s(-w) = conj(Gamma_s(w)) exactly in floating point,
        which makes every pair rate swap-symmetric and the constraint
        residual of the dissipator vanish identically. Lamb pair
        coefficients are copied unchanged; they only enter the commutator
        part of the generator, which preserves the identity regardless.
        """
        table = RateTable(kind=self.kind, bath=self.bath)
        for w in self.gamma_hat:
            m = _mirror_frequency(self.gamma_hat, w)
            table.gamma_hat[w] = 0.5 * (self.gamma_hat[w] + self.gamma_hat[m])
        for w in self.one_sided:
            m = _mirror_frequency(self.one_sided, w)
            table.one_sided[w] = 0.5 * (
                self.one_sided[w] + self.one_sided[m].conjugate())
        for c in self.center_rate:
            m = _mirror_frequency(self.center_rate, c)
            table.center_rate[c] = 0.5 * (
                self.center_rate[c] + self.center_rate[m])
        for c in self.center_lamb:
            m = _mirror_frequency(self.center_lamb, c)
            table.center_lamb[c] = 0.5 * (
                self.center_lamb[c] - self.center_lamb[m])
        for w in self.jump_amplitude:
            m = _mirror_frequency(self.jump_amplitude, w)
            table.jump_amplitude[w] = np.sqrt(0.5 * (
                self.jump_amplitude[w] ** 2 + self.jump_amplitude[m] ** 2))
        table.lamb_pairs = dict(self.lamb_pairs)
        return table


def _mirror_frequency(keys, w: float, tol: float = 1e-9) -> float:
    """Key closest to -w; the value sets come in mirror pairs by construction."""
    best = min(keys, key=lambda k: abs(k + w))
    if abs(best + w) > tol:
        raise ValueError(
            f"no mirror of frequency {w!r} in the rate table within {tol}")
    return best


def _union_frequencies(channel_sets) -> tuple[float, ...]:
    return tuple(sorted({w for ch in channel_sets for w in ch.frequencies}))


def build_rate_table(kind: MEKind, channel_sets, bath: BathModel,
                     clusters: FrequencyClusters | None = None,
                     lamb_shift: bool = False) -> RateTable:
    """Evaluate every bath quantity the chosen generator kind needs.

    ``channel_sets`` is a sequence of ChannelSet; the table covers the union
    of their frequencies. Principal-value integrals are only run where the
    generator actually uses them: rme half-rates always carry one, ume needs
    them at cluster centers only when the Lamb shift is requested, and ule
    only for Lamb pairs.
    """
    if isinstance(channel_sets, ChannelSet):
        channel_sets = (channel_sets,)
    table = RateTable(kind=kind, bath=bath)
    freqs = _union_frequencies(channel_sets)
    for w in freqs:
        table.gamma_hat[w] = spectral_function_ule(w, bath)

    if kind is MEKind.RME:
        for w in freqs:
            table.one_sided[w] = spectral_function_redfield(w, bath)
    elif kind is MEKind.UME:
        if clusters is None:
            raise ValueError("ume rate table needs frequency clusters")
        for c in clusters.clusters:
            table.center_rate[c.center] = 2.0 * np.pi * spectral_function_ule(
                c.center, bath)
            if lamb_shift:
                table.center_lamb[c.center] = xi_integral(c.center, bath)
    else:
        for w in freqs:
            table.jump_amplitude[w] = ule_rate(w, bath)
        if lamb_shift:
            pairs = set()
            for ch in channel_sets:
                for b1 in ch.blocks:
                    for b2 in ch.blocks:
                        if b1.source == b2.target:
                            pairs.add((b1.frequency, b2.frequency))
            for (w1, w2) in sorted(pairs):
                table.lamb_pairs[(w1, w2)] = ule_lamb_coefficient(w1, w2, bath)
    return table


@dataclass(eq=False)
class GeneratorSpec:
    """Everything needed to apply one master-equation generator.

    ``channel_sets`` holds one ChannelSet per coupling operator; the
    dissipator is the sum of the per-operator dissipators.
    """

    kind: MEKind
    channel_sets: tuple[ChannelSet, ...]
    rates: RateTable
    chi: float
    pauli_blocked: bool = False
    lamb_shift: bool = False
    clusters: FrequencyClusters | None = None

    def __post_init__(self):
        self.kind = MEKind(self.kind)
        if isinstance(self.channel_sets, ChannelSet):
            self.channel_sets = (self.channel_sets,)
        self.channel_sets = tuple(self.channel_sets)
        if not self.channel_sets:
            raise ValueError("at least one channel set is required")
        dims = {ch.dim for ch in self.channel_sets}
        if len(dims) != 1:
            raise DimensionError("channel sets differ in dimension")
        if self.chi <= 0:
            raise ValueError("chi must be positive")
        self.chi = float(self.chi)
        if self.kind is MEKind.UME and self.clusters is None:
            raise ValueError("ume generators need frequency clusters")
        for d in (self.rates.gamma_hat, self.rates.one_sided,
                  self.rates.center_rate, self.rates.center_lamb,
                  self.rates.jump_amplitude, self.rates.lamb_pairs):
            for v in d.values():
                if not np.all(np.isfinite([np.real(v), np.imag(v)])):
                    raise ValueError("rate table contains non-finite entries")
        self._lamb_cache: np.ndarray | None = None
        self._terms_cache: tuple[TTensorTerm, ...] | None = None

    @property
    def dim(self) -> int:
        return self.channel_sets[0].dim

    @property
    def subspaces(self) -> tuple[tuple[int, ...], ...]:
        return self.channel_sets[0].subspaces

    @property
    def frequencies(self) -> tuple[float, ...]:
        """Sorted union of the Bohr frequencies of all coupling operators."""
        return _union_frequencies(self.channel_sets)

    def coupling_sum(self) -> np.ndarray:
        """Sum of all coupling operators in the eigenbasis."""
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for ch in self.channel_sets:
            total = total + ch.coupling_sum()
        return total

    def operator(self, frequency: float) -> np.ndarray:
        """Sum over coupling operators of their channel at one frequency."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for ch in self.channel_sets:
            if frequency in ch.frequencies:
                out = out + ch.operator(frequency)
        return out

    def pair_rate(self, w: float, wp: float) -> complex:
        return self.rates.pair_rate(w, wp, self.clusters)

    def symmetrized(self) -> "GeneratorSpec":
        """Same channels and flags, mirror-symmetrized rate table."""
        return GeneratorSpec(
            kind=self.kind, channel_sets=self.channel_sets,
            rates=self.rates.symmetrized(), chi=self.chi,
            pauli_blocked=self.pauli_blocked, lamb_shift=self.lamb_shift,
            clusters=self.clusters)

    def lamb_hamiltonian(self) -> np.ndarray:
        if self._lamb_cache is None:
            self._lamb_cache = lamb_shift_hamiltonian(self)
        return self._lamb_cache

    def ttensor_terms(self) -> tuple["TTensorTerm", ...]:
        if self._terms_cache is None:
            self._terms_cache = ttensor_terms(self)
        return self._terms_cache


def build_generator(h: SystemHamiltonian, coupling, bath: BathModel,
                    kind: MEKind | str, chi: float,
                    clustering_threshold: float | None = None,
                    pauli_blocked: bool = False,
                    lamb_shift: bool = False,
                    drop_tol: float = 1e-12) -> GeneratorSpec:
    """Decompose, cluster, and rate-evaluate in one call.

    ``coupling`` may be a single CouplingOperator or a sequence; each
    operator becomes an independent noise source with its own channel set.
    Clustering and the rate table run over the union of all frequencies.
    """
    if isinstance(coupling, CouplingOperator):
        ops = [coupling]
    else:
        ops = list(coupling)
        if not ops:
            raise ValueError("at least one coupling operator is required")
    for op in ops[1:]:
        if op.dim != ops[0].dim:
            raise DimensionError("coupling operators differ in dimension")

    kind = MEKind(kind)
    channel_sets = tuple(decompose(h, op, drop_tol=drop_tol) for op in ops)
    clusters = None
    if kind is MEKind.UME:
        if clustering_threshold is None:
            raise ValueError("ume generators need a clustering threshold")
        clusters = cluster(_union_frequencies(channel_sets),
                           clustering_threshold)
    rates = build_rate_table(kind, channel_sets, bath, clusters, lamb_shift)
    return GeneratorSpec(kind=kind, channel_sets=channel_sets, rates=rates,
                         chi=chi, pauli_blocked=pauli_blocked,
                         lamb_shift=lamb_shift, clusters=clusters)


@dataclass(frozen=True, eq=False)
class HoleSystem:
    """Hole-picture Hamiltonian and generator, in particle-eigenbasis coordinates."""

    hamiltonian: SystemHamiltonian
    spec: GeneratorSpec


def particle_hole_transform(h: SystemHamiltonian,
                            spec: GeneratorSpec) -> HoleSystem:
    """Build the generator the same construction assigns to the hole picture.

    Working in the particle eigenbasis, the hole Hamiltonian is -diag(E)
    (levels reordered ascending by an exact permutation) and each hole
    coupling operator is the transpose of the matching eigenbasis coupling.
    Bath, kind, chi, clustering threshold, blocking, and Lamb flag carry
    over unchanged. The returned system treats the particle eigenbasis as
    its own original basis.
    """
    energies = h.energies
    order = np.argsort(-energies, kind="stable")
    hole_energies = (-energies)[order]
    perm = np.eye(h.dim, dtype=complex)[:, order]
    h_hole = SystemHamiltonian(hole_energies, perm,
                               degeneracy_tol=h.degeneracy_tol)
    a_hole = [CouplingOperator(f"hole:{ch.label}", ch.coupling_sum().T.copy())
              for ch in spec.channel_sets]
    threshold = spec.clusters.threshold if spec.clusters is not None else None
    spec_hole = build_generator(
        h_hole, a_hole, spec.rates.bath, spec.kind, spec.chi,
        clustering_threshold=threshold, pauli_blocked=spec.pauli_blocked,
        lamb_shift=spec.lamb_shift)
    return HoleSystem(hamiltonian=h_hole, spec=spec_hole)


def _check_state(rho: np.ndarray, dim: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise DimensionError(f"state shape {rho.shape} does not match dim {dim}")
    return rho


def _double_sum(rho: np.ndarray, spec: GeneratorSpec) -> np.ndarray:
    """Sum rate(w, w') (A_w rho A_w'^+ - 1/2 {A_w'^+ A_w, rho}) over the
    channel pairs of each coupling operator in turn."""
    out = np.zeros_like(rho)
    for ch in spec.channel_sets:
        for wp, ap in zip(ch.frequencies, ch.operators):
            apd = ap.conj().T
            for w, aw in zip(ch.frequencies, ch.operators):
                r = spec.pair_rate(w, wp)
                if r == 0:
                    continue
                sandwich = aw @ rho @ apd
                anti = apd @ aw
                out += r * (sandwich - 0.5 * (anti @ rho + rho @ anti))
    return out


def dissipator_rme(rho: np.ndarray, spec: GeneratorSpec) -> np.ndarray:
    """Full pair-summed dissipator with complex Redfield rates."""
    if spec.kind is not MEKind.RME:
        raise ValueError("generator kind is not rme")
    return _double_sum(_check_state(rho, spec.dim), spec)


def dissipator_ume(rho: np.ndarray, spec: GeneratorSpec) -> np.ndarray:
    """Cluster-secular dissipator; cross terms only inside a cluster."""
    if spec.kind is not MEKind.UME:
        raise ValueError("generator kind is not ume")
    return _double_sum(_check_state(rho, spec.dim), spec)


def ule_jump_operators(spec: GeneratorSpec) -> tuple[np.ndarray, ...]:
    """One jump operator L = sum_w sqrt(2 pi J_hat(w)) A_w per coupling."""
    if spec.kind is not MEKind.ULE:
        raise ValueError("generator kind is not ule")
    jumps = []
    for ch in spec.channel_sets:
        out = np.zeros((spec.dim, spec.dim), dtype=complex)
        for w, aw in zip(ch.frequencies, ch.operators):
            out += spec.rates.jump_amplitude[w] * aw
        jumps.append(out)
    return tuple(jumps)


def dissipator_ule(rho: np.ndarray, spec: GeneratorSpec,
                   form: str = "jump") -> np.ndarray:
    """Factorized-rate dissipator.

    ``form="jump"`` applies one Lindblad jump operator per coupling
    operator; ``form="double"`` evaluates the equivalent pair sums term by
    term. Both agree to rounding and exist as independent routes for
    cross-checks.
    """
    if spec.kind is not MEKind.ULE:
        raise ValueError("generator kind is not ule")
    rho = _check_state(rho, spec.dim)
    if form == "double":
        return _double_sum(rho, spec)
    if form != "jump":
        raise ValueError(f"unknown ule dissipator form {form!r}")
    out = np.zeros_like(rho)
    for jump in ule_jump_operators(spec):
        jd = jump.conj().T
        anti = jd @ jump
        out += jump @ rho @ jd - 0.5 * (anti @ rho + rho @ anti)
    return out


@dataclass(frozen=True, eq=False)
class TTensorTerm:
    """One sandwich term B_left rho B_right^+ with its blocking assignment.

    ``i, j`` are the target and source subspaces of the left block and
    ``l, k`` of the right block. ``blocked_by`` names the subspaces whose
    hole occupancy scales this term, one entry per side (None for a side
    that is exempt: diagonal blocks never block, and for the unified kind
    any block in the zero-frequency cluster is exempt).
    """

    i: int
    j: int
    l: int
    k: int
    coefficient: complex
    blocked_by: tuple[int | None, int | None]
    left: np.ndarray
    right: np.ndarray


def _blockable(block, spec: GeneratorSpec) -> bool:
    if block.is_diagonal:
        return False
    if spec.kind is MEKind.UME:
        zc = spec.clusters.zero_cluster_index
        if zc is not None and spec.clusters.index_of(block.frequency) == zc:
            return False
    return True


def ttensor_terms(spec: GeneratorSpec) -> tuple[TTensorTerm, ...]:
    """Expand the dissipator into per-block sandwich terms.

    Terms with an exactly zero rate are dropped. The expansion is over
    eigen-subspace blocks rather than whole channels so each term has a
    well-defined pair of target subspaces for Pauli blocking.
    """
    terms = []
    for ch in spec.channel_sets:
        for p in ch.blocks:
            for q in ch.blocks:
                r = spec.pair_rate(p.frequency, q.frequency)
                if r == 0:
                    continue
                key = (p.target if _blockable(p, spec) else None,
                       q.target if _blockable(q, spec) else None)
                terms.append(TTensorTerm(i=p.target, j=p.source, l=q.target,
                                         k=q.source, coefficient=r,
                                         blocked_by=key, left=p.op,
                                         right=q.op))
    return tuple(terms)


def subspace_occupancies(rho: np.ndarray, spec: GeneratorSpec) -> np.ndarray:
    """Per-subspace occupancy: trace over the subspace divided by its size.

    Degenerate levels share a single occupancy so the blocking factor cannot
    split a degenerate multiplet.
    """
    occ = np.empty(len(spec.subspaces))
    for s, idx in enumerate(spec.subspaces):
        occ[s] = np.real(np.trace(rho[np.ix_(idx, idx)])) / len(idx)
    return occ


def blocking_factors(rho: np.ndarray, spec: GeneratorSpec,
                     occupancy_tol: float = OCCUPANCY_TOL) -> np.ndarray:
    """Hole occupancy chi - <n> per subspace, clamped at zero.

    Raises PhysicalityError if any occupancy lies outside [0, chi] by more
    than ``occupancy_tol``.
    """
    occ = subspace_occupancies(rho, spec)
    if np.any(occ < -occupancy_tol) or np.any(occ > spec.chi + occupancy_tol):
        raise PhysicalityError(
            f"subspace occupancies {occ} outside [0, {spec.chi}]")
    return np.clip(spec.chi - occ, 0.0, None)


def dissipator_blocked(rho: np.ndarray, spec: GeneratorSpec,
                       occupancy_tol: float = OCCUPANCY_TOL) -> np.ndarray:
    """Pauli-blocked dissipator.

    Every sandwich term is scaled by sqrt(f_i * f_l) where f is the hole
    occupancy of the subspace each side fills (factor 1 for exempt sides).
    The square-root split keeps the generator Hermiticity-preserving and
    trace-preserving and makes it annihilate rho = chi * identity exactly.
    """
    rho = _check_state(rho, spec.dim)
    f = blocking_factors(rho, spec, occupancy_tol)
    # each side contributes sqrt(f) of its own target, so the factor is
    # symmetric under swapping the two sides and the diagonal-rate terms
    # (both sides the same block) carry one full power of f
    root = np.sqrt(f)
    out = np.zeros_like(rho)
    for t in spec.ttensor_terms():
        bi, bl = t.blocked_by
        factor = (root[bi] if bi is not None else 1.0) \
            * (root[bl] if bl is not None else 1.0)
        rd = t.right.conj().T
        anti = rd @ t.left
        out += (t.coefficient * factor) * (
            t.left @ rho @ rd - 0.5 * (anti @ rho + rho @ anti))
    return out


def dissipator_action(rho: np.ndarray, spec: GeneratorSpec) -> np.ndarray:
    """Dispatch to the dissipator matching the generator spec."""
    if spec.pauli_blocked:
        return dissipator_blocked(rho, spec)
    if spec.kind is MEKind.RME:
        return dissipator_rme(rho, spec)
    if spec.kind is MEKind.UME:
        return dissipator_ume(rho, spec)
    return dissipator_ule(rho, spec)


def lamb_shift_hamiltonian(spec: GeneratorSpec) -> np.ndarray:
    """Hermitian level-shift operator for the generator kind.

    rme: sum over frequency pairs of S(w, w') A_w'^+ A_w with the
    principal-value coefficient S = (Gamma(w) - Gamma(w')^*) / 2i.
    ume: the same restricted to pairs inside one cluster, with S evaluated
    at the cluster center. ule: chained block products weighted by the
    factorized principal-value coefficient. Coupling operators contribute
    independently; no cross products between different couplings appear.
    """
    d = spec.dim
    out = np.zeros((d, d), dtype=complex)
    if spec.kind is MEKind.RME:
        for ch in spec.channel_sets:
            for wp, ap in zip(ch.frequencies, ch.operators):
                gp = spec.rates.one_sided[wp].conjugate()
                for w, aw in zip(ch.frequencies, ch.operators):
                    s = (spec.rates.one_sided[w] - gp) / 2j
                    out += s * (ap.conj().T @ aw)
    elif spec.kind is MEKind.UME:
        if not spec.rates.center_lamb and spec.frequencies:
            raise ValueError("rate table was built without Lamb coefficients")
        for ch in spec.channel_sets:
            for c in spec.clusters.clusters:
                s = spec.rates.center_lamb[c.center]
                members = [w for w in c.members if w in ch.frequencies]
                for wp in members:
                    ap = ch.operator(wp)
                    for w in members:
                        out += s * (ap.conj().T @ ch.operator(w))
    else:
        if not spec.rates.lamb_pairs and any(
                ch.blocks for ch in spec.channel_sets):
            raise ValueError("rate table was built without Lamb coefficients")
        for ch in spec.channel_sets:
            for b1 in ch.blocks:
                for b2 in ch.blocks:
                    if b1.source != b2.target:
                        continue
                    s = spec.rates.lamb_pairs[(b1.frequency, b2.frequency)]
                    out += s * (b1.op @ b2.op)
    if max_norm(out - out.conj().T) > 1e-10:
        raise RuntimeError("Lamb-shift construction lost Hermiticity")
    return hermitize(out)


def liouvillian_action(rho: np.ndarray, h: SystemHamiltonian,
                       spec: GeneratorSpec) -> np.ndarray:
    """Right-hand side of the master equation in the eigenbasis.

    -i [H + H_LS, rho] + dissipator(rho), with H diagonal. The Lamb shift is
    included only when the spec was built with lamb_shift=True.
    """
    if h.dim != spec.dim:
        raise DimensionError("Hamiltonian and generator dimensions differ")
    rho = _check_state(rho, spec.dim)
    heff = np.diag(h.energies).astype(complex)
    if spec.lamb_shift:
        heff = heff + spec.lamb_hamiltonian()
    out = -1j * (heff @ rho - rho @ heff)
    return out + dissipator_action(rho, spec)


def superoperator_matrix(h: SystemHamiltonian, spec: GeneratorSpec) -> np.ndarray:
    """Dense complex matrix of the generator on column-stacked states.

    Built directly from Kronecker products, independent of the action-based
    route, so the two can cross-check each other. Raises for Pauli-blocked
    specs, whose generator is not a linear map.
    """
    if spec.pauli_blocked:
        raise NonlinearGeneratorError(
            "Pauli-blocked generators have no superoperator matrix")
    d = spec.dim
    eye = np.eye(d)
    heff = np.diag(h.energies).astype(complex)
    if spec.lamb_shift:
        heff = heff + spec.lamb_hamiltonian()
    sup = -1j * (np.kron(eye, heff) - np.kron(heff.T, eye))
    for ch in spec.channel_sets:
        for wp, ap in zip(ch.frequencies, ch.operators):
            apd = ap.conj().T
            for w, aw in zip(ch.frequencies, ch.operators):
                r = spec.pair_rate(w, wp)
                if r == 0:
                    continue
                anti = apd @ aw
                sup = sup + r * (np.kron(apd.T, aw)
                                 - 0.5 * (np.kron(eye, anti)
                                          + np.kron(anti.T, eye)))
    return sup
