"""Representability audits for 1-RDM master equations.

A CPTP-consistent generator must annihilate the fully filled state
chi * identity; equivalently the 1-particle and 1-hole pictures must stay
exact complements of each other. This module measures how badly a generator
breaks that (algebraically and along trajectories) and runs the two-picture
co-propagation test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import propagate as _prop
from .core import DimensionError, OneRdm, SystemHamiltonian, max_norm
from .generators import GeneratorSpec, dissipator_action, liouvillian_action, \
    particle_hole_transform


@dataclass(frozen=True, eq=False)
class ChannelAsymmetry:
    """Net unitality contribution of one emission/absorption channel pair."""

    frequency: float
    rate_asymmetry: complex
    contribution_norm: float


@dataclass(frozen=True, eq=False)
class ConstraintReport:
    """Unitality audit of a linear generator.

    ``residual_matrix`` is the full dissipator applied to the filled state,
    divided by chi so the number is filling-independent. ``per_channel``
    decomposes the commutator part into emission/absorption rate asymmetries,
    one entry per positive Bohr frequency; ``pair_sum_norm`` is the norm of
    that decomposition alone (it omits any cross-frequency contributions,
    which the full residual includes).
    """

    residual_matrix: np.ndarray
    residual_norm: float
    per_channel: tuple[ChannelAsymmetry, ...]
    pair_sum_norm: float
    satisfied: bool
    tol: float


def constraint_residual(h: SystemHamiltonian, spec: GeneratorSpec,
                        tol: float = 1e-10) -> ConstraintReport:
    """Evaluate the filled-state residual of a linear generator.

    Raises ValueError for Pauli-blocked specs; those are unital by
    construction and should be checked with unitality_residual instead.
    """
    if spec.pauli_blocked:
        raise ValueError("constraint_residual audits linear generators; "
                         "use unitality_residual for blocked specs")
    filled = spec.chi * np.eye(spec.dim, dtype=complex)
    residual = dissipator_action(filled, spec) / spec.chi

    entries = []
    pair_sum = np.zeros((spec.dim, spec.dim), dtype=complex)
    freqs = spec.frequencies
    for w in freqs:
        if w <= 0:
            continue
        comm = np.zeros((spec.dim, spec.dim), dtype=complex)
        for ch in spec.channel_sets:
            if w not in ch.frequencies:
                continue
            aw = ch.operator(w)
            comm += aw @ aw.conj().T - aw.conj().T @ aw
        down = spec.pair_rate(w, w)
        up = spec.pair_rate(-w, -w) if -w in freqs else 0.0
        asym = down - up
        contribution = asym * comm
        pair_sum += contribution
        entries.append(ChannelAsymmetry(
            frequency=w,
            rate_asymmetry=complex(asym),
            contribution_norm=max_norm(contribution)))

    norm = max_norm(residual)
    return ConstraintReport(
        residual_matrix=residual,
        residual_norm=norm,
        per_channel=tuple(entries),
        pair_sum_norm=max_norm(pair_sum),
        satisfied=bool(norm < tol),
        tol=tol,
    )


def unitality_residual(h: SystemHamiltonian, spec: GeneratorSpec) -> float:
    """Max-norm of the generator applied to the fully filled state.

    Zero (to rounding) exactly when the generator is unital. Works for both
    linear and Pauli-blocked generators.
    """
    filled = spec.chi * np.eye(spec.dim, dtype=complex)
    return max_norm(liouvillian_action(filled, h, spec))


def copropagate_hole(q0, h: SystemHamiltonian, spec: GeneratorSpec,
                     schedule=None, particle_trajectory=None):
    """Propagate the 1-hole RDM under the hole-picture generator.

    The hole generator comes from applying the same master-equation
    construction to the hole system (negated spectrum, transposed coupling,
    identical bath). The returned trajectory carries the co-propagation
    defect ||q(t) - (chi - rho(t))||_max against the particle trajectory,
    which is propagated here from rho0 = chi*1 - q0 when not supplied.

    ``q0`` is the initial hole RDM in the same (original) basis as particle
    states; its spectrum must lie in [0, chi].
    """
    if isinstance(q0, OneRdm):
        q0 = q0.data
    q0 = np.asarray(q0, dtype=complex)
    if q0.shape != (h.dim, h.dim):
        raise DimensionError(f"hole state shape {q0.shape} does not match "
                             f"dimension {h.dim}")

    if particle_trajectory is None:
        rho0 = spec.chi * np.eye(h.dim) - q0
        particle_trajectory = _prop.propagate_state(h, spec, rho0, schedule)
    times = particle_trajectory.times

    hole = particle_hole_transform(h, spec)
    v = h.eigenvectors
    sigma0 = (v.conj().T @ q0 @ v).T.copy()
    hole_traj = _prop.propagate_state(hole.hamiltonian, hole.spec, sigma0,
                                      schedule, t_eval=times)

    # hole states come back in particle-eigenbasis coordinates
    q_eig = np.transpose(hole_traj.states, (0, 2, 1))
    q_states = np.einsum("ij,tjk,lk->til", v, q_eig, v.conj())
    populations = np.real(np.einsum("tii->ti", q_eig))

    complement = spec.chi * np.eye(h.dim) - particle_trajectory.states
    defect = np.array([max_norm(q_states[k] - complement[k])
                       for k in range(len(times))])

    metadata = dict(hole_traj.metadata)
    metadata.update({"picture": "hole", "kind": spec.kind.value,
                     "pauli_blocked": spec.pauli_blocked})
    return _prop.Trajectory(times=times, states=q_states,
                            populations=populations, chi=spec.chi,
                            metadata=metadata, defect=defect)


@dataclass(frozen=True, eq=False)
class TrajectoryAudit:
    """Physicality summary of a propagated trajectory."""

    min_eigenvalue: float
    max_eigenvalue: float
    max_trace_drift: float
    max_hermiticity_defect: float
    first_violation_time: float | None
    violation: bool
    chi: float
    tol: float


def audit_trajectory(traj, tol: float = 1e-6) -> TrajectoryAudit:
    """Scan every stored state for spectrum, trace, and Hermiticity drift.

    A state violates when an eigenvalue leaves [-tol, chi + tol]. Trace
    drift is measured against the initial state.
    """
    chi = traj.chi
    lo = np.inf
    hi = -np.inf
    first_violation = None
    trace0 = np.real(np.trace(traj.states[0]))
    max_drift = 0.0
    max_herm = 0.0
    for k, state in enumerate(traj.states):
        herm = max_norm(state - state.conj().T)
        max_herm = max(max_herm, herm)
        eigs = np.linalg.eigvalsh(0.5 * (state + state.conj().T))
        lo = min(lo, eigs[0])
        hi = max(hi, eigs[-1])
        max_drift = max(max_drift, abs(np.real(np.trace(state)) - trace0))
        if first_violation is None and (eigs[0] < -tol or eigs[-1] > chi + tol):
            first_violation = float(traj.times[k])
    return TrajectoryAudit(
        min_eigenvalue=float(lo),
        max_eigenvalue=float(hi),
        max_trace_drift=float(max_drift),
        max_hermiticity_defect=float(max_herm),
        first_violation_time=first_violation,
        violation=first_violation is not None,
        chi=chi,
        tol=tol,
    )
