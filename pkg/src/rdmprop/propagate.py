"""Time propagation of 1-RDM master equations.

States are packed into a real vector (diagonal, then scaled real and
imaginary upper-triangle parts) so the integrator works on a real ODE whose
flow preserves Hermiticity exactly. Linear generators become a single dense
real matrix; Pauli-blocked generators become a short sum of such matrices
weighted by state-dependent blocking factors.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .core import DimensionError, OneRdm, PhysicalityError, SystemHamiltonian
from .generators import GeneratorSpec, NonlinearGeneratorError, \
    liouvillian_action, superoperator_matrix

_SQRT2 = np.sqrt(2.0)


class StiffnessError(RuntimeError):
    """The ODE solver failed to reach the end of the requested interval."""


def pack_hermitian(m: np.ndarray) -> np.ndarray:
    """Map a Hermitian matrix to a real vector isometrically.

    Layout: d diagonal entries, then sqrt(2) * real upper triangle, then
    sqrt(2) * imaginary upper triangle (row-major order of the triangle).
    The scaling makes the map preserve the Frobenius inner product.
    """
    m = np.asarray(m)
    d = m.shape[0]
    iu = np.triu_indices(d, 1)
    upper = m[iu]
    return np.concatenate([np.real(np.diag(m)),
                           _SQRT2 * np.real(upper),
                           _SQRT2 * np.imag(upper)])


def unpack_hermitian(y: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of pack_hermitian."""
    y = np.asarray(y, dtype=float)
    if y.size != dim * dim:
        raise DimensionError(f"packed length {y.size} does not match "
                             f"dimension {dim}")
    iu = np.triu_indices(dim, 1)
    k = iu[0].size
    upper = (y[dim:dim + k] + 1j * y[dim + k:]) / _SQRT2
    m = np.diag(y[:dim].astype(complex))
    m[iu] = upper
    m[(iu[1], iu[0])] = np.conj(upper)
    return m


def _packed_matrix(action, dim: int) -> np.ndarray:
    """Real matrix of a Hermiticity-preserving linear map in the packed basis."""
    n = dim * dim
    g = np.empty((n, n))
    for col in range(n):
        e = np.zeros(n)
        e[col] = 1.0
        g[:, col] = pack_hermitian(action(unpack_hermitian(e, dim)))
    return g


def build_packed_generator(h: SystemHamiltonian,
                           spec: GeneratorSpec) -> np.ndarray:
    """Dense real matrix of a linear generator on packed eigenbasis states."""
    if spec.pauli_blocked:
        raise NonlinearGeneratorError(
            "Pauli-blocked generators are state-dependent; "
            "use build_blocked_rhs")
    return _packed_matrix(lambda rho: liouvillian_action(rho, h, spec), h.dim)


def _sandwich_action(terms):
    def action(rho):
        out = np.zeros_like(rho)
        for t in terms:
            rd = t.right.conj().T
            anti = rd @ t.left
            out += t.coefficient * (
                t.left @ rho @ rd - 0.5 * (anti @ rho + rho @ anti))
        return out
    return action


def build_blocked_rhs(h: SystemHamiltonian, spec: GeneratorSpec):
    """Right-hand side of a Pauli-blocked equation on packed vectors.

    Terms are grouped by their blocking assignment; each group is a fixed
    real matrix whose weight sqrt(f_i) * sqrt(f_l) is recomputed from the
    subspace occupancies carried in the first d packed components. Factors
    are clamped at zero instead of raising, so the integrator can survive
    harmless rounding excursions; physicality is audited on the stored
    trajectory afterwards.
    """
    if not spec.pauli_blocked:
        raise ValueError("generator spec is not Pauli-blocked")
    d = h.dim

    groups: dict[tuple, list] = {}
    for t in spec.ttensor_terms():
        groups.setdefault(t.blocked_by, []).append(t)

    heff = np.diag(h.energies).astype(complex)
    if spec.lamb_shift:
        heff = heff + spec.lamb_hamiltonian()

    def unitary_action(rho):
        return -1j * (heff @ rho - rho @ heff)

    g0 = _packed_matrix(unitary_action, d)
    free = groups.pop((None, None), None)
    if free is not None:
        g0 = g0 + _packed_matrix(_sandwich_action(free), d)

    keys = list(groups)
    mats = [_packed_matrix(_sandwich_action(groups[k]), d) for k in keys]
    subspace_index = [np.asarray(idx) for idx in spec.subspaces]
    chi = spec.chi

    def rhs(t, y):
        occ = np.array([y[idx].sum() / idx.size for idx in subspace_index])
        root = np.sqrt(np.clip(chi - occ, 0.0, None))
        dy = g0 @ y
        for key, mat in zip(keys, mats):
            bi, bl = key
            factor = (root[bi] if bi is not None else 1.0) \
                * (root[bl] if bl is not None else 1.0)
            if factor != 0.0:
                dy += factor * (mat @ y)
        return dy

    return rhs


@dataclass
class Schedule:
    """Integration window and solver settings."""

    t_end: float | None = None
    samples: int = 400
    rtol: float = 1e-9
    atol: float = 1e-11
    method: str = "DOP853"

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError("samples must be at least 2")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.t_end is not None and self.t_end <= 0:
            raise ValueError("t_end must be positive")


@dataclass(eq=False)
class Trajectory:
    """Stored solution of one propagation.

    ``states`` holds the 1-RDM in the original basis at each sample time;
    ``populations`` holds the eigenbasis diagonal. ``defect`` is filled by
    hole co-propagation with the complement mismatch per sample.
    """

    times: np.ndarray
    states: np.ndarray
    populations: np.ndarray
    chi: float
    metadata: dict = field(default_factory=dict)
    defect: np.ndarray | None = None
    hole: "Trajectory | None" = None
    setup: object = None

    def __len__(self) -> int:
        return len(self.times)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def state(self, k: int) -> OneRdm:
        return OneRdm(self.states[k], self.chi)

    @property
    def final_state(self) -> OneRdm:
        return self.state(len(self) - 1)


def default_t_end(spec: GeneratorSpec) -> float:
    """Twenty lifetimes of the slowest relevant channel.

    Channels whose diagonal decay rate is below 1e-6 of the fastest one
    (typically frozen uphill transitions) do not count as relevant. Raises
    ValueError when no channel decays, in which case an explicit t_end is
    required.
    """
    rates = [spec.rates.diagonal_rate(w, spec.clusters)
             for w in spec.frequencies]
    rates = [r for r in rates if r > 0.0]
    if not rates:
        raise ValueError("no decaying channel; an explicit t_end is required")
    floor = 1e-6 * max(rates)
    slowest = min(r for r in rates if r >= floor)
    return 20.0 / slowest


def propagate_state(h: SystemHamiltonian, spec: GeneratorSpec, rho0,
                    schedule: Schedule | None = None,
                    t_eval: np.ndarray | None = None,
                    verify_expm: bool = False) -> Trajectory:
    """Integrate one initial state and sample it on a uniform grid.

    ``rho0`` is given in the original basis (a matrix or OneRdm). With
    ``verify_expm`` the linear generator is also stepped with dense matrix
    exponentials and the maximum population deviation is recorded in the
    metadata.
    """
    if schedule is None:
        schedule = Schedule()
    if isinstance(rho0, OneRdm):
        if abs(rho0.chi - spec.chi) > 1e-12:
            raise ValueError(f"state chi {rho0.chi} does not match "
                             f"generator chi {spec.chi}")
        rho0 = rho0.data
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (h.dim, h.dim):
        raise DimensionError(f"state shape {rho0.shape} does not match "
                             f"dimension {h.dim}")
    if h.dim != spec.dim:
        raise DimensionError("Hamiltonian and generator dimensions differ")

    if t_eval is None:
        t_end = schedule.t_end if schedule.t_end is not None \
            else default_t_end(spec)
        t_eval = np.linspace(0.0, t_end, schedule.samples)
    else:
        t_eval = np.asarray(t_eval, dtype=float)
        t_end = float(t_eval[-1])

    rho0_eig = h.to_eigenbasis(rho0)
    y0 = pack_hermitian(rho0_eig)

    if spec.pauli_blocked:
        fun = build_blocked_rhs(h, spec)
    else:
        gmat = build_packed_generator(h, spec)

        def fun(t, y):
            return gmat @ y

    started = time.perf_counter()
    sol = solve_ivp(fun, (0.0, t_end), y0, method=schedule.method,
                    t_eval=t_eval, rtol=schedule.rtol, atol=schedule.atol)
    if not sol.success:
        raise StiffnessError(f"integration stopped early: {sol.message}")
    elapsed = time.perf_counter() - started

    states_eig = np.array([unpack_hermitian(col, h.dim) for col in sol.y.T])
    populations = np.real(np.einsum("tii->ti", states_eig))
    states = np.einsum("ij,tjk,lk->til", h.eigenvectors, states_eig,
                       np.conj(h.eigenvectors))

    metadata = {
        "kind": spec.kind.value,
        "pauli_blocked": spec.pauli_blocked,
        "lamb_shift": spec.lamb_shift,
        "chi": spec.chi,
        "t_end": t_end,
        "samples": int(len(t_eval)),
        "method": schedule.method,
        "rtol": schedule.rtol,
        "atol": schedule.atol,
        "rhs_evaluations": int(sol.nfev),
        "wall_time_s": elapsed,
    }
    traj = Trajectory(times=t_eval.copy(), states=states,
                      populations=populations, chi=spec.chi,
                      metadata=metadata)

    if verify_expm:
        reference = expm_propagate(h, spec, rho0, t_eval)
        ref_pops = np.real(np.einsum("ij,tjk,ki->ti",
                                     np.conj(h.eigenvectors).T, reference,
                                     h.eigenvectors))
        deviation = float(np.max(np.abs(ref_pops - populations)))
        metadata["expm_max_population_deviation"] = deviation
    return traj


def expm_propagate(h: SystemHamiltonian, spec: GeneratorSpec, rho0,
                   times: np.ndarray) -> np.ndarray:
    """Independent propagation route through dense matrix exponentials.

    Raises for Pauli-blocked specs (no linear superoperator exists). On a
    uniform grid one exponential is reused; otherwise each time gets its
    own. Returns states in the original basis, shaped (n, d, d).
    """
    if isinstance(rho0, OneRdm):
        rho0 = rho0.data
    sup = superoperator_matrix(h, spec)
    d = h.dim
    rho_eig = h.to_eigenbasis(np.asarray(rho0, dtype=complex))
    vec = rho_eig.flatten(order="F")
    times = np.asarray(times, dtype=float)

    diffs = np.diff(times)
    out_eig = np.empty((times.size, d, d), dtype=complex)
    if diffs.size and np.allclose(diffs, diffs[0], rtol=1e-9, atol=0.0):
        step = expm(sup * diffs[0])
        cur = vec if times[0] == 0.0 else expm(sup * times[0]) @ vec
        out_eig[0] = cur.reshape((d, d), order="F")
        for k in range(1, times.size):
            cur = step @ cur
            out_eig[k] = cur.reshape((d, d), order="F")
    else:
        for k, t in enumerate(times):
            out_eig[k] = (expm(sup * t) @ vec).reshape((d, d), order="F")
    return np.einsum("ij,tjk,lk->til", h.eigenvectors, out_eig,
                     np.conj(h.eigenvectors))


def integrate(scenario, verify_expm: bool = False) -> Trajectory:
    """Run a full scenario: build, audit the initial state, propagate.

    When the scenario requests hole co-propagation the returned particle
    trajectory carries the per-sample complement defect and the hole
    trajectory itself on its ``defect`` and ``hole`` attributes.
    """
    setup = scenario.build()
    report = setup.rho0.audit()
    if report.violation:
        raise PhysicalityError(
            f"initial state eigenvalues in [{report.min_eigenvalue:.3e}, "
            f"{report.max_eigenvalue:.3e}] violate [0, {setup.rho0.chi}]")

    traj = propagate_state(setup.hamiltonian, setup.spec, setup.rho0,
                           setup.schedule, verify_expm=verify_expm)
    traj.metadata["scenario"] = scenario.to_dict()
    traj.setup = setup

    if scenario.copropagate_hole:
        from .representability import copropagate_hole as _cop
        q0 = setup.rho0.complement()
        hole_traj = _cop(q0, setup.hamiltonian, setup.spec,
                         schedule=setup.schedule, particle_trajectory=traj)
        traj.defect = hole_traj.defect
        traj.hole = hole_traj
    return traj
