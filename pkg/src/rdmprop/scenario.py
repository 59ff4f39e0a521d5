"""Scenario files: a JSON description of one complete propagation setup.

A scenario pins down the system (Hamiltonian, coupling operators, filling
bound chi, initial state), the bath, the generator kind with its options,
and the integration schedule. Complex matrix entries are written as plain
numbers when real or as two-element [re, im] arrays.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bath import BathModel
from .core import CouplingOperator, OneRdm, SystemHamiltonian
from .generators import GeneratorSpec, MEKind, build_generator
from .propagate import Schedule


class ScenarioError(ValueError):
    """A scenario file or dictionary is malformed."""


def _parse_number(obj, path: str) -> complex:
    if isinstance(obj, bool):
        raise ScenarioError(f"{path}: expected a number, got a boolean")
    if isinstance(obj, (int, float)):
        return complex(obj)
    if (isinstance(obj, list) and len(obj) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool)
                    for x in obj)):
        return complex(obj[0], obj[1])
    raise ScenarioError(f"{path}: expected a number or an [re, im] pair, "
                        f"got {obj!r}")


def _parse_real(obj, path: str) -> float:
    z = _parse_number(obj, path)
    if z.imag != 0.0:
        raise ScenarioError(f"{path}: expected a real number")
    return float(z.real)


def _parse_matrix(obj, path: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ScenarioError(f"{path}: expected a non-empty list of rows")
    rows = []
    width = None
    for r, row in enumerate(obj):
        if not isinstance(row, list):
            raise ScenarioError(f"{path}[{r}]: expected a list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ScenarioError(f"{path}[{r}]: row length {len(row)} differs "
                                f"from {width}")
        rows.append([_parse_number(x, f"{path}[{r}][{c}]")
                     for c, x in enumerate(row)])
    return np.array(rows, dtype=complex)


def _format_number(z: complex):
    z = complex(z)
    if z.imag == 0.0:
        return z.real
    return [z.real, z.imag]


def _format_matrix(m: np.ndarray):
    return [[_format_number(x) for x in row] for row in np.asarray(m)]


def _require(d: dict, key: str, path: str):
    if key not in d:
        raise ScenarioError(f"{path}: missing required key {key!r}")
    return d[key]


def _check_keys(d: dict, allowed: set, path: str):
    extra = set(d) - allowed
    if extra:
        raise ScenarioError(f"{path}: unknown keys {sorted(extra)}")


@dataclass(frozen=True, eq=False)
class RunSetup:
    """Built objects ready for propagation."""

    hamiltonian: SystemHamiltonian
    coupling_operators: tuple[CouplingOperator, ...]
    spec: GeneratorSpec
    rho0: OneRdm
    schedule: Schedule


@dataclass(eq=False)
class Scenario:
    name: str
    chi: float
    hamiltonian: SystemHamiltonian
    coupling_operators: tuple[CouplingOperator, ...]
    initial_state: np.ndarray
    bath: BathModel
    kind: MEKind = MEKind.ULE
    clustering_threshold: float | None = None
    pauli_blocked: bool = False
    lamb_shift: bool = False
    schedule: Schedule = field(default_factory=Schedule)
    copropagate_hole: bool = False

    def __post_init__(self):
        self.kind = MEKind(self.kind)
        self.initial_state = np.asarray(self.initial_state, dtype=complex)
        self.coupling_operators = tuple(self.coupling_operators)

    def build(self) -> RunSetup:
        rho0 = OneRdm(self.initial_state, self.chi)
        spec = build_generator(
            self.hamiltonian, self.coupling_operators, self.bath, self.kind,
            self.chi, clustering_threshold=self.clustering_threshold,
            pauli_blocked=self.pauli_blocked, lamb_shift=self.lamb_shift)
        return RunSetup(hamiltonian=self.hamiltonian,
                        coupling_operators=self.coupling_operators,
                        spec=spec, rho0=rho0, schedule=self.schedule)

    def to_dict(self) -> dict:
        h = {"energies": [float(e) for e in self.hamiltonian.energies]}
        vecs = self.hamiltonian.eigenvectors
        if not np.allclose(vecs, np.eye(self.hamiltonian.dim), atol=1e-15):
            h["eigenvectors"] = _format_matrix(vecs)
        if self.hamiltonian.degeneracy_tol != 1e-9:
            h["degeneracy_tol"] = self.hamiltonian.degeneracy_tol
        bath = {"lambda": self.bath.lam, "temperature": self.bath.temperature}
        if self.bath.pv_cutoff is not None:
            bath["pv_cutoff"] = self.bath.pv_cutoff
        if self.bath.pv_points != 2048:
            bath["pv_points"] = self.bath.pv_points
        gen = {"kind": self.kind.value}
        if self.clustering_threshold is not None:
            gen["clustering_threshold"] = self.clustering_threshold
        if self.pauli_blocked:
            gen["pauli_blocked"] = True
        if self.lamb_shift:
            gen["lamb_shift"] = True
        sched = {}
        if self.schedule.t_end is not None:
            sched["t_end"] = self.schedule.t_end
        for key, default in (("samples", 400), ("rtol", 1e-9),
                             ("atol", 1e-11), ("method", "DOP853")):
            value = getattr(self.schedule, key)
            if value != default:
                sched[key] = value
        out = {
            "name": self.name,
            "chi": self.chi,
            "hamiltonian": h,
            "coupling_operators": [
                {"label": op.label, "matrix": _format_matrix(op.matrix)}
                for op in self.coupling_operators],
            "initial_state": {"matrix": _format_matrix(self.initial_state)},
            "bath": bath,
            "generator": gen,
        }
        if sched:
            out["schedule"] = sched
        if self.copropagate_hole:
            out["copropagate_hole"] = True
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        if not isinstance(d, dict):
            raise ScenarioError("scenario: expected a JSON object")
        _check_keys(d, {"name", "chi", "hamiltonian", "coupling_operators",
                        "initial_state", "bath", "generator", "schedule",
                        "copropagate_hole"}, "scenario")
        name = _require(d, "name", "scenario")
        if not isinstance(name, str):
            raise ScenarioError("scenario.name: expected a string")
        chi = _require(d, "chi", "scenario")
        if not isinstance(chi, (int, float)) or isinstance(chi, bool) \
                or chi <= 0:
            raise ScenarioError("scenario.chi: expected a positive number")

        hd = _require(d, "hamiltonian", "scenario")
        if not isinstance(hd, dict):
            raise ScenarioError("scenario.hamiltonian: expected an object")
        _check_keys(hd, {"energies", "eigenvectors", "matrix",
                         "degeneracy_tol"}, "scenario.hamiltonian")
        tol = hd.get("degeneracy_tol", 1e-9)
        try:
            if "matrix" in hd:
                if "energies" in hd or "eigenvectors" in hd:
                    raise ScenarioError(
                        "scenario.hamiltonian: give either matrix or "
                        "energies/eigenvectors, not both")
                h = SystemHamiltonian.from_matrix(
                    _parse_matrix(hd["matrix"], "scenario.hamiltonian.matrix"),
                    degeneracy_tol=tol)
            else:
                energies = _require(hd, "energies", "scenario.hamiltonian")
                if not isinstance(energies, list) or not energies:
                    raise ScenarioError("scenario.hamiltonian.energies: "
                                        "expected a non-empty list")
                energies = [_parse_real(
                    e, f"scenario.hamiltonian.energies[{k}]")
                    for k, e in enumerate(energies)]
                if "eigenvectors" in hd:
                    vecs = _parse_matrix(hd["eigenvectors"],
                                         "scenario.hamiltonian.eigenvectors")
                    h = SystemHamiltonian(np.array(energies), vecs,
                                          degeneracy_tol=tol)
                else:
                    h = SystemHamiltonian.from_energies(energies,
                                                        degeneracy_tol=tol)
        except ValueError as err:
            if isinstance(err, ScenarioError):
                raise
            raise ScenarioError(f"scenario.hamiltonian: {err}") from err

        cops = _require(d, "coupling_operators", "scenario")
        if not isinstance(cops, list) or not cops:
            raise ScenarioError("scenario.coupling_operators: expected a "
                                "non-empty list")
        ops = []
        for k, entry in enumerate(cops):
            path = f"scenario.coupling_operators[{k}]"
            if not isinstance(entry, dict):
                raise ScenarioError(f"{path}: expected an object")
            _check_keys(entry, {"label", "matrix"}, path)
            label = entry.get("label", f"A{k}")
            mat = _parse_matrix(_require(entry, "matrix", path),
                                f"{path}.matrix")
            try:
                ops.append(CouplingOperator(str(label), mat))
            except ValueError as err:
                raise ScenarioError(f"{path}: {err}") from err

        sd = _require(d, "initial_state", "scenario")
        if not isinstance(sd, dict):
            raise ScenarioError("scenario.initial_state: expected an object")
        _check_keys(sd, {"matrix", "occupations"}, "scenario.initial_state")
        if ("matrix" in sd) == ("occupations" in sd):
            raise ScenarioError("scenario.initial_state: give exactly one of "
                                "matrix or occupations")
        if "matrix" in sd:
            rho0 = _parse_matrix(sd["matrix"], "scenario.initial_state.matrix")
        else:
            occ = sd["occupations"]
            if not isinstance(occ, list):
                raise ScenarioError("scenario.initial_state.occupations: "
                                    "expected a list")
            occ = [_parse_real(x, f"scenario.initial_state.occupations[{k}]")
                   for k, x in enumerate(occ)]
            # occupations fill eigenbasis levels, lowest energy first
            rho0 = h.from_eigenbasis(np.diag(occ).astype(complex))

        bd = _require(d, "bath", "scenario")
        if not isinstance(bd, dict):
            raise ScenarioError("scenario.bath: expected an object")
        _check_keys(bd, {"lambda", "temperature", "pv_cutoff", "pv_points"},
                    "scenario.bath")
        try:
            bath = BathModel(
                lam=float(_require(bd, "lambda", "scenario.bath")),
                temperature=float(_require(bd, "temperature",
                                           "scenario.bath")),
                pv_cutoff=(float(bd["pv_cutoff"])
                           if "pv_cutoff" in bd else None),
                pv_points=int(bd.get("pv_points", 2048)))
        except (TypeError, ValueError) as err:
            if isinstance(err, ScenarioError):
                raise
            raise ScenarioError(f"scenario.bath: {err}") from err

        gd = _require(d, "generator", "scenario")
        if not isinstance(gd, dict):
            raise ScenarioError("scenario.generator: expected an object")
        _check_keys(gd, {"kind", "clustering_threshold", "pauli_blocked",
                         "lamb_shift"}, "scenario.generator")
        kind_raw = _require(gd, "kind", "scenario.generator")
        try:
            kind = MEKind(kind_raw)
        except ValueError:
            raise ScenarioError(
                f"scenario.generator.kind: unknown kind {kind_raw!r}; "
                f"expected one of {[m.value for m in MEKind]}") from None
        threshold = gd.get("clustering_threshold")
        if threshold is not None:
            threshold = float(threshold)
        if kind is MEKind.UME and threshold is None:
            raise ScenarioError("scenario.generator: ume needs "
                                "clustering_threshold")

        sched_d = d.get("schedule", {})
        if not isinstance(sched_d, dict):
            raise ScenarioError("scenario.schedule: expected an object")
        _check_keys(sched_d, {"t_end", "samples", "rtol", "atol", "method"},
                    "scenario.schedule")
        try:
            schedule = Schedule(
                t_end=(float(sched_d["t_end"]) if "t_end" in sched_d
                       else None),
                samples=int(sched_d.get("samples", 400)),
                rtol=float(sched_d.get("rtol", 1e-9)),
                atol=float(sched_d.get("atol", 1e-11)),
                method=str(sched_d.get("method", "DOP853")))
        except (TypeError, ValueError) as err:
            raise ScenarioError(f"scenario.schedule: {err}") from err

        cop = d.get("copropagate_hole", False)
        if not isinstance(cop, bool):
            raise ScenarioError("scenario.copropagate_hole: expected a "
                                "boolean")

        try:
            return cls(name=name, chi=float(chi), hamiltonian=h,
                       coupling_operators=tuple(ops), initial_state=rho0,
                       bath=bath, kind=kind,
                       clustering_threshold=threshold,
                       pauli_blocked=bool(gd.get("pauli_blocked", False)),
                       lamb_shift=bool(gd.get("lamb_shift", False)),
                       schedule=schedule, copropagate_hole=cop)
        except ValueError as err:
            if isinstance(err, ScenarioError):
                raise
            raise ScenarioError(f"scenario: {err}") from err


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ScenarioError(f"{path}: {err}") from err
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioError(f"{path}: invalid JSON at line {err.lineno} "
                            f"column {err.colno}: {err.msg}") from err
    return Scenario.from_dict(data)


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario.to_dict(), indent=2,
                                     sort_keys=True) + "\n")
