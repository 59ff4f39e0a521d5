"""CSV and JSON writers for trajectories, spectra, and channel tables.

Every CSV starts with a `# format:` line naming its layout so downstream
tooling can dispatch without guessing. Floats are written with repr so
round-tripping is lossless.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

TRAJECTORY_FORMAT = "trajectory-csv v1"
SPECTRA_FORMAT = "spectra-csv v1"
CHANNELS_FORMAT = "channels-csv v1"
SWEEP_FORMAT = "sweep-csv v1"

OUTPUT_DIR_ENV = "RDMPROP_OUTPUT_DIR"


def resolve_output_dir(explicit=None) -> Path:
    """Pick the output directory: explicit argument, environment, or cwd."""
    if explicit is not None:
        path = Path(explicit)
    elif os.environ.get(OUTPUT_DIR_ENV):
        path = Path(os.environ[OUTPUT_DIR_ENV])
    else:
        path = Path.cwd()
    path.mkdir(parents=True, exist_ok=True)
    return path


def _fmt(x) -> str:
    return repr(float(x))


def write_trajectory_csv(traj, path) -> Path:
    """One row per sample: time, eigenbasis populations, minimum eigenvalue,
    trace, and the hole co-propagation defect when present."""
    path = Path(path)
    d = traj.dim
    header = ["time"] + [f"pop_{k}" for k in range(d)] + ["min_eigenvalue",
                                                          "trace"]
    if traj.defect is not None:
        header.append("hole_defect")
    lines = [f"# format: {TRAJECTORY_FORMAT}", ",".join(header)]
    for k in range(len(traj)):
        state = traj.states[k]
        eigs = np.linalg.eigvalsh(0.5 * (state + state.conj().T))
        row = [_fmt(traj.times[k])]
        row += [_fmt(p) for p in traj.populations[k]]
        row.append(_fmt(eigs[0]))
        row.append(_fmt(np.real(np.trace(state))))
        if traj.defect is not None:
            row.append(_fmt(traj.defect[k]))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_metadata_json(data: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True)
                    + "\n")
    return path


def write_spectra_csv(samples, path) -> Path:
    """Bath spectral table: one row per frequency sample."""
    path = Path(path)
    lines = [f"# format: {SPECTRA_FORMAT}",
             "omega,gamma_hat,decay_rate,lamb_xi"]
    for s in samples:
        lines.append(",".join([_fmt(s.omega), _fmt(s.gamma_hat),
                               _fmt(s.gamma_real), _fmt(s.lamb_shift)]))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_channels_csv(spec, path) -> Path:
    """Per-channel table: one row per coupling operator and frequency."""
    path = Path(path)
    lines = [f"# format: {CHANNELS_FORMAT}",
             "coupling,frequency,op_max_norm,diagonal_rate"]
    for ch in spec.channel_sets:
        for w, op in zip(ch.frequencies, ch.operators):
            rate = spec.rates.diagonal_rate(w, spec.clusters)
            norm = float(np.max(np.abs(op)))
            lines.append(",".join([ch.label, _fmt(w), _fmt(norm), _fmt(rate)]))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_sweep_csv(rows, header, path) -> Path:
    path = Path(path)
    lines = [f"# format: {SWEEP_FORMAT}", ",".join(header)]
    for row in rows:
        lines.append(",".join(str(x) if isinstance(x, (str, int))
                              else _fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")
    return path
