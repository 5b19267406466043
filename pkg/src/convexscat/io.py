"""Plain-text file formats and the run manifest.

All floats are written with repr, which round-trips doubles exactly, so a
write-then-read cycle is bit-for-bit.  Grid and row/column indices are
1-based in files, matching the lined-index convention; in memory everything
stays 0-based.  A seed of -1 in a data header means "no seed recorded".
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass

import numpy as np

from .basis import make_kgrid
from .forward import CauchyData, Coefficient, Grid2D
from .inversion import InversionConfig, IterationRecord

__all__ = [
    "write_cauchy",
    "read_cauchy",
    "write_coefficient",
    "read_coefficient",
    "write_history",
    "read_history",
    "RunManifest",
    "write_manifest",
]


def _r(x) -> str:
    return repr(float(x))


def write_cauchy(cd: CauchyData, path) -> None:
    g = cd.grid
    kg = cd.kgrid
    seed = -1 if cd.seed is None else int(cd.seed)
    lines = [
        f"# R Nx kmin kmax Nk delta seed",
        f"# {_r(g.half_width)} {g.n_cells} {_r(kg.k_min)} {_r(kg.k_max)} {kg.n_sub} {_r(cd.noise_level)} {seed}",
    ]
    for j in range(g.n_nodes):
        for m in range(kg.n_sub):
            g0, g1 = cd.g0[j, m], cd.g1[j, m]
            lines.append(
                f"{j + 1} {m + 1} {_r(g0.real)} {_r(g0.imag)} {_r(g1.real)} {_r(g1.imag)}"
            )
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_cauchy(path) -> CauchyData:
    with open(path) as f:
        lines = f.read().splitlines()
    header = None
    rows = []
    for ln in lines:
        ln = ln.strip()
        if not ln:
            continue
        if ln.startswith("#"):
            fields = ln[1:].split()
            if fields and fields[0] != "R":
                header = fields
            continue
        rows.append(ln.split())
    if header is None:
        raise ValueError(f"{path}: missing '# R Nx kmin kmax Nk delta seed' header")
    R, n_cells, k_min, k_max, n_k, delta, seed = (
        float(header[0]), int(header[1]), float(header[2]), float(header[3]),
        int(header[4]), float(header[5]), int(header[6]),
    )
    grid = Grid2D(R, n_cells)
    kg = make_kgrid(k_min, k_max, n_k)
    if len(rows) != grid.n_nodes * n_k:
        raise ValueError(f"{path}: expected {grid.n_nodes * n_k} data rows, found {len(rows)}")
    g0 = np.zeros((grid.n_nodes, n_k), dtype=complex)
    g1 = np.zeros_like(g0)
    for row in rows:
        if len(row) != 6:
            raise ValueError(
                f"{path}: each row needs 'j k_index Re(g0) Im(g0) Re(g1) Im(g1)', got {len(row)} fields"
            )
        j, m = int(row[0]) - 1, int(row[1]) - 1
        g0[j, m] = float(row[2]) + 1j * float(row[3])
        g1[j, m] = float(row[4]) + 1j * float(row[5])
    return CauchyData(grid=grid, kgrid=kg, g0=g0, g1=g1, noise_level=delta,
                      seed=None if seed < 0 else seed)


def write_coefficient(coeff: Coefficient, path) -> None:
    g = coeff.grid
    lines = [f"# R Nx", f"# {_r(g.half_width)} {g.n_cells}", "# i j a"]
    for i in range(g.n_nodes):
        for j in range(g.n_nodes):
            lines.append(f"{i + 1} {j + 1} {_r(coeff.values[i, j])}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_coefficient(path) -> Coefficient:
    with open(path) as f:
        lines = f.read().splitlines()
    header = None
    rows = []
    for ln in lines:
        ln = ln.strip()
        if not ln:
            continue
        if ln.startswith("#"):
            fields = ln[1:].split()
            if fields and fields[0] not in ("R", "i"):
                header = fields
            continue
        rows.append(ln.split())
    if header is None:
        raise ValueError(f"{path}: missing '# R Nx' header")
    grid = Grid2D(float(header[0]), int(header[1]))
    values = np.zeros((grid.n_nodes, grid.n_nodes))
    if len(rows) != grid.n_points:
        raise ValueError(f"{path}: expected {grid.n_points} rows, found {len(rows)}")
    for row in rows:
        values[int(row[0]) - 1, int(row[1]) - 1] = float(row[2])
    return Coefficient(grid=grid, values=values)


def write_history(records, path) -> None:
    lines = ["# n J grad_norm a_max"]
    for r in records:
        lines.append(f"{r.n} {_r(r.J_value)} {_r(r.gradient_norm)} {_r(r.a_max)}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_history(path):
    records = []
    with open(path) as f:
        for ln in f:
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            n, J, gn, am = ln.split()
            records.append(IterationRecord(int(n), float(J), float(gn), float(am), wall_time=0.0))
    return records


@dataclass(frozen=True)
class RunManifest:
    command: str
    inputs: dict
    config: dict
    seed: int | None
    outputs: dict
    started: str
    finished: str


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(command: str, inputs, config, seed, outputs, out_path, started: float) -> None:
    """Record enough to rerun and verify: hashed inputs and outputs, config, seed.

    Rerunning with the same inputs must reproduce the output hashes exactly.
    The timestamps make manifests themselves non-identical across reruns by
    design; byte determinism is promised for the data files they describe.
    """
    if isinstance(config, InversionConfig):
        config = asdict(config)
    manifest = RunManifest(
        command=command,
        inputs={str(p): _sha256(p) for p in inputs},
        config=config,
        seed=seed,
        outputs={str(p): _sha256(p) for p in outputs},
        started=time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(started)),
        finished=time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
    )
    with open(out_path, "w") as f:
        json.dump(asdict(manifest), f, indent=2, sort_keys=True)
        f.write("\n")
