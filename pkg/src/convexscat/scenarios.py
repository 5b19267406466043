"""Builtin scenes and the synthetic measurement pipeline.

A scenario bundles the true inclusions with the simulation and inversion
settings.  Truth data is produced on a refine-times finer grid than the
reconstruction grid and subsampled back, so the inversion never sees fields
computed with its own discretization.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import yaml

from .basis import make_kgrid
from .forward import (
    CauchyData,
    Coefficient,
    Disk,
    Grid2D,
    IncidentWave,
    Rectangle,
    add_noise,
    rasterize,
    solve_forward_multi,
    trace_cauchy,
)
from .inversion import InversionConfig

__all__ = [
    "Scenario",
    "BUILTIN_SCENARIOS",
    "get_scenario",
    "simulate_scenario",
    "load_scenario",
    "save_scenario",
]


@dataclass(frozen=True)
class Scenario:
    name: str
    shapes: tuple
    noise_level: float = 0.05
    seed: int | None = 0
    refine: int = 2
    config: InversionConfig = field(default_factory=InversionConfig)

    def __post_init__(self):
        # an empty shape tuple is allowed: it describes a null scatterer
        if self.refine < 1:
            raise ValueError("refine must be a positive integer")
        if self.noise_level < 0:
            raise ValueError("noise level must be nonnegative")


def _builtins() -> dict:
    disk_l = Disk(center=(-0.3, 0.45), radius=0.2, value=2.0)
    disk_r = Disk(center=(0.3, 0.45), radius=0.2, value=2.0)
    box = Rectangle(lo=(0.18, 0.33), hi=(0.48, 0.57), value=1.5)
    scenes = (
        Scenario("null", (), noise_level=0.0),
        Scenario("example1", (Disk(center=(0.0, 0.45), radius=0.2, value=3.0),)),
        Scenario("example2a", (disk_l, disk_r)),
        Scenario("example2b", (disk_l, replace(disk_r, value=1.5))),
        Scenario("example3a", (disk_l, box)),
        Scenario(
            "example3b",
            (
                Disk(center=(-0.45, 0.45), radius=0.15, value=2.0),
                Disk(center=(0.45, 0.45), radius=0.15, value=2.0),
                Rectangle(lo=(-0.12, 0.35), hi=(0.12, 0.55), value=1.5),
            ),
        ),
    )
    return {s.name: s for s in scenes}


BUILTIN_SCENARIOS = _builtins()


def get_scenario(name: str) -> Scenario:
    try:
        return BUILTIN_SCENARIOS[name]
    except KeyError:
        known = ", ".join(sorted(BUILTIN_SCENARIOS))
        raise KeyError(f"unknown scenario {name!r}; builtins: {known}") from None


def simulate_scenario(sc: Scenario, seed: int | None = None):
    """Render truth, solve the scattering problem, trace and perturb the data.

    Returns (truth coefficient on the reconstruction grid, clean data, noisy
    data); the latter two coincide when the scenario is noise free.  Geometry
    is validated on both grids, so inclusions must stay clear of the boundary
    even after refinement.
    """
    cfg = sc.config
    grid = Grid2D(cfg.half_width, cfg.n_cells)
    kgrid = make_kgrid(cfg.k_min, cfg.k_max, cfg.n_k)
    wave = IncidentWave()
    truth = rasterize(sc.shapes, grid)

    fine_grid = Grid2D(cfg.half_width, cfg.n_cells * sc.refine)
    fine = rasterize(sc.shapes, fine_grid) if sc.refine > 1 else truth
    fields = solve_forward_multi(fine, wave, kgrid)
    cd_fine = trace_cauchy(fields, fine, wave, kgrid)
    clean = CauchyData(
        grid=grid,
        kgrid=kgrid,
        g0=cd_fine.g0[:: sc.refine].copy(),
        g1=cd_fine.g1[:: sc.refine].copy(),
    )
    use_seed = sc.seed if seed is None else seed
    noisy = add_noise(clean, sc.noise_level, seed=use_seed)
    return truth, clean, noisy


def _shape_to_dict(shape) -> dict:
    if isinstance(shape, Disk):
        return {
            "type": "disk",
            "center": [float(shape.center[0]), float(shape.center[1])],
            "radius": float(shape.radius),
            "value": float(shape.value),
        }
    if isinstance(shape, Rectangle):
        return {
            "type": "rectangle",
            "lo": [float(shape.lo[0]), float(shape.lo[1])],
            "hi": [float(shape.hi[0]), float(shape.hi[1])],
            "value": float(shape.value),
        }
    raise TypeError(f"unsupported shape {type(shape).__name__}")


def _shape_from_dict(d: dict):
    kind = d.get("type")
    if kind == "disk":
        return Disk(center=tuple(d["center"]), radius=d["radius"], value=d["value"])
    if kind == "rectangle":
        return Rectangle(lo=tuple(d["lo"]), hi=tuple(d["hi"]), value=d["value"])
    raise ValueError(f"unknown shape type {kind!r}")


def config_from_dict(d: dict) -> InversionConfig:
    known = set(InversionConfig.__dataclass_fields__)
    extra = set(d) - known
    if extra:
        raise ValueError(f"unknown config keys: {', '.join(sorted(extra))}")
    return InversionConfig(**d)


def save_scenario(sc: Scenario, path) -> None:
    doc = {
        "name": sc.name,
        "shapes": [_shape_to_dict(s) for s in sc.shapes],
        "noise_level": float(sc.noise_level),
        "seed": sc.seed,
        "refine": int(sc.refine),
        "config": asdict(sc.config),
    }
    with open(path, "w") as f:
        yaml.safe_dump(doc, f, sort_keys=False)


def load_scenario(path) -> Scenario:
    with open(path) as f:
        doc = yaml.safe_load(f)
    if not isinstance(doc, dict) or "shapes" not in doc:
        raise ValueError(f"{path}: expected a mapping with a 'shapes' list")
    cfg = config_from_dict(doc.get("config") or {})
    return Scenario(
        name=doc.get("name", "scenario"),
        shapes=tuple(_shape_from_dict(s) for s in doc["shapes"]),
        noise_level=doc.get("noise_level", 0.05),
        seed=doc.get("seed"),
        refine=doc.get("refine", 2),
        config=cfg,
    )
