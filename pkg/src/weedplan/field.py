"""Field model: synthetic row-crop fields with Poisson-distributed weeds.

Weed positions follow a spatial Poisson process along the driving direction:
successive x-gaps are i.i.d. exponential with rate (density * lane_width),
lateral positions are uniform across the lane. Crops sit on fixed row lines
and are never treated as targets; they ride along only so that saved fields
describe the whole scene.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.stats import chi2

from .errors import (
    FieldBoundsError,
    FieldFormatError,
    InsufficientDataError,
    ParameterError,
)

CROP = "crop"
WEED = "weed"

_HEADER_PREFIX = "# "


@dataclass(frozen=True)
class PlantInstance:
    """One plant on the ground: id, kind, and position in lane coordinates."""

    id: int
    kind: str  # "crop" or "weed"
    species: str
    x: float  # meters along the driving direction, >= 0
    y: float  # meters across the lane, in [0, lane_width]
    area: float = 0.0  # ground area in m^2, 0 if unknown


@dataclass
class WeedField:
    """A lane of plants, kept sorted by (x, y, id).

    density_param and seed are provenance of generated fields and stay None
    for ingested ones.
    """

    lane_width_m: float
    length_m: float
    num_crop_rows: int
    plants: list[PlantInstance] = dc_field(default_factory=list)
    density_param: float | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lane_width_m) and self.lane_width_m > 0):
            raise ParameterError(f"lane_width_m must be finite and > 0, got {self.lane_width_m}")
        if not (math.isfinite(self.length_m) and self.length_m > 0):
            raise ParameterError(f"length_m must be finite and > 0, got {self.length_m}")
        if self.num_crop_rows < 1:
            raise ParameterError(f"num_crop_rows must be >= 1, got {self.num_crop_rows}")
        for p in self.plants:
            if not 0.0 <= p.x <= self.length_m:
                raise FieldBoundsError(f"plant {p.id}: x={p.x} outside [0, {self.length_m}]")
            if not 0.0 <= p.y <= self.lane_width_m:
                raise FieldBoundsError(f"plant {p.id}: y={p.y} outside [0, {self.lane_width_m}]")
        self.plants.sort(key=lambda p: (p.x, p.y, p.id))

    def weeds(self) -> list[PlantInstance]:
        return [p for p in self.plants if p.kind == WEED]

    def crops(self) -> list[PlantInstance]:
        return [p for p in self.plants if p.kind == CROP]


@dataclass(frozen=True)
class UniformityVerdict:
    statistic: float
    degrees_of_freedom: int
    uniform_at_5pct: bool


def generate_field(
    density: float,
    length: float,
    lane_width: float,
    num_crop_rows: int = 3,
    crop_spacing: float = 0.15,
    seed: int = 0,
) -> WeedField:
    """Generate a field with Poisson weeds and deterministic crop rows.

    density is the weed rate in weeds/m^2; the per-meter arrival rate along
    the lane is density * lane_width, so weed x-gaps are Exp(density * lane_width)
    starting from x=0, and weed y is uniform on [0, lane_width). Crops are laid
    every crop_spacing meters on num_crop_rows equally spaced row lines
    (row r at y = (r + 0.5) * lane_width / num_crop_rows).

    The RNG is local and seeded: the same arguments always produce a
    bit-identical field.
    """
    for name, v in (("density", density), ("length", length),
                    ("lane_width", lane_width), ("crop_spacing", crop_spacing)):
        if not math.isfinite(v):
            raise ParameterError(f"{name} must be finite, got {v}")
    if density < 0:
        raise ParameterError(f"density must be >= 0, got {density}")
    if length <= 0 or lane_width <= 0 or crop_spacing <= 0:
        raise ParameterError("length, lane_width and crop_spacing must be > 0")
    if num_crop_rows < 1:
        raise ParameterError(f"num_crop_rows must be >= 1, got {num_crop_rows}")

    rng = np.random.default_rng(seed)
    raw: list[tuple[float, float, str]] = []

    rate = density * lane_width  # weeds per meter of travel
    if rate > 0:
        # Draw gaps in blocks until the cumulative position passes the end.
        expected = rate * length
        xs: list[float] = []
        pos = 0.0
        while True:
            block = rng.exponential(1.0 / rate, size=max(16, int(expected * 1.2) + 16))
            for g in block:
                pos += float(g)
                if pos > length:
                    break
                xs.append(pos)
            if pos > length:
                break
        ys = rng.uniform(0.0, lane_width, size=len(xs))
        raw.extend((x, float(y), WEED) for x, y in zip(xs, ys))

    row_step = lane_width / num_crop_rows
    n_per_row = int(length / crop_spacing) + 1
    for r in range(num_crop_rows):
        y_row = (r + 0.5) * row_step
        for i in range(n_per_row):
            x = i * crop_spacing
            if x <= length:
                raw.append((x, y_row, CROP))

    raw.sort(key=lambda t: (t[0], t[1]))
    plants = [
        PlantInstance(id=i, kind=kind, species=kind, x=x, y=y, area=0.0)
        for i, (x, y, kind) in enumerate(raw)
    ]
    return WeedField(
        lane_width_m=lane_width,
        length_m=length,
        num_crop_rows=num_crop_rows,
        plants=plants,
        density_param=density,
        seed=seed,
    )


def save_field(fld: WeedField, path: str) -> None:
    """Write a field CSV: header comment line, then one row per plant.

    Floats use repr so that load_field(save_field(f)) reproduces the exact
    values. Plants are written in the field's canonical sorted order.
    """
    lines = []
    header = (
        f"{_HEADER_PREFIX}lane_width_m={fld.lane_width_m!r},"
        f"length_m={fld.length_m!r},num_crop_rows={fld.num_crop_rows}"
    )
    if fld.density_param is not None:
        header += f",density_param={fld.density_param!r}"
    if fld.seed is not None:
        header += f",seed={fld.seed}"
    lines.append(header)
    for p in fld.plants:
        if "," in p.species or "\n" in p.species:
            raise FieldFormatError(f"plant {p.id}: species label may not contain commas or newlines")
        lines.append(f"{p.id},{p.kind},{p.species},{p.x!r},{p.y!r},{p.area!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_field(path: str) -> WeedField:
    """Parse a field CSV; plants come out sorted regardless of file order.

    Errors name the 1-based line number of the offending row. Plants outside
    the lane described by the header are rejected.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    lines = text.splitlines()
    if not lines or not lines[0].startswith(_HEADER_PREFIX):
        raise FieldFormatError("line 1: missing '# lane_width_m=...' header")

    meta: dict[str, str] = {}
    for item in lines[0][len(_HEADER_PREFIX):].split(","):
        if "=" not in item:
            raise FieldFormatError(f"line 1: malformed header item {item!r}")
        k, v = item.split("=", 1)
        meta[k.strip()] = v.strip()
    try:
        lane_width = float(meta["lane_width_m"])
        length = float(meta["length_m"])
        rows = int(meta["num_crop_rows"])
    except (KeyError, ValueError) as exc:
        raise FieldFormatError(f"line 1: bad or missing header field ({exc})") from exc
    density = float(meta["density_param"]) if "density_param" in meta else None
    seed = int(meta["seed"]) if "seed" in meta else None

    plants: list[PlantInstance] = []
    seen_ids: set[int] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise FieldFormatError(f"line {lineno}: expected 6 columns, got {len(parts)}")
        try:
            pid = int(parts[0])
            kind = parts[1]
            species = parts[2]
            x = float(parts[3])
            y = float(parts[4])
            area = float(parts[5])
        except ValueError as exc:
            raise FieldFormatError(f"line {lineno}: {exc}") from exc
        if kind not in (CROP, WEED):
            raise FieldFormatError(f"line {lineno}: kind must be 'crop' or 'weed', got {kind!r}")
        if pid in seen_ids:
            raise FieldFormatError(f"line {lineno}: duplicate plant id {pid}")
        seen_ids.add(pid)
        if not 0.0 <= x <= length:
            raise FieldBoundsError(f"line {lineno}: x={x} outside [0, {length}]")
        if not 0.0 <= y <= lane_width:
            raise FieldBoundsError(f"line {lineno}: y={y} outside [0, {lane_width}]")
        if area < 0:
            raise FieldFormatError(f"line {lineno}: area must be >= 0, got {area}")
        plants.append(PlantInstance(id=pid, kind=kind, species=species, x=x, y=y, area=area))

    return WeedField(
        lane_width_m=lane_width,
        length_m=length,
        num_crop_rows=rows,
        plants=plants,
        density_param=density,
        seed=seed,
    )


def uniformity_test(fld: WeedField, num_bins_x: int, num_bins_y: int) -> UniformityVerdict:
    """Pearson chi-squared test of weed positions against spatial uniformity.

    The lane is cut into num_bins_x * num_bins_y equal cells; the statistic
    compares observed weed counts per cell with the uniform expectation and
    is judged against the 5% critical value at (cells - 1) degrees of freedom.
    Requires at least 5 expected weeds per cell.
    """
    if num_bins_x < 1 or num_bins_y < 1 or num_bins_x * num_bins_y < 2:
        raise ParameterError("need at least 2 bins in total")
    cells = num_bins_x * num_bins_y
    weeds = fld.weeds()
    if len(weeds) < 5 * cells:
        raise InsufficientDataError(
            f"need >= {5 * cells} weeds for {cells} cells, field has {len(weeds)}"
        )
    xs = np.array([w.x for w in weeds])
    ys = np.array([w.y for w in weeds])
    counts, _, _ = np.histogram2d(
        xs, ys,
        bins=(num_bins_x, num_bins_y),
        range=((0.0, fld.length_m), (0.0, fld.lane_width_m)),
    )
    expected = len(weeds) / cells
    statistic = float(((counts - expected) ** 2 / expected).sum())
    dof = cells - 1
    critical = float(chi2.ppf(0.95, dof))
    return UniformityVerdict(
        statistic=statistic,
        degrees_of_freedom=dof,
        uniform_at_5pct=bool(statistic <= critical),
    )
