"""Tile-level dataset manifest: input/mask pairing and district-based splits.

Tile directories follow the layout ``{root}/{district}/{year}/*.tif`` with
tile files named by the grid convention. Input tiles pair with mask tiles
through their (district, year, row, col) key; the split role is a function of
district alone.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ManifestError
from .raster import TILE_NAME_RE

ROLES = ("train", "validation", "test")

MANIFEST_COLUMNS = ("input", "mask", "district", "year", "row", "col", "role")


@dataclass(frozen=True)
class ManifestEntry:
    input: Path
    mask: Path
    district: str
    year: int
    row: int
    col: int
    role: str


@dataclass(frozen=True)
class SplitPolicy:
    """district -> role mapping; each district appears exactly once."""

    roles: Mapping[str, str]

    def __post_init__(self) -> None:
        for district, role in self.roles.items():
            if role not in ROLES:
                raise ManifestError(f"district {district!r} has unknown role {role!r}; valid: {ROLES}")
        object.__setattr__(self, "roles", dict(self.roles))

    def role_for(self, district: str) -> str:
        try:
            return self.roles[district]
        except KeyError:
            raise ManifestError(f"district {district!r} not covered by the split policy") from None

    def check_complete(self) -> None:
        """Training runs need at least one district per role."""
        missing = [role for role in ROLES if role not in self.roles.values()]
        if missing:
            raise ManifestError(f"split policy assigns no district to role(s): {missing}")


def _scan_tiles(root: Path) -> dict[tuple[str, int, int, int], Path]:
    """Collect {(district, year, row, col): path} under root/district/year/."""
    if not root.is_dir():
        raise FileNotFoundError(f"tile root not found: {root}")
    tiles: dict[tuple[str, int, int, int], Path] = {}
    for district_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for year_dir in sorted(p for p in district_dir.iterdir() if p.is_dir()):
            try:
                year = int(year_dir.name)
            except ValueError:
                raise ManifestError(
                    f"year directory name must be an integer: {year_dir}"
                ) from None
            for path in sorted(year_dir.iterdir()):
                m = TILE_NAME_RE.match(path.name)
                if not m:
                    continue
                key = (district_dir.name, year, int(m.group("row")), int(m.group("col")))
                if key in tiles:
                    raise ManifestError(f"duplicate tile position {key}: {path} and {tiles[key]}")
                tiles[key] = path
    return tiles


def build_manifest(
    inputs_root: str | Path,
    masks_root: str | Path,
    policy: SplitPolicy,
    verify_georeference: bool = True,
) -> list[ManifestEntry]:
    """Pair every input tile with its mask tile and assign split roles.

    Raises ManifestError naming the offending tile when a pair member is
    missing, and (unless disabled) when a pair disagrees in size,
    geotransform or CRS.
    """
    inputs = _scan_tiles(Path(inputs_root))
    masks = _scan_tiles(Path(masks_root))
    if not inputs:
        raise ManifestError(f"no input tiles found under {inputs_root}")
    entries = []
    for key in sorted(inputs):
        district, year, row, col = key
        mask_path = masks.get(key)
        if mask_path is None:
            raise ManifestError(f"unpaired input tile (no mask for {key}): {inputs[key]}")
        entries.append(
            ManifestEntry(
                input=inputs[key],
                mask=mask_path,
                district=district,
                year=year,
                row=row,
                col=col,
                role=policy.role_for(district),
            )
        )
    orphans = sorted(set(masks) - set(inputs))
    if orphans:
        raise ManifestError(f"unpaired mask tile (no input for {orphans[0]}): {masks[orphans[0]]}")
    if verify_georeference:
        from .geotiff import read_geotiff

        for e in entries:
            a = read_geotiff(e.input)
            b = read_geotiff(e.mask)
            if (a.width, a.height) != (b.width, b.height) or not a.georef_equal(b):
                raise ManifestError(
                    f"georeference mismatch between {e.input} and {e.mask}"
                )
    return entries


def split_summary(entries: Iterable[ManifestEntry]) -> dict:
    """Per-role tile counts and percentages (2 decimals), plus the total."""
    entries = list(entries)
    total = len(entries)
    summary: dict = {"total": total, "roles": {}}
    for role in ROLES:
        count = sum(1 for e in entries if e.role == role)
        pct = round(100.0 * count / total, 2) if total else 0.0
        summary["roles"][role] = {"count": count, "percent": pct}
    return summary


def write_manifest(entries: Iterable[ManifestEntry], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_COLUMNS)
        for e in entries:
            writer.writerow([str(e.input), str(e.mask), e.district, e.year, e.row, e.col, e.role])


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such manifest file: {path}")
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError(f"{path}: empty manifest file") from None
        if tuple(h.strip() for h in header) != MANIFEST_COLUMNS:
            raise ManifestError(f"{path}: expected header {','.join(MANIFEST_COLUMNS)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(MANIFEST_COLUMNS):
                raise ManifestError(f"{path}:{lineno}: expected {len(MANIFEST_COLUMNS)} columns, got {len(row)}")
            role = row[6].strip()
            if role not in ROLES:
                raise ManifestError(f"{path}:{lineno}: unknown role {role!r}")
            try:
                entries.append(
                    ManifestEntry(
                        input=Path(row[0]),
                        mask=Path(row[1]),
                        district=row[2],
                        year=int(row[3]),
                        row=int(row[4]),
                        col=int(row[5]),
                        role=role,
                    )
                )
            except ValueError:
                raise ManifestError(f"{path}:{lineno}: malformed row {row}") from None
    return entries
