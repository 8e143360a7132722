"""Dataset ingestion and artifact persistence.

Curve files are two-column CSV (x1, x2) with an optional header. A
dataset manifest is JSON naming the curves and their files. Numbers in
persisted matrices are written with 17 significant digits so load(save)
round-trips bit-for-bit.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clustering import Dendrogram, DistanceMatrix
from .curves import Curve2D, validate_curve
from .errors import ConfigError, ManifestParse, MatrixParse, MissingFile
from .pipeline import PipelineConfig


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    curves: tuple[tuple[str, str], ...]  # (id, path) in file order

    def ids(self) -> list[str]:
        return [cid for cid, _ in self.curves]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def load_curve_csv(path: str | Path, id: str | None = None) -> Curve2D:
    """Read one curve file; a non-numeric first row is treated as a header."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    rows: list[tuple[float, float]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                x1, x2 = float(row[0]), float(row[1])
            except (ValueError, IndexError) as e:
                if lineno == 1:
                    continue  # header
                raise ManifestParse(f"{path}:{lineno}: bad point row {row!r}") from e
            rows.append((x1, x2))
    return validate_curve(rows, id=id or path.stem)


def save_curve_csv(curve: Curve2D, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x1", "x2"])
        for x1, x2 in curve.points:
            writer.writerow([_fmt(x1), _fmt(x2)])


def load_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ManifestParse(f"{path}: {e}") from e
    if not isinstance(obj, dict) or "curves" not in obj:
        raise ManifestParse(f"{path}: expected an object with a 'curves' list")
    entries = []
    seen = set()
    for item in obj["curves"]:
        try:
            cid, cpath = item["id"], item["path"]
        except (TypeError, KeyError) as e:
            raise ManifestParse(f"{path}: curve entries need 'id' and 'path'") from e
        if not cid:
            raise ManifestParse(f"{path}: empty curve id")
        if cid in seen:
            raise ManifestParse(f"{path}: duplicate curve id {cid!r}")
        seen.add(cid)
        entries.append((cid, cpath))
    return DatasetManifest(name=obj.get("name", path.stem), curves=tuple(entries))


def load_dataset(path: str | Path) -> list[Curve2D]:
    """Validated curves in manifest order; relative paths resolve against
    the manifest's directory."""
    path = Path(path)
    manifest = load_manifest(path)
    curves = []
    for cid, cpath in manifest.curves:
        p = Path(cpath)
        if not p.is_absolute():
            p = path.parent / p
        curves.append(load_curve_csv(p, id=cid))
    return curves


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    obj = {
        "name": manifest.name,
        "curves": [{"id": cid, "path": cpath} for cid, cpath in manifest.curves],
    }
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def save_matrix(dm: DistanceMatrix, path: str | Path) -> None:
    """Label-framed CSV: header row of labels, one labelled row per curve."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + list(dm.labels))
        for label, row in zip(dm.labels, dm.entries):
            writer.writerow([label] + [_fmt(v) for v in row])


def load_matrix(path: str | Path) -> DistanceMatrix:
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise MatrixParse(f"{path}: empty file")
    header = rows[0][1:]
    n = len(header)
    if n == 0:
        raise MatrixParse(f"{path}:1: no labels in header")
    entries = np.zeros((n, n))
    if len(rows) - 1 != n:
        raise MatrixParse(f"{path}: {len(rows) - 1} data rows for {n} labels")
    for i, row in enumerate(rows[1:], start=2):
        if row[0] != header[i - 2]:
            raise MatrixParse(
                f"{path}:{i}: row label {row[0]!r} != column label {header[i - 2]!r}"
            )
        if len(row) - 1 != n:
            raise MatrixParse(f"{path}:{i}: expected {n} values, got {len(row) - 1}")
        for j, cell in enumerate(row[1:]):
            try:
                entries[i - 2, j] = float(cell)
            except ValueError as e:
                raise MatrixParse(f"{path}:{i}: column {j + 2}: bad number {cell!r}") from e
    return DistanceMatrix(entries=entries, labels=tuple(header))


def save_dendrogram(dend: Dendrogram, path: str | Path) -> None:
    Path(path).write_text(json.dumps(dend.to_json(), indent=2) + "\n", encoding="utf-8")


def load_dendrogram(path: str | Path) -> Dendrogram:
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    return Dendrogram.from_json(json.loads(path.read_text(encoding="utf-8")))


def save_config(config: PipelineConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config.to_json(), indent=2) + "\n", encoding="utf-8")


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    return PipelineConfig.from_json(obj)


def save_plan_csv(pi: np.ndarray, path: str | Path) -> None:
    """Coupling matrix dump, row per source point."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row in np.asarray(pi, dtype=float):
            writer.writerow([_fmt(v) for v in row])


def dendrogram_svg(dend: Dendrogram, width: int = 640, height: int = 420) -> str:
    """Static SVG rendering: leaves along the bottom, merge heights upward."""
    n = len(dend.labels)
    pad = 40.0
    max_h = max((m.height for m in dend.merges), default=1.0) or 1.0

    def sx(leaf_pos: float) -> float:
        return pad + leaf_pos * (width - 2 * pad) / max(1, n - 1)

    def sy(h: float) -> float:
        return (height - pad) - h / max_h * (height - 2 * pad)

    # leaf order: left-to-right depth-first walk of the final tree
    children = {n + t: (m.a, m.b) for t, m in enumerate(dend.merges)}
    order: list[int] = []

    def walk(node: int):
        if node < n:
            order.append(node)
            return
        a, b = children[node]
        walk(a)
        walk(b)

    walk(n + len(dend.merges) - 1 if dend.merges else 0)
    xpos = {leaf: float(i) for i, leaf in enumerate(order)}
    ypos = {leaf: 0.0 for leaf in order}

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<g stroke="#2b5d8a" stroke-width="1.5" fill="none">',
    ]
    for t, m in enumerate(dend.merges):
        xa, xb = xpos[m.a], xpos[m.b]
        ya, yb = ypos[m.a], ypos[m.b]
        h = m.height
        parts.append(
            f'<path d="M {sx(xa):.2f} {sy(ya):.2f} V {sy(h):.2f} '
            f'H {sx(xb):.2f} V {sy(yb):.2f}"/>'
        )
        xpos[n + t] = 0.5 * (xa + xb)
        ypos[n + t] = h
    parts.append("</g>")
    parts.append('<g font-size="10" fill="#222" text-anchor="end">')
    for leaf in order:
        parts.append(
            f'<text x="{sx(xpos[leaf]):.2f}" y="{height - pad + 12:.2f}" '
            f'transform="rotate(-60 {sx(xpos[leaf]):.2f} {height - pad + 12:.2f})">'
            f"{dend.labels[leaf]}</text>"
        )
    parts.append("</g></svg>")
    return "\n".join(parts)
