"""Labeled stroke pairs, their editing operations, and project persistence.

Every stroke drawn in one view owns an auto-generated counterpart in the other
view with identical per-index y values; new counterpart key points start at
x = 0 (part-center depth) until the user edits them.  A project document is
UTF-8 JSON; each stroke pair serializes as two stroke records sharing one id,
primary view first.
"""

from __future__ import annotations

import base64
import copy
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .edges import ViewImage, load_png
from .errors import (
    AttachmentError,
    OutOfBoundsError,
    ProjectFormatError,
    UnknownIdError,
)

LABELS = ("alignment", "addition", "erosion")
VIEWS = ("front", "side")
FORMAT_VERSION = 1
DEFAULT_EPIPOLAR_TOL = 0.5  # world units per pixel of drawing noise


def other_view(view: str) -> str:
    return "side" if view == "front" else "front"


@dataclass
class StrokePair:
    """A stroke and its cross-view counterpart, index-aligned."""

    id: str
    part_id: str
    label: str
    primary_view: str
    front: np.ndarray  # (n, 2) world coordinates
    side: np.ndarray
    attach_id: str | None = None
    marking: str | None = None

    def __post_init__(self):
        self.front = np.asarray(self.front, dtype=float).reshape(-1, 2)
        self.side = np.asarray(self.side, dtype=float).reshape(-1, 2)
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        if self.primary_view not in VIEWS:
            raise ValueError(f"unknown view {self.primary_view!r}")
        if len(self.front) != len(self.side):
            raise ValueError("stroke pair views must have equal key-point counts")
        if len(self.front) < 2:
            raise ValueError("stroke needs at least two key points")
        if not (np.all(np.isfinite(self.front)) and np.all(np.isfinite(self.side))):
            raise ValueError("key points must be finite")

    @property
    def n_keys(self) -> int:
        return len(self.front)

    def points(self, view: str) -> np.ndarray:
        return self.front if view == "front" else self.side

    def max_y_mismatch(self) -> float:
        return float(np.max(np.abs(self.front[:, 1] - self.side[:, 1])))


@dataclass
class Part:
    id: str
    name: str
    pairs: list[StrokePair] = field(default_factory=list)

    def alignment_pairs(self) -> list[StrokePair]:
        return [p for p in self.pairs if p.label == "alignment"]


@dataclass
class Project:
    images: dict = field(default_factory=lambda: {"front": None, "side": None})
    parts: list[Part] = field(default_factory=list)
    next_part: int = 1
    next_stroke: int = 1
    epipolar_tol: float = DEFAULT_EPIPOLAR_TOL
    undo_stack: list[str] = field(default_factory=list, repr=False)

    # ------------------------------------------------------------ lookups
    def part(self, part_id: str) -> Part:
        for p in self.parts:
            if p.id == part_id:
                return p
        raise UnknownIdError(f"no part {part_id!r}")

    def find_pair(self, stroke_id: str) -> tuple[Part, StrokePair]:
        for part in self.parts:
            for pair in part.pairs:
                if pair.id == stroke_id:
                    return part, pair
        raise UnknownIdError(f"no stroke {stroke_id!r}")

    # -------------------------------------------------------- invariants
    def check_invariants(self):
        ids = set()
        for part in self.parts:
            align_ids = {p.id for p in part.alignment_pairs()}
            for pair in part.pairs:
                if pair.id in ids:
                    raise ValueError(f"duplicate stroke id {pair.id}")
                ids.add(pair.id)
                if pair.max_y_mismatch() > self.epipolar_tol:
                    raise ValueError(f"stroke {pair.id} breaks the y-equality pairing")
                if pair.label in ("addition", "erosion"):
                    if pair.attach_id not in align_ids:
                        raise AttachmentError(
                            f"stroke {pair.id} references missing alignment "
                            f"{pair.attach_id!r}"
                        )

    def _bounds_check(self, view: str, pts: np.ndarray):
        img: ViewImage | None = self.images.get(view)
        if img is None:
            return
        xmin, ymin, xmax, ymax = img.world_bounds()
        pad = 0.5 * img.scale
        if np.any(
            (pts[:, 0] < xmin - pad)
            | (pts[:, 0] > xmax + pad)
            | (pts[:, 1] < ymin - pad)
            | (pts[:, 1] > ymax + pad)
        ):
            raise OutOfBoundsError(f"key point outside the {view} image bounds")

    def _push_undo(self):
        self.undo_stack.append(json.dumps(_parts_doc(self)))


# ------------------------------------------------------------- operations

def add_stroke(
    project: Project,
    view: str,
    key_points,
    label: str,
    part: str,
    attach_id: str | None = None,
    marking: str | None = None,
) -> StrokePair:
    """Insert a stroke; its counterpart appears in the other view with the
    same y values and x = 0."""
    if view not in VIEWS:
        raise ValueError(f"unknown view {view!r}")
    if label not in LABELS:
        raise ValueError(f"unknown label {label!r}")
    pts = np.asarray(key_points, dtype=float).reshape(-1, 2)
    if len(pts) < 2:
        raise ValueError("stroke needs at least two key points")
    if not np.all(np.isfinite(pts)):
        raise ValueError("key points must be finite")
    project._bounds_check(view, pts)

    target = None
    for p in project.parts:
        if p.id == part:
            target = p
            break

    if label in ("addition", "erosion"):
        aligns = target.alignment_pairs() if target else []
        if attach_id is None:
            if not aligns:
                raise AttachmentError(
                    f"{label} stroke needs an alignment stroke in part {part!r}"
                )
            attach_id = aligns[0].id
        elif attach_id not in {a.id for a in aligns}:
            raise AttachmentError(f"no alignment stroke {attach_id!r} in part {part!r}")
    else:
        attach_id = None

    project._push_undo()
    if target is None:
        target = Part(id=part, name=part)
        project.parts.append(target)
        project.next_part += 1
    counterpart = np.column_stack([np.zeros(len(pts)), pts[:, 1]])
    pair = StrokePair(
        id=f"s{project.next_stroke}",
        part_id=target.id,
        label=label,
        primary_view=view,
        front=pts if view == "front" else counterpart,
        side=pts if view == "side" else counterpart,
        attach_id=attach_id,
        marking=marking,
    )
    project.next_stroke += 1
    target.pairs.append(pair)
    return pair


def move_key_point(
    project: Project,
    stroke_id: str,
    index: int,
    new_pos,
    epipolar_locked: bool,
    view: str | None = None,
) -> StrokePair:
    """Move one key point.  Locked edits keep y pinned to the counterpart
    (1D editing); unlocked edits move freely and drag the counterpart's y."""
    _, pair = project.find_pair(stroke_id)
    if not 0 <= index < pair.n_keys:
        raise UnknownIdError(f"stroke {stroke_id} has no key point {index}")
    view = view or pair.primary_view
    if view not in VIEWS:
        raise ValueError(f"unknown view {view!r}")
    new_pos = np.asarray(new_pos, dtype=float).reshape(2)
    project._push_undo()
    mine = pair.points(view)
    theirs = pair.points(other_view(view))
    if epipolar_locked:
        mine[index, 0] = new_pos[0]
        mine[index, 1] = theirs[index, 1]
    else:
        mine[index] = new_pos
        theirs[index, 1] = new_pos[1]
    return pair


def delete_stroke(project: Project, stroke_id: str) -> None:
    """Remove the pair; attached addition/erosion strokes go with their
    alignment stroke."""
    part, pair = project.find_pair(stroke_id)
    project._push_undo()
    drop = {stroke_id}
    if pair.label == "alignment":
        drop |= {p.id for p in part.pairs if p.attach_id == stroke_id}
    part.pairs = [p for p in part.pairs if p.id not in drop]


def relocate_stroke(project: Project, stroke_id: str) -> StrokePair:
    """Swap which view holds the primary stroke; the new counterpart is
    regenerated with default depth."""
    _, pair = project.find_pair(stroke_id)
    project._push_undo()
    new_primary = other_view(pair.primary_view)
    keep = pair.points(new_primary)
    regenerated = np.column_stack([np.zeros(len(keep)), keep[:, 1]])
    if new_primary == "front":
        pair.side = regenerated
    else:
        pair.front = regenerated
    pair.primary_view = new_primary
    return pair


def undo(project: Project) -> bool:
    """Revert the last mutating operation; no-op on an empty stack."""
    if not project.undo_stack:
        return False
    doc = json.loads(project.undo_stack.pop())
    _restore_parts(project, doc)
    return True


# ------------------------------------------------------------ persistence

def _pair_records(pair: StrokePair) -> list[dict]:
    recs = []
    for view in (pair.primary_view, other_view(pair.primary_view)):
        recs.append(
            {
                "id": pair.id,
                "view": view,
                "label": pair.label,
                "attach_id": pair.attach_id,
                "marking": pair.marking,
                "points": [[float(x), float(y)] for x, y in pair.points(view)],
            }
        )
    return recs


def _parts_doc(project: Project) -> dict:
    return {
        "parts": [
            {
                "id": part.id,
                "name": part.name,
                "strokes": [r for pair in part.pairs for r in _pair_records(pair)],
            }
            for part in project.parts
        ],
        "counters": {"part": project.next_part, "stroke": project.next_stroke},
    }


def _image_doc(img: ViewImage | None, embed_pixels: bool) -> dict | None:
    if img is None:
        return None
    doc = {
        "scale": img.scale,
        "offset": [float(img.offset[0]), float(img.offset[1])],
    }
    if img.source is not None and not embed_pixels:
        doc["path"] = img.source
    else:
        from PIL import Image

        buf = io.BytesIO()
        mode = "L" if img.pixels.ndim == 2 else "RGBA"
        Image.fromarray(img.pixels, mode=mode).save(buf, format="PNG")
        doc["png_base64"] = base64.b64encode(buf.getvalue()).decode("ascii")
    return doc


def save_project(project: Project, embed_images: bool = False) -> dict:
    doc = {
        "version": FORMAT_VERSION,
        "images": {
            "front": _image_doc(project.images.get("front"), embed_images),
            "side": _image_doc(project.images.get("side"), embed_images),
        },
    }
    doc.update(_parts_doc(project))
    return doc


def _image_from_doc(doc, view: str, base_dir: Path | None):
    if doc is None:
        return None
    loc = f"images.{view}"
    if not isinstance(doc, dict):
        raise ProjectFormatError("image entry must be an object", loc)
    scale = float(doc.get("scale", 1.0))
    offset = tuple(doc.get("offset", (0.0, 0.0)))
    if "png_base64" in doc:
        from PIL import Image

        raw = base64.b64decode(doc["png_base64"])
        img = Image.open(io.BytesIO(raw))
        px = np.asarray(img if img.mode in ("L", "RGBA") else img.convert("RGBA"))
        return ViewImage(view=view, pixels=px.astype(np.uint8), scale=scale, offset=offset)
    if "path" in doc:
        path = Path(doc["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return load_png(path, view=view, scale=scale, offset=offset)
    raise ProjectFormatError("image entry needs 'path' or 'png_base64'", loc)


def _pairs_from_records(records, part_loc: str) -> list[StrokePair]:
    by_id: dict[str, list[dict]] = {}
    order: list[str] = []
    for i, rec in enumerate(records):
        loc = f"{part_loc}.strokes[{i}]"
        if not isinstance(rec, dict):
            raise ProjectFormatError("stroke record must be an object", loc)
        for key in ("id", "view", "label", "points"):
            if key not in rec:
                raise ProjectFormatError(f"stroke record missing {key!r}", loc)
        sid = rec["id"]
        if sid not in by_id:
            by_id[sid] = []
            order.append(sid)
        by_id[sid].append(rec)
    pairs = []
    for sid in order:
        recs = by_id[sid]
        loc = f"{part_loc}.strokes id={sid!r}"
        if len(recs) != 2:
            raise ProjectFormatError(
                f"stroke pair must have exactly 2 records, found {len(recs)}", loc
            )
        primary, secondary = recs
        if primary["view"] == secondary["view"]:
            raise ProjectFormatError("pair records must be in different views", loc)
        try:
            views = {r["view"]: np.asarray(r["points"], dtype=float) for r in recs}
            pair = StrokePair(
                id=sid,
                part_id="",  # fixed up by caller
                label=primary["label"],
                primary_view=primary["view"],
                front=views["front"],
                side=views["side"],
                attach_id=primary.get("attach_id"),
                marking=primary.get("marking"),
            )
        except (ValueError, KeyError) as exc:
            raise ProjectFormatError(str(exc), loc) from exc
        pairs.append(pair)
    return pairs


def _restore_parts(project: Project, doc: dict):
    parts = []
    for i, pdoc in enumerate(doc.get("parts", [])):
        loc = f"parts[{i}]"
        if "id" not in pdoc:
            raise ProjectFormatError("part missing 'id'", loc)
        part = Part(id=pdoc["id"], name=pdoc.get("name", pdoc["id"]))
        part.pairs = _pairs_from_records(pdoc.get("strokes", []), loc)
        for pair in part.pairs:
            pair.part_id = part.id
        parts.append(part)
    counters = doc.get("counters", {})
    project.parts = parts
    project.next_part = int(counters.get("part", len(parts) + 1))
    project.next_stroke = int(
        counters.get("stroke", sum(len(p.pairs) for p in parts) + 1)
    )


def load_project(doc, base_dir: Path | None = None) -> Project:
    """Build a Project from a parsed document (dict) or a JSON string."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ProjectFormatError(f"invalid JSON: {exc}", "document") from exc
    if not isinstance(doc, dict):
        raise ProjectFormatError("document root must be an object", "document")
    if doc.get("version") != FORMAT_VERSION:
        raise ProjectFormatError(
            f"unsupported version {doc.get('version')!r}", "version"
        )
    project = Project()
    images = doc.get("images", {})
    project.images = {
        "front": _image_from_doc(images.get("front"), "front", base_dir),
        "side": _image_from_doc(images.get("side"), "side", base_dir),
    }
    _restore_parts(project, doc)
    project.check_invariants()
    return project


def save_project_file(project: Project, path, embed_images: bool = False):
    doc = save_project(project, embed_images=embed_images)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_project_file(path) -> Project:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProjectFormatError(f"cannot read {p}: {exc}", str(p)) from exc
    return load_project(text, base_dir=p.parent)


def snapshot_parts(project: Project) -> str:
    """Serialized parts+counters state (images excluded); cheap to take."""
    return json.dumps(_parts_doc(project))


def restore_parts_snapshot(project: Project, snapshot: str):
    _restore_parts(project, json.loads(snapshot))


def project_equal(a: Project, b: Project) -> bool:
    """Structural equality over the serialized form, ignoring image pixels."""
    da, db = save_project(a), save_project(b)
    for d in (da, db):
        for img in d["images"].values():
            if img is not None:
                img.pop("png_base64", None)
    return da == db
