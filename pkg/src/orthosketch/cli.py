"""Batch front door: reconstruct saved projects to OBJ, validate meshes,
serve the interactive session API.

Exit codes: 0 success, 1 any part or validation failure, 2 usage error
(missing or unreadable files, malformed documents).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .annotations import load_project_file
from .errors import ModelingError, ObjFormatError, ProjectFormatError
from .mesh import export_obj, import_obj_file, validate
from .pipeline import PipelineConfig, reconstruct


def _load_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return PipelineConfig.from_doc(doc)


def cmd_reconstruct(args) -> int:
    try:
        project = load_project_file(args.project)
        config = _load_config(args.config)
    except (ProjectFormatError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        scene, diags = reconstruct(project, config)
    except ModelingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        Path(args.out).write_text(export_obj(scene), encoding="utf-8", newline="\n")
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 2
    if args.report:
        Path(args.report).write_text(
            json.dumps(diags.to_doc(), indent=2) + "\n", encoding="utf-8"
        )
    for part in diags.parts:
        if part.status == "ok":
            print(
                f"{part.part_id}: ok"
                f" objective {part.objective_before:.3f} -> {part.objective_after:.3f}"
            )
        else:
            print(f"{part.part_id}: failed ({part.error})", file=sys.stderr)
    return 0 if diags.all_ok else 1


def cmd_validate(args) -> int:
    try:
        scene = import_obj_file(args.mesh)
    except (ObjFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ok = True
    for part in scene.parts:
        report = validate(part)
        ok = ok and report.ok
        print(f"{part.part_id}:")
        for key, value in report.to_doc().items():
            print(f"  {key}: {value}")
    return 0 if ok else 1


def cmd_serve(args) -> int:
    from .service import serve

    serve(host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="orthosketch",
        description="Reconstruct 3D character parts from two annotated orthographic drawings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_rec = sub.add_parser("reconstruct", help="build OBJ from a saved project")
    p_rec.add_argument("--project", required=True, help="project JSON file")
    p_rec.add_argument("--out", required=True, help="output OBJ path")
    p_rec.add_argument("--config", help="pipeline config JSON")
    p_rec.add_argument("--report", help="write per-part diagnostics JSON here")
    p_rec.set_defaults(func=cmd_reconstruct)

    p_val = sub.add_parser("validate", help="check an OBJ mesh")
    p_val.add_argument("--mesh", required=True, help="OBJ file")
    p_val.set_defaults(func=cmd_validate)

    p_srv = sub.add_parser("serve", help="run the interactive session service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8873)
    p_srv.set_defaults(func=cmd_serve)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
