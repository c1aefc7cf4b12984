"""Local HTTP session service driven by the annotation UI.

One Project per session, all mutations serialized per session and
transactional: a failed request leaves the session exactly as it was.  Every
mutating response carries the new revision; clients may send the revision
they believe is current and get 409 when stale.  Binds to loopback by
default; port via --port or ORTHOSKETCH_PORT.

Endpoints (JSON bodies, versioned prefix /v1):
  POST /v1/session                               create
  POST /v1/session/{sid}/images                  upload both view images
  POST /v1/session/{sid}/stroke                  add_stroke
  POST /v1/session/{sid}/stroke/{id}/move        move_key_point
  POST /v1/session/{sid}/stroke/{id}/delete      delete_stroke
  POST /v1/session/{sid}/stroke/{id}/relocate    relocate_stroke
  POST /v1/session/{sid}/undo                    undo
  POST /v1/session/{sid}/lock                    set_lock
  POST /v1/session/{sid}/reconstruct/{part_id}   rebuild one part
  GET  /v1/session/{sid}/scene                   latest full scene
  POST /v1/session/{sid}/save                    project document out
  POST /v1/session/{sid}/load                    project document in
"""

from __future__ import annotations

import base64
import io
import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .annotations import (
    Project,
    StrokePair,
    add_stroke,
    delete_stroke,
    load_project,
    move_key_point,
    relocate_stroke,
    restore_parts_snapshot,
    save_project,
    snapshot_parts,
    undo,
)
from .edges import ViewImage
from .errors import ModelingError
from .pipeline import PipelineConfig, extract_project_edges, reconstruct

DEFAULT_PORT = 8873


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


@dataclass
class Session:
    id: str
    project: Project = field(default_factory=Project)
    config: PipelineConfig = field(default_factory=PipelineConfig)
    revision: int = 0
    epipolar_lock: bool = True
    meshes: dict = field(default_factory=dict)  # part id -> mesh doc
    edge_cache: dict | None = None
    guard: threading.RLock = field(default_factory=threading.RLock)


class SessionRegistry:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._guard = threading.Lock()

    def create(self) -> Session:
        session = Session(id=uuid.uuid4().hex[:12])
        with self._guard:
            self._sessions[session.id] = session
        return session

    def get(self, sid: str) -> Session:
        with self._guard:
            session = self._sessions.get(sid)
        if session is None:
            raise ApiError(410, f"unknown session {sid!r}")
        return session


def _pair_doc(pair: StrokePair) -> dict:
    return {
        "id": pair.id,
        "part": pair.part_id,
        "label": pair.label,
        "primary_view": pair.primary_view,
        "attach_id": pair.attach_id,
        "marking": pair.marking,
        "front": pair.front.tolist(),
        "side": pair.side.tolist(),
    }


def _mesh_doc(mesh, diagnostics_doc) -> dict:
    return {
        "id": mesh.part_id,
        "provenance": mesh.provenance,
        "vertices": mesh.vertices.tolist(),
        "triangles": mesh.triangles.tolist(),
        "diagnostics": diagnostics_doc,
    }


def _decode_image(doc, view: str) -> ViewImage:
    if not isinstance(doc, dict):
        raise ApiError(400, f"{view}: image entry must be an object")
    scale = float(doc.get("scale", 1.0))
    offset = tuple(doc.get("offset", (0.0, 0.0)))
    if "png_base64" in doc:
        from PIL import Image

        try:
            raw = base64.b64decode(doc["png_base64"])
            img = Image.open(io.BytesIO(raw))
            px = np.asarray(img if img.mode in ("L", "RGBA") else img.convert("RGBA"))
            return ViewImage(
                view=view, pixels=px.astype(np.uint8), scale=scale, offset=offset
            )
        except ApiError:
            raise
        except Exception as exc:
            raise ApiError(400, f"{view}: cannot decode image: {exc}") from exc
    if "path" in doc:
        from .edges import load_png

        try:
            return load_png(doc["path"], view=view, scale=scale, offset=offset)
        except ModelingError as exc:
            raise ApiError(400, f"{view}: {exc}") from exc
    raise ApiError(400, f"{view}: image entry needs 'path' or 'png_base64'")


class Api:
    """Route table; every handler takes (session, body) and returns a doc."""

    def __init__(self):
        self.registry = SessionRegistry()

    # -- plumbing ---------------------------------------------------------
    def _mutating(self, session: Session, body: dict, fn):
        with session.guard:
            expect = body.get("revision")
            if expect is not None and int(expect) != session.revision:
                raise ApiError(
                    409,
                    f"stale revision {expect} (current {session.revision})",
                )
            state = snapshot_parts(session.project)
            images = dict(session.project.images)
            undo_depth = len(session.project.undo_stack)
            try:
                result = fn(session)
            except ApiError:
                raise
            except (ModelingError, ValueError) as exc:
                restore_parts_snapshot(session.project, state)
                session.project.images = images
                del session.project.undo_stack[undo_depth:]
                raise ApiError(400, str(exc)) from exc
            session.revision += 1
            result["revision"] = session.revision
            return result

    # -- handlers ---------------------------------------------------------
    def create_session(self, body: dict) -> dict:
        session = self.registry.create()
        return {"session_id": session.id, "revision": session.revision}

    def upload_images(self, session: Session, body: dict) -> dict:
        def run(s: Session):
            images = {}
            for view in ("front", "side"):
                if view not in body:
                    raise ApiError(400, f"missing {view!r} image")
                images[view] = _decode_image(body[view], view)
            s.project.images = images
            s.edge_cache = None
            s.meshes = {}
            return {}

        return self._mutating(session, body, run)

    def add_stroke(self, session: Session, body: dict) -> dict:
        def run(s: Session):
            pair = add_stroke(
                s.project,
                body.get("view", "front"),
                body.get("points", []),
                body.get("label", "alignment"),
                body.get("part", "part1"),
                attach_id=body.get("attach_id"),
                marking=body.get("marking"),
            )
            return {"pair": _pair_doc(pair)}

        return self._mutating(session, body, run)

    def move_key_point(self, session: Session, sid: str, body: dict) -> dict:
        def run(s: Session):
            locked = body.get("locked")
            if locked is None:
                locked = s.epipolar_lock
            pair = move_key_point(
                s.project,
                sid,
                int(body["index"]),
                body["pos"],
                epipolar_locked=bool(locked),
                view=body.get("view"),
            )
            return {"pair": _pair_doc(pair)}

        return self._mutating(session, body, run)

    def delete_stroke(self, session: Session, sid: str, body: dict) -> dict:
        def run(s: Session):
            delete_stroke(s.project, sid)
            return {}

        return self._mutating(session, body, run)

    def relocate_stroke(self, session: Session, sid: str, body: dict) -> dict:
        def run(s: Session):
            pair = relocate_stroke(s.project, sid)
            return {"pair": _pair_doc(pair)}

        return self._mutating(session, body, run)

    def undo(self, session: Session, body: dict) -> dict:
        def run(s: Session):
            return {"undone": undo(s.project)}

        return self._mutating(session, body, run)

    def set_lock(self, session: Session, body: dict) -> dict:
        def run(s: Session):
            s.epipolar_lock = bool(body.get("locked", True))
            return {"locked": s.epipolar_lock}

        return self._mutating(session, body, run)

    def reconstruct_part(self, session: Session, part_id: str, body: dict) -> dict:
        with session.guard:
            if session.edge_cache is None:
                try:
                    session.edge_cache = extract_project_edges(
                        session.project, session.config
                    )
                except ModelingError as exc:
                    raise ApiError(400, str(exc)) from exc
            try:
                scene, diags = reconstruct(
                    session.project,
                    session.config,
                    only_part=part_id,
                    edges=session.edge_cache,
                )
            except ModelingError as exc:
                raise ApiError(400, str(exc)) from exc
            d = diags.parts[0]
            if d.status != "ok":
                raise ApiError(400, f"part {part_id!r} failed: {d.error}")
            doc = _mesh_doc(scene.parts[0], d.to_doc())
            doc["revision_built"] = session.revision
            session.meshes[part_id] = doc
            return {"revision": session.revision, "part": doc}

    def get_scene(self, session: Session) -> dict:
        with session.guard:
            parts = [
                session.meshes[p.id]
                for p in session.project.parts
                if p.id in session.meshes
            ]
            return {"revision": session.revision, "parts": parts}

    def get_scene_obj(self, session: Session) -> str:
        """Latest scene as OBJ text, identical to a CLI export of the same
        reconstruction."""
        from .mesh import PartMesh, Scene, export_obj

        with session.guard:
            parts = [
                PartMesh(
                    part_id=doc["id"],
                    vertices=np.asarray(doc["vertices"], float),
                    triangles=np.asarray(doc["triangles"], int),
                )
                for p in session.project.parts
                if (doc := session.meshes.get(p.id)) is not None
            ]
            return export_obj(Scene(parts=parts))

    def save(self, session: Session, body: dict) -> dict:
        with session.guard:
            return {
                "revision": session.revision,
                "project": save_project(session.project, embed_images=True),
            }

    def load(self, session: Session, body: dict) -> dict:
        def run(s: Session):
            if "project" not in body:
                raise ApiError(400, "missing 'project' document")
            project = load_project(body["project"])
            s.project = project
            s.edge_cache = None
            s.meshes = {}
            return {}

        return self._mutating(session, body, run)

    # -- routing ----------------------------------------------------------
    def dispatch(self, method: str, path: str, body: dict) -> dict:
        parts = [p for p in path.split("/") if p]
        if not parts or parts[0] != "v1":
            raise ApiError(404, f"unknown path {path!r}")
        parts = parts[1:]
        if parts == ["session"] and method == "POST":
            return self.create_session(body)
        if len(parts) >= 2 and parts[0] == "session":
            session = self.registry.get(parts[1])
            rest = parts[2:]
            if method == "POST":
                if rest == ["images"]:
                    return self.upload_images(session, body)
                if rest == ["stroke"]:
                    return self.add_stroke(session, body)
                if len(rest) == 3 and rest[0] == "stroke":
                    sid, action = rest[1], rest[2]
                    if action == "move":
                        return self.move_key_point(session, sid, body)
                    if action == "delete":
                        return self.delete_stroke(session, sid, body)
                    if action == "relocate":
                        return self.relocate_stroke(session, sid, body)
                if rest == ["undo"]:
                    return self.undo(session, body)
                if rest == ["lock"]:
                    return self.set_lock(session, body)
                if len(rest) == 2 and rest[0] == "reconstruct":
                    return self.reconstruct_part(session, rest[1], body)
                if rest == ["save"]:
                    return self.save(session, body)
                if rest == ["load"]:
                    return self.load(session, body)
            if method == "GET" and rest == ["scene"]:
                return self.get_scene(session)
            if method == "GET" and rest == ["scene.obj"]:
                return {"__text__": self.get_scene_obj(session)}
        raise ApiError(404, f"unknown path {path!r}")


def _make_handler(api: Api):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def _reply(self, status: int, doc: dict):
            if "__text__" in doc:
                raw = doc["__text__"].encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "text/plain; charset=utf-8")
                self.send_header("Content-Length", str(len(raw)))
                self.send_header("Access-Control-Allow-Origin", "*")
                self.end_headers()
                self.wfile.write(raw)
                return
            payload = json.dumps(doc).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header(
                "Access-Control-Allow-Headers", "Content-Type"
            )
            self.end_headers()
            self.wfile.write(payload)

        def _handle(self, method: str):
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            try:
                body = json.loads(raw.decode("utf-8")) if raw else {}
            except json.JSONDecodeError as exc:
                self._reply(400, {"error": f"invalid JSON body: {exc}"})
                return
            try:
                doc = api.dispatch(method, self.path, body)
            except ApiError as exc:
                self._reply(exc.status, {"error": str(exc)})
                return
            except Exception as exc:  # internal failure must not kill the server
                self._reply(500, {"error": f"internal error: {exc}"})
                return
            self._reply(200, doc)

        def do_POST(self):
            self._handle("POST")

        def do_GET(self):
            self._handle("GET")

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def log_message(self, *args):
            pass

    return Handler


def start_server(host: str = "127.0.0.1", port: int = 0):
    """Non-blocking start; returns (server, api).  Used by tests."""
    api = Api()
    server = ThreadingHTTPServer((host, port), _make_handler(api))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, api


def serve(host: str = "127.0.0.1", port: int | None = None):
    if port is None:
        port = int(os.environ.get("ORTHOSKETCH_PORT", DEFAULT_PORT))
    api = Api()
    server = ThreadingHTTPServer((host, port), _make_handler(api))
    print(f"orthosketch session service on http://{host}:{server.server_address[1]}/v1")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
