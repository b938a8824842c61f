"""HTTP/JSON facade over one tree and its event log.

Endpoints: POST /events, GET /state, GET /geometry, GET /log,
POST /verify.  A single lock serializes writers; reads see the latest
completed state.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import HTMLResponse, JSONResponse

from . import eventlog
from .eventlog import EventLog, apply_event, verify_records
from .layout import LayoutConfig, layout
from .tree import (
    RANDOM, NoPostsError, SocialTree, UnknownPostError, new_tree,
)

DEFAULT_ACTOR = "user"


class ApiSession:
    """One tree + one log + the seed that ties replays together."""

    def __init__(self, seed: int = 0, log_path: str | None = None,
                 actor: str = DEFAULT_ACTOR):
        self.seed = seed
        self.log = EventLog(log_path)
        if self.log.records:
            self.tree = eventlog.replay(self.log.records, seed)
        else:
            self.tree = new_tree(actor, seed)
        self.lock = threading.Lock()

    def geometry_doc(self) -> dict:
        geo = layout(self.tree, LayoutConfig())
        return {
            "segments": [
                {"x1": a[0], "y1": a[1], "x2": b[0], "y2": b[1], "kind": tag}
                for a, b, tag in geo.segments
            ],
            "markers": [
                {"x": c[0], "y": c[1], "kind": kind} for c, kind in geo.markers
            ],
            "labels": [
                {"x": p[0], "y": p[1], "text": text} for p, text in geo.labels
            ],
            "bounds": dict(zip(("minX", "minY", "maxX", "maxY"), geo.bounds)),
        }

    def state_doc(self) -> dict:
        tree = self.tree
        posts = []
        for pid in tree.post_ids():
            node = tree.nodes[pid]
            c = node.counters
            comments = sum(
                1 for ch in node.children
                if tree.nodes[ch].kind.value == "Comment"
            )
            posts.append({
                "id": pid, "likes": c.likes, "shares": c.shares,
                "views": c.views, "comments": comments,
            })
        return {
            "status": tree.status(),
            "posts": posts,
            "friends": tree.friend_ids(),
        }


def _validate_event(body: dict) -> tuple[str, str, dict]:
    if not isinstance(body, dict):
        raise HTTPException(400, "request body must be a JSON object")
    type = body.get("type")
    if type not in eventlog.EVENT_TYPES:
        raise HTTPException(400, f"unknown event type {type!r}")
    actor = body.get("actor", DEFAULT_ACTOR)
    if not isinstance(actor, str):
        raise HTTPException(400, "actor must be a string")
    args = body.get("args", {})
    if not isinstance(args, dict):
        raise HTTPException(400, "args must be an object")
    if type in ("AddComment", "AddShare"):
        post = args.get("post", RANDOM)
        if not (post == RANDOM or isinstance(post, int)):
            raise HTTPException(400, "post must be an id or \"RANDOM\"")
        args = {"post": post}
    elif type in ("Like", "View"):
        if not isinstance(args.get("post"), int):
            raise HTTPException(400, "post id required")
        args = {"post": args["post"]}
    elif type == "Prune":
        threshold = args.get("threshold", 50)
        if not isinstance(threshold, int) or threshold < 0:
            raise HTTPException(400, "threshold must be a nonnegative integer")
        args = {"threshold": threshold}
    else:
        args = {}
    return type, actor, args


def create_app(session: ApiSession) -> FastAPI:
    app = FastAPI(title="ltree")
    app.state.session = session

    @app.post("/events")
    async def post_event(request: Request):
        if "application/json" not in request.headers.get("content-type", ""):
            raise HTTPException(415, "content-type must be application/json")
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(400, "malformed JSON body") from None
        type, actor, args = _validate_event(body)
        with session.lock:
            # precondition checks keep the log free of unappliable events
            if type in ("AddComment", "AddShare") and args["post"] == RANDOM:
                if not session.tree.post_ids():
                    raise HTTPException(409, "no posts yet")
            if type in ("Like", "View") or (
                type in ("AddComment", "AddShare") and args["post"] != RANDOM
            ):
                if args["post"] not in session.tree.post_ids():
                    raise HTTPException(422, f"unknown post id {args['post']}")
            rec = session.log.append(actor, type, args)
            try:
                result = apply_event(session.tree, type, args, actor)
            except NoPostsError:
                raise HTTPException(409, "no posts yet") from None
            except UnknownPostError as e:
                raise HTTPException(422, str(e)) from None
            out = {"seq": rec.seq, "status": session.tree.status()}
            if type == "Prune":
                out["prunedIds"] = result["prunedIds"]
            return out

    @app.get("/state")
    async def get_state():
        with session.lock:
            return session.state_doc()

    @app.get("/geometry")
    async def get_geometry():
        with session.lock:
            return JSONResponse(session.geometry_doc())

    @app.get("/log")
    async def get_log():
        with session.lock:
            return {"records": [r.to_json_obj() for r in session.log.records]}

    @app.post("/verify")
    async def verify():
        with session.lock:
            bad = verify_records(session.log.records)
        return {"ok": bad is None, "firstBadSeq": bad}

    @app.get("/", response_class=HTMLResponse)
    async def index():
        return _ui_html()

    return app


def _ui_html() -> str:
    """Serve the bundled web UI when it has been built, else a pointer."""
    import pathlib

    bundle = pathlib.Path(__file__).resolve().parents[2] / "frontend" / "dist" / "index.html"
    if bundle.exists():
        return bundle.read_text(encoding="utf-8")
    return (
        "<!doctype html><html><body><h1>ltree server</h1>"
        "<p>Web UI not built. See frontend/README.md; API lives at "
        "/events, /state, /geometry, /log, /verify.</p></body></html>"
    )
