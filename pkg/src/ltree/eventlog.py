"""Append-only, hash-chained, replayable event log.

One record per line in the log file, each line a JSON object with fields
seq, ts, actor, type, args, prevHash (hex), hash (hex).  The hash covers
a canonical binary serialization so it is independent of JSON formatting:

    SHA-256( seq:8B-BE || ts:8B-BE || len(actor):4B-BE || actor-utf8
             || len(type):4B-BE || type-utf8
             || for each arg name in sorted order:
                  len(name):4B-BE || name-utf8
                  || tag:1B ('i' int / 's' str) || len(value):4B-BE || value-utf8
             || prevHash:32B )

Record 0 uses 32 zero bytes as prevHash.  Timestamps are recorded but
excluded from replay semantics; replay orders strictly by seq.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass

from .tree import RANDOM, SocialTree, new_tree

GENESIS_HASH = b"\x00" * 32
SNAPSHOT_MAGIC = b"LTREE1"

EVENT_TYPES = (
    "AddPost", "AddFriend", "AddComment", "AddShare",
    "LikeAll", "ViewAll", "Like", "View", "Prune",
)


class LogError(ValueError):
    pass


class ReplayError(LogError):
    def __init__(self, seq: int, message: str):
        super().__init__(f"replay failed at seq {seq}: {message}")
        self.seq = seq


@dataclass(frozen=True)
class EventRecord:
    seq: int
    ts: int
    actor: str
    type: str
    args: dict
    prev_hash: bytes
    hash: bytes

    def to_json_obj(self) -> dict:
        return {
            "seq": self.seq,
            "ts": self.ts,
            "actor": self.actor,
            "type": self.type,
            "args": self.args,
            "prevHash": self.prev_hash.hex(),
            "hash": self.hash.hex(),
        }

    def to_line(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))


def _len_prefixed(data: bytes) -> bytes:
    return len(data).to_bytes(4, "big") + data


def canonical_bytes(seq: int, ts: int, actor: str, type: str,
                    args: dict, prev_hash: bytes) -> bytes:
    out = [seq.to_bytes(8, "big"), ts.to_bytes(8, "big"),
           _len_prefixed(actor.encode()), _len_prefixed(type.encode())]
    for name in sorted(args):
        value = args[name]
        out.append(_len_prefixed(name.encode()))
        if isinstance(value, bool):
            raise LogError("boolean event arguments are not supported")
        if isinstance(value, int):
            out.append(b"i" + _len_prefixed(str(value).encode()))
        elif isinstance(value, str):
            out.append(b"s" + _len_prefixed(value.encode()))
        else:
            raise LogError(f"unsupported argument type for {name!r}")
    out.append(prev_hash)
    return b"".join(out)


def record_hash(seq, ts, actor, type, args, prev_hash) -> bytes:
    return hashlib.sha256(
        canonical_bytes(seq, ts, actor, type, args, prev_hash)
    ).digest()


class EventLog:
    """Single-appender log, optionally backed by a file.

    Appends are durable (flushed and fsynced) before returning.
    """

    def __init__(self, path: str | None = None):
        self.path = path
        self.records: list[EventRecord] = []
        if path and os.path.exists(path):
            with open(path, "rb") as f:
                self.records = parse_records(f.read())
            bad = verify_records(self.records)
            if bad is not None:
                raise LogError(f"existing log fails verification at seq {bad}")

    @property
    def last_hash(self) -> bytes:
        return self.records[-1].hash if self.records else GENESIS_HASH

    def append(self, actor: str, type: str, args: dict | None = None,
               clock=None) -> EventRecord:
        if type not in EVENT_TYPES:
            raise LogError(f"unknown event type {type!r}")
        args = dict(args or {})
        seq = len(self.records)
        ts = int((clock() if clock else time.time()) * 1000)
        prev = self.last_hash
        h = record_hash(seq, ts, actor, type, args, prev)
        rec = EventRecord(seq, ts, actor, type, args, prev, h)
        if self.path:
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(rec.to_line() + "\n")
                f.flush()
                os.fsync(f.fileno())
        self.records.append(rec)
        return rec


_RECORD_KEYS = {"seq", "ts", "actor", "type", "args", "prevHash", "hash"}
_HEX_RE = re.compile(r"[0-9a-f]{64}\Z")


def _parse_record(line: str) -> EventRecord:
    """Strictly parse one log line; any deviation from the canonical
    shape (key set, types, lowercase hex) is an error, so every bit of
    the line is load-bearing for verification."""
    obj = json.loads(line)
    if not isinstance(obj, dict) or set(obj) != _RECORD_KEYS:
        raise LogError("record has wrong field set")
    if not (isinstance(obj["seq"], int) and isinstance(obj["ts"], int)
            and not isinstance(obj["seq"], bool)
            and not isinstance(obj["ts"], bool)
            and obj["seq"] >= 0 and obj["ts"] >= 0):
        raise LogError("seq/ts must be nonnegative integers")
    if not (isinstance(obj["actor"], str) and isinstance(obj["type"], str)):
        raise LogError("actor/type must be strings")
    args = obj["args"]
    if not isinstance(args, dict):
        raise LogError("args must be an object")
    for k, v in args.items():
        if not isinstance(k, str) or isinstance(v, bool) \
                or not isinstance(v, (int, str)):
            raise LogError("args must map strings to ints or strings")
    for field in ("prevHash", "hash"):
        if not (isinstance(obj[field], str) and _HEX_RE.match(obj[field])):
            raise LogError(f"{field} must be 64 lowercase hex digits")
    return EventRecord(
        seq=obj["seq"], ts=obj["ts"], actor=obj["actor"], type=obj["type"],
        args=dict(args), prev_hash=bytes.fromhex(obj["prevHash"]),
        hash=bytes.fromhex(obj["hash"]),
    )


def _split_lines(data: bytes) -> list[str]:
    # split on '\n' only: other control characters must not act as
    # record separators or a flipped byte could go unnoticed
    text = data.decode("utf-8", errors="replace")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def parse_records(data: bytes) -> list[EventRecord]:
    records = []
    for idx, line in enumerate(_split_lines(data)):
        try:
            records.append(_parse_record(line))
        except (ValueError, KeyError, TypeError, LogError):
            raise LogError(f"unparsable record at seq {idx}") from None
    return records


def verify_records(records: list[EventRecord]) -> int | None:
    """Return None if the chain verifies, else the first bad seq."""
    prev = GENESIS_HASH
    for i, rec in enumerate(records):
        try:
            recomputed = record_hash(rec.seq, rec.ts, rec.actor, rec.type,
                                     rec.args, rec.prev_hash)
        except (LogError, OverflowError, AttributeError, TypeError):
            return i
        if rec.seq != i or rec.prev_hash != prev or rec.hash != recomputed:
            return i
        prev = rec.hash
    return None


def verify_chain(source) -> int | None:
    """Verify a log given a path, raw bytes, or a record list.

    Returns None when the chain is intact, otherwise the seq (line
    index) of the first record that fails to parse, link, or re-hash.
    """
    if isinstance(source, EventLog):
        records = source.records
    elif isinstance(source, (bytes, bytearray)):
        records = _parse_lenient(bytes(source))
        if isinstance(records, int):
            return records
    elif isinstance(source, str):
        with open(source, "rb") as f:
            data = f.read()
        return verify_chain(data)
    else:
        records = list(source)
    return verify_records(records)


def _parse_lenient(data: bytes):
    """Parse what parses; an unparsable line is the first bad seq."""
    records = []
    for idx, line in enumerate(_split_lines(data)):
        try:
            records.append(_parse_record(line))
        except (ValueError, KeyError, TypeError, LogError):
            # verify every record before the damage, then report idx
            bad = verify_records(records)
            return bad if bad is not None else idx
    return records


# Replay --------------------------------------------------------------------


def apply_event(tree: SocialTree, type: str, args: dict, actor: str) -> dict:
    """Apply one event payload to the tree; returns per-event results."""
    if type == "AddPost":
        return {"nodeId": tree.add_post(actor)}
    if type == "AddFriend":
        return {"nodeId": tree.add_friend(actor)}
    if type == "AddComment":
        nid = tree.add_comment(args.get("post", RANDOM), actor)
        return {"nodeId": nid, "resolvedPost": tree.nodes[nid].parent}
    if type == "AddShare":
        nid = tree.add_share(args.get("post", RANDOM), actor)
        return {"nodeId": nid, "resolvedPost": tree.nodes[nid].parent}
    if type == "LikeAll":
        return {"affected": tree.like_all()}
    if type == "ViewAll":
        return {"affected": tree.view_all()}
    if type == "Like":
        tree.like(args["post"])
        return {}
    if type == "View":
        tree.view(args["post"])
        return {}
    if type == "Prune":
        return {"prunedIds": tree.prune(int(args.get("threshold", 50)))}
    raise LogError(f"unknown event type {type!r}")


def replay(records: list[EventRecord], seed: int,
           audit: list | None = None) -> SocialTree:
    """Rebuild the tree by applying records in seq order.

    The genesis actor (record 0's actor) owns the tree.  RANDOM targets
    resolve through the tree's seeded stream; resolved targets and prune
    results are appended to ``audit`` when given, for human inspection.
    """
    actor0 = records[0].actor if records else "user"
    tree = new_tree(actor0, seed)
    for rec in records:
        try:
            result = apply_event(tree, rec.type, rec.args, rec.actor)
        except (LogError, ValueError) as e:
            raise ReplayError(rec.seq, str(e)) from None
        if audit is not None and result:
            audit.append({"seq": rec.seq, **result})
    return tree


# Snapshots -----------------------------------------------------------------


def save_snapshot(path: str, tree: SocialTree, last_seq: int):
    body = json.dumps(
        {"lastSeq": last_seq, "tree": tree.to_dict()},
        sort_keys=True, separators=(",", ":"),
    ).encode()
    with open(path, "wb") as f:
        f.write(SNAPSHOT_MAGIC + body)


def load_snapshot(path: str) -> tuple[SocialTree, int]:
    with open(path, "rb") as f:
        data = f.read()
    if not data.startswith(SNAPSHOT_MAGIC):
        raise LogError("not a snapshot file (bad magic)")
    obj = json.loads(data[len(SNAPSHOT_MAGIC):])
    return SocialTree.from_dict(obj["tree"]), obj["lastSeq"]


def replay_from_snapshot(tree: SocialTree, last_seq: int,
                         records: list[EventRecord]) -> SocialTree:
    """Continue replay after ``last_seq`` on a snapshot-restored tree."""
    for rec in records:
        if rec.seq <= last_seq:
            continue
        try:
            apply_event(tree, rec.type, rec.args, rec.actor)
        except (LogError, ValueError) as e:
            raise ReplayError(rec.seq, str(e)) from None
    return tree
