"""Social-account tree: one User trunk growing Posts and Friends, with
Comments and Shares hanging off posts and (likes, shares, views) counters.

All mutation goes through the methods below; the event log replays them.
Random post selection draws from a counter-based seeded stream so that
replay with the same seed picks the same posts.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, asdict
from enum import Enum

from .lsystem import Symbol, SymbolString

RANDOM = "RANDOM"


class TreeError(ValueError):
    pass


class NoPostsError(TreeError):
    """RANDOM target requested on a tree with no live posts."""


class UnknownPostError(TreeError):
    """Target id does not name a live post."""


class NodeKind(str, Enum):
    USER = "User"
    POST = "Post"
    FRIEND = "Friend"
    COMMENT = "Comment"
    SHARE = "Share"


@dataclass
class PostCounters:
    likes: int = 0
    shares: int = 0
    views: int = 0


@dataclass
class TreeNode:
    id: int
    kind: NodeKind
    parent: int | None
    author: str
    children: list[int] = field(default_factory=list)
    counters: PostCounters | None = None


class CounterRng:
    """Deterministic stream of uniform draws keyed by (seed, counter).

    State is just two integers, so it serializes trivially into
    snapshots and replays bit-for-bit.
    """

    def __init__(self, seed: int, counter: int = 0):
        self.seed = seed
        self.counter = counter

    def next_float(self) -> float:
        key = f"tree:{self.seed}:{self.counter}".encode()
        self.counter += 1
        h = hashlib.blake2b(key, digest_size=8).digest()
        return int.from_bytes(h, "big") / 2**64

    def next_index(self, n: int) -> int:
        if n <= 0:
            raise ValueError("empty choice")
        return min(int(self.next_float() * n), n - 1)

    def state(self) -> dict:
        return {"seed": self.seed, "counter": self.counter}

    @classmethod
    def from_state(cls, state: dict) -> "CounterRng":
        return cls(state["seed"], state["counter"])


class SocialTree:
    """A single user's account tree.  Single writer; snapshots are cheap."""

    def __init__(self, user_id: str, seed: int):
        self.nodes: dict[int, TreeNode] = {}
        self._next_id = 0
        self.rng = CounterRng(seed)
        self.trunk_id = self._alloc(NodeKind.USER, None, user_id)

    # -- construction helpers

    def _alloc(self, kind: NodeKind, parent: int | None, author: str) -> int:
        nid = self._next_id
        self._next_id += 1
        counters = PostCounters() if kind is NodeKind.POST else None
        self.nodes[nid] = TreeNode(nid, kind, parent, author, counters=counters)
        if parent is not None:
            self.nodes[parent].children.append(nid)
        return nid

    # -- queries

    @property
    def trunk(self) -> TreeNode:
        return self.nodes[self.trunk_id]

    def post_ids(self) -> list[int]:
        return sorted(n.id for n in self.nodes.values() if n.kind is NodeKind.POST)

    def friend_ids(self) -> list[int]:
        return sorted(n.id for n in self.nodes.values() if n.kind is NodeKind.FRIEND)

    def status(self) -> dict:
        return {
            "branches": len(self.nodes),
            "posts": len(self.post_ids()),
            "friends": len(self.friend_ids()),
        }

    def _live_post(self, post_id) -> TreeNode:
        node = self.nodes.get(post_id)
        if node is None or node.kind is not NodeKind.POST:
            raise UnknownPostError(f"no live post with id {post_id!r}")
        return node

    def _pick_post(self, post_id) -> TreeNode:
        if post_id == RANDOM:
            posts = self.post_ids()
            if not posts:
                raise NoPostsError("no posts to target")
            return self.nodes[posts[self.rng.next_index(len(posts))]]
        return self._live_post(post_id)

    # -- mutations (the paper's seven key events plus targeted variants)

    def add_post(self, author: str) -> int:
        return self._alloc(NodeKind.POST, self.trunk_id, author)

    def add_friend(self, friend_actor: str) -> int:
        return self._alloc(NodeKind.FRIEND, self.trunk_id, friend_actor)

    def add_comment(self, post_id, author: str) -> int:
        post = self._pick_post(post_id)
        post.counters.views += 1
        return self._alloc(NodeKind.COMMENT, post.id, author)

    def add_share(self, post_id, author: str) -> int:
        post = self._pick_post(post_id)
        post.counters.views += 1
        post.counters.shares += 1
        return self._alloc(NodeKind.SHARE, post.id, author)

    def like_all(self) -> int:
        posts = self.post_ids()
        for pid in posts:
            c = self.nodes[pid].counters
            c.likes += 1
            c.views += 1
        return len(posts)

    def view_all(self) -> int:
        posts = self.post_ids()
        for pid in posts:
            self.nodes[pid].counters.views += 1
        return len(posts)

    def like(self, post_id) -> PostCounters:
        c = self._live_post(post_id).counters
        c.likes += 1
        c.views += 1
        return c

    def view(self, post_id) -> PostCounters:
        c = self._live_post(post_id).counters
        c.views += 1
        return c

    def prune(self, threshold: int = 50) -> list[int]:
        """Remove every post with views strictly above ``threshold``,
        together with all its comments and shares.  Ids are never reused."""
        if threshold < 0:
            raise ValueError("threshold must be nonnegative")
        removed = [
            pid for pid in self.post_ids()
            if self.nodes[pid].counters.views > threshold
        ]
        for pid in removed:
            post = self.nodes[pid]
            for cid in post.children:
                del self.nodes[cid]
            del self.nodes[pid]
            self.trunk.children.remove(pid)
        return removed

    # -- L-string mapping

    def to_lstring(self, posts_left: bool = True) -> SymbolString:
        """Emit the account as a bracket-balanced symbol string.

        Trunk contributes an m-prefix; each Friend a bracketed side twig
        ending in a tagged ``k`` marker; each Post a bracketed branch
        with one twig per comment/share plus a ``t`` label symbol
        carrying (likes, shares, views).  Marker tags: 0 friend,
        1 comment, 2 share.  Posts fan to one side, friends the other.
        """
        post_turn, friend_turn = ("l", "r") if posts_left else ("r", "l")
        twig_in, twig_out = ("R", "L") if posts_left else ("L", "R")
        syms: list[Symbol] = [Symbol("m")] * 5
        for cid in self.trunk.children:
            node = self.nodes[cid]
            if node.kind is NodeKind.FRIEND:
                syms += _sstr(f"mm[{friend_turn}m") + [Symbol("k", (0.0,))] + _sstr("]")
            elif node.kind is NodeKind.POST:
                syms += _sstr(f"mmm[{post_turn}mm")
                for gid in node.children:
                    child = self.nodes[gid]
                    if child.kind is NodeKind.COMMENT:
                        syms += _sstr(f"m[{twig_in}mm") + [Symbol("k", (1.0,))] + _sstr("]")
                    else:
                        syms += _sstr(f"m[{twig_out}mm") + [Symbol("k", (2.0,))] + _sstr("]")
                c = node.counters
                syms.append(Symbol("t", (float(c.likes), float(c.shares), float(c.views))))
                syms += _sstr("]")
        return SymbolString(tuple(syms))

    # -- serialization (snapshots)

    def to_dict(self) -> dict:
        return {
            "trunkId": self.trunk_id,
            "nextId": self._next_id,
            "rng": self.rng.state(),
            "nodes": [
                {
                    "id": n.id,
                    "kind": n.kind.value,
                    "parent": n.parent,
                    "author": n.author,
                    "children": list(n.children),
                    "counters": asdict(n.counters) if n.counters else None,
                }
                for n in (self.nodes[i] for i in sorted(self.nodes))
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SocialTree":
        tree = cls.__new__(cls)
        tree.trunk_id = data["trunkId"]
        tree._next_id = data["nextId"]
        tree.rng = CounterRng.from_state(data["rng"])
        tree.nodes = {}
        for nd in data["nodes"]:
            counters = PostCounters(**nd["counters"]) if nd["counters"] else None
            tree.nodes[nd["id"]] = TreeNode(
                nd["id"], NodeKind(nd["kind"]), nd["parent"], nd["author"],
                children=list(nd["children"]), counters=counters,
            )
        return tree

    def check_structure(self):
        """Raise if parent/child links are inconsistent or unreachable."""
        trunk = self.trunk
        if trunk.kind is not NodeKind.USER or trunk.parent is not None:
            raise TreeError("trunk must be a parentless User")
        users = [n for n in self.nodes.values() if n.kind is NodeKind.USER]
        if len(users) != 1:
            raise TreeError("exactly one User per tree")
        seen = set()
        stack = [self.trunk_id]
        while stack:
            nid = stack.pop()
            if nid in seen:
                raise TreeError(f"cycle through node {nid}")
            seen.add(nid)
            node = self.nodes[nid]
            for cid in node.children:
                child = self.nodes.get(cid)
                if child is None or child.parent != nid:
                    raise TreeError(f"broken link {nid} -> {cid}")
                stack.append(cid)
        if seen != set(self.nodes):
            raise TreeError("unreachable nodes present")
        for n in self.nodes.values():
            if n.kind in (NodeKind.COMMENT, NodeKind.SHARE):
                if self.nodes[n.parent].kind is not NodeKind.POST:
                    raise TreeError(f"{n.kind.value} {n.id} not under a Post")
            elif n.kind in (NodeKind.POST, NodeKind.FRIEND):
                if n.parent != self.trunk_id:
                    raise TreeError(f"{n.kind.value} {n.id} not under the trunk")
            if n.kind is NodeKind.POST:
                share_children = sum(
                    1 for c in n.children
                    if self.nodes[c].kind is NodeKind.SHARE
                )
                if n.counters.shares != share_children:
                    raise TreeError(f"post {n.id} shares counter out of sync")


def _sstr(text: str) -> list[Symbol]:
    return [Symbol(c) for c in text]


def new_tree(user_id: str, seed: int) -> SocialTree:
    return SocialTree(user_id, seed)
