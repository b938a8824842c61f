import pathlib
import random

import pytest

from ltree import eventlog
from ltree.lsystem import parse_grammar
from ltree.tree import RANDOM, CounterRng, new_tree

REPO = pathlib.Path(__file__).resolve().parents[1]
SOCIAL_GRAMMAR_PATH = REPO / "grammars" / "social.grammar"


@pytest.fixture(scope="session")
def social_grammar():
    return parse_grammar(SOCIAL_GRAMMAR_PATH.read_text())


# ---------------------------------------------------------------------------
# Brute-force counter oracle, shared by tree, event-log, and acceptance
# tests.  It keeps a flat dict of post records and never touches
# SocialTree; RANDOM targets resolve per the documented contract
# (uniform over live posts ordered by id, counter-based stream).


class OracleSim:
    def __init__(self, seed=0):
        self.rng = CounterRng(seed)
        self.posts = {}   # id -> {"likes","views","comments","shares"}
        self.friends = 0
        self.next_id = 1  # trunk takes id 0

    def live(self):
        return sorted(self.posts)

    def apply(self, type, args):
        if type == "AddPost":
            self.posts[self.next_id] = {
                "likes": 0, "views": 0, "comments": 0, "shares": 0,
            }
            self.next_id += 1
        elif type == "AddFriend":
            self.friends += 1
            self.next_id += 1
        elif type in ("AddComment", "AddShare"):
            target = args.get("post", RANDOM)
            if target == RANDOM:
                live = self.live()
                assert live, "generator bug: RANDOM with no posts"
                target = live[self.rng.next_index(len(live))]
            p = self.posts[target]
            p["views"] += 1
            p["comments" if type == "AddComment" else "shares"] += 1
            self.next_id += 1
        elif type == "LikeAll":
            for p in self.posts.values():
                p["likes"] += 1
                p["views"] += 1
        elif type == "ViewAll":
            for p in self.posts.values():
                p["views"] += 1
        elif type == "Like":
            self.posts[args["post"]]["likes"] += 1
            self.posts[args["post"]]["views"] += 1
        elif type == "View":
            self.posts[args["post"]]["views"] += 1
        elif type == "Prune":
            t = args.get("threshold", 50)
            for pid in [p for p, r in self.posts.items() if r["views"] > t]:
                del self.posts[pid]
        else:
            raise AssertionError(type)


TARGETED = ("AddComment", "AddShare", "Like", "View")


def random_events(rng: random.Random, n: int, seed=0,
                  allow_random_targets=True, prune_rate=0.0):
    """Generate a valid event script of length n, plus its oracle state.

    Runs the brute-force simulation alongside generation so targeted
    events always name live posts, even across mid-script prunes.
    """
    sim = OracleSim(seed)
    events = []
    for _ in range(n):
        if prune_rate and rng.random() < prune_rate:
            type, args = "Prune", {"threshold": rng.choice([0, 1, 3, 50])}
        else:
            type = rng.choice((
                "AddPost", "AddFriend", "AddComment", "AddShare",
                "LikeAll", "ViewAll", "Like", "View",
            ))
            args = {}
            if type in TARGETED:
                live = sim.live()
                if not live:
                    type = "AddPost"
                elif type in ("AddComment", "AddShare") \
                        and allow_random_targets and rng.random() < 0.5:
                    args = {"post": RANDOM}
                else:
                    args = {"post": rng.choice(live)}
        sim.apply(type, args)
        events.append((f"actor{rng.randrange(5)}", type, args))
    return events, sim


def apply_events(events, seed=0):
    tree = new_tree("user", seed)
    for actor, type, args in events:
        eventlog.apply_event(tree, type, args, actor)
    return tree
