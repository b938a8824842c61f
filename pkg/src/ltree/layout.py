"""Deterministic conversion of a SocialTree into turtle geometry.

Posts fan to one side of the trunk and friends to the other; each leaf
node gets one colored marker (friend blue, comment yellow, share red)
and each post a text label with its counters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .tree import SocialTree
from .turtle import (
    Draw, Geometry, Label, Marker, TurnLeft, TurnRight, TurtleConfig, interpret,
)

DEFAULT_LABEL_FORMAT = "i:{i} s:{s} v:{v}"


@dataclass(frozen=True)
class LayoutConfig:
    turtle: TurtleConfig = field(default_factory=TurtleConfig)
    label_format: str = DEFAULT_LABEL_FORMAT
    posts_left: bool = True

    def __post_init__(self):
        for ph in ("{i}", "{s}", "{v}"):
            if ph not in self.label_format:
                raise ValueError(f"label_format must mention {ph}")


def _label_text(fmt: str, params) -> str:
    i, s, v = (int(p) for p in params)
    return fmt.format(i=i, s=s, v=v)


def layout(tree: SocialTree, config: LayoutConfig = LayoutConfig()) -> Geometry:
    """Lay the account tree out as branch segments, markers, and labels."""
    t = config.turtle
    actions = {
        "m": Draw(),
        "l": TurnLeft(),
        "r": TurnRight(),
        "L": TurnLeft(t.twig_angle),
        "R": TurnRight(t.twig_angle),
        "k": Marker(),
        "t": Label(format=lambda params: _label_text(config.label_format, params)),
    }
    s = tree.to_lstring(posts_left=config.posts_left)
    return interpret(s, t, actions)
