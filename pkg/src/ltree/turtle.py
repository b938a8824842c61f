"""2D turtle interpretation of symbol strings and SVG emission.

Coordinates are y-up internally; the flip to screen coordinates happens
only when writing SVG.  Heading 90 degrees points straight up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .lsystem import Grammar, SymbolString, Symbol, parse_grammar, rewrite

Point = tuple[float, float]

MARKER_KINDS = ("friend", "comment", "share")

MARKER_COLORS = {
    "friend": "blue",
    "comment": "yellow",
    "share": "red",
}


class InterpretError(ValueError):
    pass


@dataclass(frozen=True)
class TurtleConfig:
    step_length: float = 12.0
    branch_angle: float = 25.0
    twig_angle: float = 35.0
    start_position: Point = (0.0, 0.0)
    start_heading: float = 90.0
    marker_radius: float = 5.0

    def __post_init__(self):
        if self.step_length <= 0:
            raise ValueError("step_length must be positive")
        if self.marker_radius <= 0:
            raise ValueError("marker_radius must be positive")
        for a in (self.branch_angle, self.twig_angle, self.start_heading):
            if not math.isfinite(a):
                raise ValueError("angles must be finite")


@dataclass
class TurtleState:
    position: Point
    heading: float
    depth: int = 0


# Symbol actions ------------------------------------------------------------


@dataclass(frozen=True)
class Draw:
    tag: str = "branch"


@dataclass(frozen=True)
class Move:
    pass


@dataclass(frozen=True)
class TurnLeft:
    angle: float | None = None  # None -> config.branch_angle


@dataclass(frozen=True)
class TurnRight:
    angle: float | None = None


@dataclass(frozen=True)
class Marker:
    kind: str | None = None  # None -> first symbol param indexes MARKER_KINDS


@dataclass(frozen=True)
class Label:
    # formats the symbol's params into the label text
    format: "callable" = staticmethod(lambda params: " ".join(str(p) for p in params))


@dataclass(frozen=True)
class NoOp:
    pass


@dataclass
class Geometry:
    segments: list[tuple[Point, Point, str]] = field(default_factory=list)
    markers: list[tuple[Point, str]] = field(default_factory=list)
    labels: list[tuple[Point, str]] = field(default_factory=list)
    bounds: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def recompute_bounds(self, seed_point: Point):
        xs = [seed_point[0]]
        ys = [seed_point[1]]
        for a, b, _ in self.segments:
            xs += [a[0], b[0]]
            ys += [a[1], b[1]]
        for c, _ in self.markers:
            xs.append(c[0])
            ys.append(c[1])
        for p, _ in self.labels:
            xs.append(p[0])
            ys.append(p[1])
        self.bounds = (min(xs), min(ys), max(xs), max(ys))


def _advance(state: TurtleState, distance: float) -> Point:
    rad = math.radians(state.heading)
    x, y = state.position
    return (x + distance * math.cos(rad), y + distance * math.sin(rad))


def interpret(input: SymbolString, config: TurtleConfig,
              symbol_actions: dict[str, object]) -> Geometry:
    """Run standard turtle semantics over ``input``.

    ``[`` pushes the full turtle state and ``]`` restores it exactly;
    both may be overridden in ``symbol_actions`` but default to
    push/pop.  Every other letter must have an action.
    """
    if not input.is_balanced():
        raise InterpretError("input brackets are unbalanced")
    geo = Geometry()
    state = TurtleState(position=config.start_position,
                        heading=config.start_heading)
    stack: list[TurtleState] = []
    for sym in input:
        if sym.letter == "[" and "[" not in symbol_actions:
            stack.append(TurtleState(state.position, state.heading, state.depth))
            state.depth += 1
            continue
        if sym.letter == "]" and "]" not in symbol_actions:
            if not stack:
                raise InterpretError("pop on empty stack")
            state = stack.pop()
            continue
        try:
            action = symbol_actions[sym.letter]
        except KeyError:
            raise InterpretError(f"no action for letter {sym.letter!r}") from None
        _apply_action(action, sym, state, config, geo)
    geo.recompute_bounds(config.start_position)
    return geo


def _apply_action(action, sym: Symbol, state: TurtleState,
                  config: TurtleConfig, geo: Geometry):
    if isinstance(action, Draw):
        end = _advance(state, config.step_length)
        geo.segments.append((state.position, end, action.tag))
        state.position = end
    elif isinstance(action, Move):
        state.position = _advance(state, config.step_length)
    elif isinstance(action, TurnLeft):
        state.heading += action.angle if action.angle is not None else config.branch_angle
    elif isinstance(action, TurnRight):
        state.heading -= action.angle if action.angle is not None else config.branch_angle
    elif isinstance(action, Marker):
        kind = action.kind
        if kind is None:
            if not sym.params:
                raise InterpretError(f"marker symbol {sym.letter!r} has no kind parameter")
            kind = MARKER_KINDS[int(sym.params[0])]
        geo.markers.append((state.position, kind))
    elif isinstance(action, Label):
        # nudge the anchor off the branch end so text clears the stroke
        anchor = _advance(state, config.marker_radius)
        geo.labels.append((anchor, action.format(sym.params)))
    elif isinstance(action, NoOp):
        pass
    else:
        raise InterpretError(f"unsupported action {action!r}")


# SVG emission --------------------------------------------------------------


@dataclass(frozen=True)
class SvgStyle:
    stroke_width: float = 1.5
    stroke_color: str = "#4a3526"
    marker_colors: tuple[tuple[str, str], ...] = tuple(MARKER_COLORS.items())
    marker_radius: float = 5.0
    font_size: float = 10.0
    text_color: str = "#222222"
    padding: float = 20.0
    background: str = "white"


def _num(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def emit_svg(geometry: Geometry, style: SvgStyle = SvgStyle()) -> str:
    """Render geometry into a standalone SVG 1.1 document.

    Output is byte-identical for identical inputs: iteration order is the
    geometry's own list order and numbers use fixed formatting.
    """
    minx, miny, maxx, maxy = geometry.bounds
    pad = style.padding
    width = (maxx - minx) + 2 * pad
    height = (maxy - miny) + 2 * pad

    def sx(x: float) -> float:
        return x - minx + pad

    def sy(y: float) -> float:
        return maxy - y + pad  # flip y-up to screen

    colors = dict(style.marker_colors)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}">'
    ]
    if style.background:
        parts.append(
            f'<rect width="{_num(width)}" height="{_num(height)}" '
            f'fill="{style.background}"/>'
        )
    for (x1, y1), (x2, y2), tag in geometry.segments:
        parts.append(
            f'<line x1="{_num(sx(x1))}" y1="{_num(sy(y1))}" '
            f'x2="{_num(sx(x2))}" y2="{_num(sy(y2))}" '
            f'stroke="{style.stroke_color}" stroke-width="{_num(style.stroke_width)}" '
            f'class="{tag}"/>'
        )
    for (x, y), kind in geometry.markers:
        parts.append(
            f'<circle cx="{_num(sx(x))}" cy="{_num(sy(y))}" '
            f'r="{_num(style.marker_radius)}" fill="{colors.get(kind, "black")}" '
            f'class="{kind}"/>'
        )
    for (x, y), text in geometry.labels:
        parts.append(
            f'<text x="{_num(sx(x))}" y="{_num(sy(y))}" '
            f'font-size="{_num(style.font_size)}" fill="{style.text_color}">'
            f'{_escape(text)}</text>'
        )
    parts.append("</svg>\n")
    return "\n".join(parts)


def _escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


# Koch validation curve -----------------------------------------------------

KOCH_GRAMMAR_TEXT = """\
axiom: F
F -> F+F-F-F+F
"""

KOCH_ACTIONS = {
    "F": Draw(tag="koch"),
    "+": TurnLeft(90.0),
    "-": TurnRight(90.0),
}


def koch_grammar() -> Grammar:
    return parse_grammar(KOCH_GRAMMAR_TEXT)


def koch_quadratic(iterations: int, config: TurtleConfig = TurtleConfig()) -> Geometry:
    """Quadratic Koch curve: F -> F+F-F-F+F with 90 degree turns.

    Segment count is exactly 5**iterations.
    """
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    g = koch_grammar()
    s = rewrite(g, g.axiom, iterations)
    return interpret(s, config, KOCH_ACTIONS)
