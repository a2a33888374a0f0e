"""Deterministic SVG rendering for fields and raster components.

Output is a pure function of the input geometry: fixed attribute order,
fixed coordinate formatting, no timestamps, so re-rendering the same
object is byte-identical.  Trajectories become one path element each
(chunks are subpaths); a component becomes one filled path whose subpaths
are row runs of vacant cells; the unit circle is always drawn.
"""

from __future__ import annotations

import numpy as np

from .geometry import RasterComponent
from .interlacement import InterlacementField

STROKE = "#20425a"
FILL = "#e8b84b"
CIRCLE = "#9a2f2f"


def _num(v: float) -> str:
    s = format(float(v), ".3f")
    return "0.000" if s == "-0.000" else s


def _path_points(verts: np.ndarray) -> str:
    # y flipped so the mathematical orientation matches the screen
    return "M" + "L".join(f"{_num(x)} {_num(-y)}" for x, y in verts)


def _field_paths(field: InterlacementField) -> list[str]:
    parts = []
    for i in range(len(field.entries)):
        subs = []
        for verts, _ in field.entries[i].chunks:
            if len(verts) >= 2:
                subs.append(_path_points(verts))
        if subs:
            parts.append(f'<path class="traj" d="{"".join(subs)}" '
                         f'fill="none" stroke="{STROKE}" '
                         'stroke-width="0.4%"/>')
    return parts


def _component_path(comp: RasterComponent) -> str:
    res = comp.resolution
    w = comp.half_width
    subs = []
    cells = comp.cells
    i = 0
    n = cells.shape[0]
    while i < n:
        j = i + 1
        while (j < n and cells[j, 0] == cells[i, 0]
               and cells[j, 1] == cells[j - 1, 1] + 1):
            j += 1
        x0 = cells[i, 0] * res - w
        y0 = cells[i, 1] * res - w
        y1 = cells[j - 1, 1] * res - w + res
        # one run of cells along a row; y flipped as in _path_points
        subs.append(f"M{_num(x0)} {_num(-y0)}H{_num(x0 + res)}"
                    f"V{_num(-y1)}H{_num(x0)}Z")
        i = j
    return (f'<path class="component" d="{"".join(subs)}" '
            f'fill="{FILL}" fill-rule="nonzero" stroke="none"/>')


def render_svg(obj, overlay: InterlacementField | None = None) -> str:
    """SVG document for a field or a raster component.

    ``overlay`` draws a field's trajectories on top of a component."""
    if isinstance(obj, InterlacementField):
        window = obj.window_radius
        body = _field_paths(obj)
    elif isinstance(obj, RasterComponent):
        window = obj.half_width
        body = [_component_path(obj)] if obj.cells.shape[0] else []
    else:
        raise TypeError("render_svg takes a field or a raster component")
    if overlay is not None:
        if not isinstance(overlay, InterlacementField):
            raise TypeError("overlay must be a field")
        body.extend(_field_paths(overlay))
    w = _num(window)
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="-{w} -{w} {_num(2 * window)} {_num(2 * window)}">')
    circle = (f'<circle cx="0" cy="0" r="1" fill="none" '
              f'stroke="{CIRCLE}" stroke-width="0.4%"/>')
    return "\n".join([head, *body, circle, "</svg>"]) + "\n"


def save_svg(obj, path: str, overlay: InterlacementField | None = None
             ) -> None:
    with open(path, "w") as f:
        f.write(render_svg(obj, overlay))
