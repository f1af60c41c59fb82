"""Byte-stable SVG rendering with matplotlib's SVG backend."""
import io
from typing import Callable

from matplotlib import rc_context
from matplotlib.figure import Figure

FIGURE_SIZE_INCHES = (8, 5)
DPI = 72

SVG_STYLE = {
    "svg.hashsalt": "lapa",
    "svg.fonttype": "none",
    "svg.image_inline": True,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.unicode_minus": False,
    "path.simplify": False,
}


def render_svg(draw: Callable[[Figure], None]) -> str:
    """Draw on a fresh fixed-size figure and return its SVG text, with no date or random ids."""
    with rc_context(SVG_STYLE):
        figure = Figure(figsize=FIGURE_SIZE_INCHES, dpi=DPI)
        draw(figure)
        buffer = io.StringIO()
        figure.savefig(buffer, format="svg", dpi=DPI, metadata={"Date": None, "Creator": "lapa"})
    return buffer.getvalue()
