"""Tiny deterministic SVG builder.

Every number goes through :func:`num`, which fixes four decimals, so the
same inputs always give byte-identical files.
"""

from __future__ import annotations

from xml.sax.saxutils import escape, quoteattr


def num(v: float) -> str:
    s = f"{float(v):.4f}"
    return "0.0000" if s == "-0.0000" else s


def _attrs(attrs: dict) -> str:
    parts = []
    for key, value in attrs.items():
        if value is None:
            continue
        name = key.rstrip("_").replace("_", "-")
        if isinstance(value, float):
            value = num(value)
        parts.append(f"{name}={quoteattr(str(value))}")
    return " ".join(parts)


class Svg:
    def __init__(self, width: float, height: float, font_size: float = 11.0):
        self.width = width
        self.height = height
        self.font_size = font_size
        self._items: list[str] = []

    def add(self, tag: str, text: str | None = None, **attrs) -> None:
        a = _attrs(attrs)
        if text is None:
            self._items.append(f"<{tag} {a}/>")
        else:
            self._items.append(f"<{tag} {a}>{escape(text)}</{tag}>")

    def rect(self, x, y, w, h, **attrs):
        self.add("rect", x=float(x), y=float(y), width=float(w), height=float(h), **attrs)

    def line(self, x1, y1, x2, y2, stroke="#333333", **attrs):
        self.add("line", x1=float(x1), y1=float(y1), x2=float(x2), y2=float(y2), stroke=stroke, **attrs)

    def circle(self, cx, cy, r, **attrs):
        self.add("circle", cx=float(cx), cy=float(cy), r=float(r), **attrs)

    def text(self, x, y, s, anchor="middle", **attrs):
        attrs.setdefault("font_size", float(self.font_size))
        self.add("text", str(s), x=float(x), y=float(y), text_anchor=anchor, **attrs)

    def render(self) -> str:
        head = (
            '<svg xmlns="http://www.w3.org/2000/svg" '
            f'width="{num(self.width)}" height="{num(self.height)}" '
            f'viewBox="0 0 {num(self.width)} {num(self.height)}" '
            'font-family="Helvetica, Arial, sans-serif">'
        )
        body = "\n".join(self._items)
        return f"{head}\n<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n{body}\n</svg>\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.render())


def shade(v: float, dark=(8, 48, 107)) -> str:
    """Linear white-to-dark color for ``v`` in [0, 1]."""
    v = min(max(float(v), 0.0), 1.0)
    r, g, b = (round(255 + (c - 255) * v) for c in dark)
    return f"#{r:02x}{g:02x}{b:02x}"
