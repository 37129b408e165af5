"""Letter-shaped test sources.

Glyphs are unions of axis-aligned rectangles in the unit square (u to the
right, v up). A grid cell is lit when its centre falls inside a stroke, so the
same glyph rasterises cleanly onto any lattice.
"""
import numpy as np

GLYPHS = {
    "H": [(0.15, 0.35, 0.1, 0.9), (0.65, 0.85, 0.1, 0.9), (0.15, 0.85, 0.42, 0.58)],
    "U": [(0.15, 0.35, 0.1, 0.9), (0.65, 0.85, 0.1, 0.9), (0.15, 0.85, 0.1, 0.28)],
    "S": [
        (0.15, 0.85, 0.74, 0.9),
        (0.15, 0.33, 0.5, 0.9),
        (0.15, 0.85, 0.42, 0.58),
        (0.67, 0.85, 0.1, 0.5),
        (0.15, 0.85, 0.1, 0.26),
    ],
    "T": [(0.08, 0.92, 0.74, 0.9), (0.4, 0.6, 0.1, 0.9)],
}
COMPOSITES = {"HUST": "HUST"}
_EPS = 1e-9


def rasterize(letter, rows, cols):
    """``(rows, cols)`` 0/1 image; row index grows with v (up)."""
    try:
        strokes = GLYPHS[letter]
    except KeyError:
        raise ValueError(f"unknown letter {letter!r}; available: {sorted(GLYPHS) + sorted(COMPOSITES)}") from None
    v = (np.arange(rows) + 0.5) / rows
    u = (np.arange(cols) + 0.5) / cols
    vv, uu = np.meshgrid(v, u, indexing="ij")
    img = np.zeros((rows, cols))
    for u0, u1, v0, v1 in strokes:
        img[(uu >= u0 - _EPS) & (uu <= u1 + _EPS) & (vv >= v0 - _EPS) & (vv <= v1 + _EPS)] = 1.0
    return img


def letter_image(letter_id, shape):
    """Magnitude volume of shape ``(Mz, My, Mx)`` for a letter or composite id.

    A composite puts one letter per z-layer when the grid has exactly that many
    layers, otherwise the letters sit side by side on every layer.
    """
    mz, my, mx = shape
    if letter_id in GLYPHS:
        return np.broadcast_to(rasterize(letter_id, my, mx), shape).copy()
    if letter_id not in COMPOSITES:
        raise ValueError(f"unknown letter {letter_id!r}; available: {sorted(GLYPHS) + sorted(COMPOSITES)}")
    seq = COMPOSITES[letter_id]
    if mz == len(seq):
        return np.stack([rasterize(ch, my, mx) for ch in seq])
    edges = np.linspace(0, mx, len(seq) + 1).round().astype(int)
    layer = np.zeros((my, mx))
    for ch, lo, hi in zip(seq, edges[:-1], edges[1:]):
        if hi > lo:
            layer[:, lo:hi] = rasterize(ch, my, hi - lo)
    return np.broadcast_to(layer, shape).copy()


def letter_source(letter_id, grid, phase="random", seed=0):
    """Letter bitmap rasterised onto ``grid`` as a :class:`SourceField`."""
    from .forward import source_field

    return source_field(letter_image(letter_id, grid.shape).ravel(), phase, seed)
