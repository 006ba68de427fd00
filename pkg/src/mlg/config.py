"""Graph definition files, built-in fixtures, and sample grids.

A definition file is flat `key = value` text with `#` comments:

    n = 2
    shape = triple-equal              # optional, validated if present
    u1 = x1^3 - 3*x1*x2^2
    u2 = x1^3 - 3*x1*x2^2
    u3 = x1^3 - 3*x1*x2^2
    box = -1:1, -1:1                  # per-axis lo:hi, default [-1,1]^n
    grid = 21                         # points per axis, default 11
    lagrangian_tol = 1e-9
    minimality_tol = 1e-7
    fd_step = 1e-3

Grids are uniform closed lattices including the box corners, enumerated in
row-major order with the first axis slowest.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DefinitionError, ExpressionSyntaxError
from .geometry import (
    SHAPE_GENERAL,
    SHAPE_SPECIAL_LAGRANGIAN,
    SHAPE_TRIPLE_EQUAL,
    PotentialTriple,
)
from .parser import parse

MAX_DIMENSION = 8
DEFAULT_GRID = 11
DEFAULT_LAGRANGIAN_TOL = 1e-9
DEFAULT_MINIMALITY_TOL = 1e-7
DEFAULT_FD_STEP = 1e-3

_SHAPES = (SHAPE_GENERAL, SHAPE_SPECIAL_LAGRANGIAN, SHAPE_TRIPLE_EQUAL)


@dataclass(frozen=True)
class GraphDefinition:
    n: int
    u1: str
    u2: str
    u3: str
    shape: str
    box: tuple  # ((lo, hi), ...) length n
    grid: int
    lagrangian_tol: float = DEFAULT_LAGRANGIAN_TOL
    minimality_tol: float = DEFAULT_MINIMALITY_TOL
    fd_step: float = DEFAULT_FD_STEP
    name: str = "custom"

    def potential_triple(self) -> PotentialTriple:
        return PotentialTriple.from_strings(self.n, self.u1, self.u2, self.u3)


def _parse_box(text: str, n: int, line: int) -> tuple:
    spans = [s.strip() for s in text.split(",")]
    if len(spans) != n:
        raise DefinitionError(
            "box needs %d axis ranges separated by commas, got %d" % (n, len(spans)), line
        )
    box = []
    for s in spans:
        parts = s.split(":")
        if len(parts) != 2:
            raise DefinitionError("axis range must look like lo:hi, got %r" % s, line)
        try:
            lo, hi = float(parts[0]), float(parts[1])
        except ValueError:
            raise DefinitionError("axis range must be numeric, got %r" % s, line) from None
        if not lo < hi:
            raise DefinitionError("axis range needs lo < hi, got %r" % s, line)
        box.append((lo, hi))
    return tuple(box)


def parse_definition(text: str, name: str = "custom") -> GraphDefinition:
    """Parse definition text; errors carry 1-based line numbers."""
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise DefinitionError("expected 'key = value'", lineno)
        key, value = stripped.split("=", 1)
        key = key.strip().lower()
        value = value.strip()
        if key in raw:
            raise DefinitionError("duplicate key %r" % key, lineno)
        raw[key] = (value, lineno)

    def take(key, default=None):
        return raw.pop(key, (default, None))

    n_text, n_line = take("n")
    if n_text is None:
        raise DefinitionError("missing required key 'n'")
    try:
        n = int(n_text)
    except ValueError:
        raise DefinitionError("n must be an integer, got %r" % n_text, n_line) from None
    if not 1 <= n <= MAX_DIMENSION:
        raise DefinitionError("n must be in [1, %d], got %d" % (MAX_DIMENSION, n), n_line)

    exprs = {}
    for key in ("u1", "u2", "u3"):
        text_u, line_u = take(key, "0")
        try:
            parse(text_u, n)
        except ExpressionSyntaxError as exc:
            raise DefinitionError("%s: %s" % (key, exc), line_u) from exc
        exprs[key] = text_u

    box_text, box_line = take("box")
    box = (
        _parse_box(box_text, n, box_line)
        if box_text is not None
        else tuple((-1.0, 1.0) for _ in range(n))
    )

    grid_text, grid_line = take("grid", str(DEFAULT_GRID))
    try:
        grid = int(grid_text)
    except ValueError:
        raise DefinitionError("grid must be an integer, got %r" % grid_text, grid_line) from None
    if grid < 2:
        raise DefinitionError("grid must be >= 2, got %d" % grid, grid_line)

    numeric = {}
    for key, default in (
        ("lagrangian_tol", DEFAULT_LAGRANGIAN_TOL),
        ("minimality_tol", DEFAULT_MINIMALITY_TOL),
        ("fd_step", DEFAULT_FD_STEP),
    ):
        val_text, val_line = take(key, None)
        if val_text is None:
            numeric[key] = default
            continue
        try:
            val = float(val_text)
        except ValueError:
            raise DefinitionError("%s must be numeric, got %r" % (key, val_text), val_line) from None
        if val <= 0:
            raise DefinitionError("%s must be positive" % key, val_line)
        numeric[key] = val

    shape_text, shape_line = take("shape")
    defn = GraphDefinition(
        n=n, shape="", box=box, grid=grid, name=name, **exprs, **numeric
    )
    derived = defn.potential_triple().shape
    if shape_text is not None:
        if shape_text not in _SHAPES:
            raise DefinitionError(
                "shape must be one of %s, got %r" % ("|".join(_SHAPES), shape_text), shape_line
            )
        if shape_text != derived:
            raise DefinitionError(
                "declared shape %r but the potentials have shape %r" % (shape_text, derived),
                shape_line,
            )
    defn = replace(defn, shape=derived)

    if raw:
        key, (_, lineno) = next(iter(raw.items()))
        raise DefinitionError("unknown key %r" % key, lineno)
    return defn


def load_definition(path: str) -> GraphDefinition:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_definition(fh.read(), name=path)


def grid_points(defn: GraphDefinition) -> np.ndarray:
    """Uniform closed lattice over the box, shape (grid^n, n)."""
    axes = [np.linspace(lo, hi, defn.grid) for lo, hi in defn.box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def interior_points(defn: GraphDefinition, margin: int = 2) -> np.ndarray:
    """Sublattice leaving `margin` cells of stencil room per side."""
    if defn.grid <= 2 * margin:
        return np.empty((0, defn.n))
    axes = [
        np.linspace(lo, hi, defn.grid)[margin:-margin] for lo, hi in defn.box
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True)
class GeneralMapFixture:
    """A graph given by three maps R^n -> R^n that need not be gradients.

    Only the first-order Lagrangian residual applies to these; here the
    maps are f1 = grad u, f2 = x, f3 = grad u, whose graph is Lagrangian
    although the second block is not a gradient of any potential over x.
    """

    name: str
    n: int
    u: str
    box: tuple
    grid: int
    lagrangian_tol: float = DEFAULT_LAGRANGIAN_TOL

    def jacobians(self, X: np.ndarray):
        """Jacobians (D1, D2, D3) = (Hess u, I, Hess u) at each row of X."""
        from .jets import jet_eval_batch

        X = np.asarray(X, dtype=np.float64)
        expr = parse(self.u, self.n)
        _, _, hess, _, ok = jet_eval_batch(expr, X, self.n)
        eye = np.broadcast_to(np.eye(self.n), hess.shape)
        return hess, eye, hess, ok

    def grid_points(self) -> np.ndarray:
        axes = [np.linspace(lo, hi, self.grid) for lo, hi in self.box]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


_HARMONIC_CUBIC = "x1^3 - 3*x1*x2^2"

_FIXTURE_TEXTS = {
    "sigma2": """
        # triple-equal harmonic cubic: minimal Lagrangian graph
        n = 2
        shape = triple-equal
        u1 = {u}
        u2 = {u}
        u3 = {u}
        box = -1:1, -1:1
        grid = 21
    """.format(u=_HARMONIC_CUBIC),
    "cubic-sl": """
        # single-potential harmonic cubic: minimal Lagrangian graph
        n = 2
        shape = special-lagrangian
        u1 = {u}
        box = -1:1, -1:1
        grid = 21
    """.format(u=_HARMONIC_CUBIC),
    "quadratic": """
        # commuting quadratics: flat graph, every identity holds exactly
        # and the slopes are small enough for every hypothesis margin
        n = 2
        u1 = 0.1*(x1^2 + x2^2)
        u2 = 0.2*x1*x2
        u3 = 0.08*x1*x2 + 0.06*(x1^2 + x2^2)
        box = -1:1, -1:1
        grid = 11
    """,
}

FIXTURE_NAMES = ("sigma1", "sigma2", "cubic-sl", "quadratic")


def fixture(name: str):
    """Look up a built-in fixture.

    Returns a GraphDefinition, or a GeneralMapFixture for 'sigma1' (its
    second block is x itself, which no potential triple can produce, so it
    only supports the first-order residual check).
    """
    if name == "sigma1":
        return GeneralMapFixture(
            name="sigma1",
            n=2,
            u=_HARMONIC_CUBIC,
            box=((-1.0, 1.0), (-1.0, 1.0)),
            grid=21,
        )
    try:
        text = _FIXTURE_TEXTS[name]
    except KeyError:
        raise DefinitionError(
            "unknown fixture %r (choose from %s)" % (name, ", ".join(FIXTURE_NAMES))
        ) from None
    return parse_definition(text, name=name)
