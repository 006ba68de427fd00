"""Definition-file parsing, sample grids, and the fixture registry."""

from __future__ import annotations

import numpy as np
import pytest

from mlg.config import (
    DEFAULT_FD_STEP,
    DEFAULT_GRID,
    DEFAULT_LAGRANGIAN_TOL,
    DEFAULT_MINIMALITY_TOL,
    FIXTURE_NAMES,
    GeneralMapFixture,
    GraphDefinition,
    fixture,
    grid_points,
    interior_points,
    load_definition,
    parse_definition,
)
from mlg.errors import DefinitionError

FULL = """
# a complete definition
n = 2
shape = triple-equal
u1 = x1^3 - 3*x1*x2^2
u2 = x1^3 - 3*x1*x2^2   # trailing comment
u3 = x1^3 - 3*x1*x2^2
box = -2:2, -1:1.5
grid = 7
lagrangian_tol = 1e-8
minimality_tol = 1e-6
fd_step = 5e-4
"""


def test_full_definition_round_trip():
    d = parse_definition(FULL, name="demo")
    assert d.n == 2 and d.name == "demo"
    assert d.shape == "triple-equal"
    assert d.u1 == d.u2 == d.u3 == "x1^3 - 3*x1*x2^2"
    assert d.box == ((-2.0, 2.0), (-1.0, 1.5))
    assert d.grid == 7
    assert d.lagrangian_tol == 1e-8
    assert d.minimality_tol == 1e-6
    assert d.fd_step == 5e-4
    assert d.potential_triple().n == 2


def test_defaults_fill_in():
    d = parse_definition("n = 3\nu1 = x1*x2*x3\n")
    assert d.u2 == "0" and d.u3 == "0"
    assert d.shape == "special-lagrangian"
    assert d.box == ((-1.0, 1.0),) * 3
    assert d.grid == DEFAULT_GRID
    assert d.lagrangian_tol == DEFAULT_LAGRANGIAN_TOL
    assert d.minimality_tol == DEFAULT_MINIMALITY_TOL
    assert d.fd_step == DEFAULT_FD_STEP


def test_shape_is_derived_when_absent():
    d = parse_definition("n = 1\nu1 = x1^2\nu2 = x1^3\n")
    assert d.shape == "general-triple"


def _err(text):
    with pytest.raises(DefinitionError) as exc:
        parse_definition(text)
    return str(exc.value)


def test_errors_carry_line_numbers():
    assert "line 1" in _err("nonsense without equals\n")
    assert "missing required key 'n'" in _err("u1 = x1^2\n".replace("u1", "# u1"))
    msg = _err("n = two\n")
    assert "line 1" in msg and "integer" in msg
    msg = _err("n = 9\n")
    assert "line 1" in msg and "[1, 8]" in msg
    msg = _err("n = 0\n")
    assert "[1, 8]" in msg
    msg = _err("n = 2\nu1 = x1 +\n")
    assert "line 2" in msg and "u1:" in msg
    msg = _err("n = 2\nu1 = x3\n")
    assert "line 2" in msg
    msg = _err("n = 2\nbox = -1:1\n")
    assert "line 2" in msg and "2 axis ranges" in msg
    msg = _err("n = 2\nbox = -1:1, 1:-1\n")
    assert "lo < hi" in msg
    msg = _err("n = 2\nbox = -1:1, 1;2\n")
    assert "lo:hi" in msg
    msg = _err("n = 2\nbox = -1:1, a:b\n")
    assert "numeric" in msg
    msg = _err("n = 2\ngrid = 1\n")
    assert "grid must be >= 2" in msg
    msg = _err("n = 2\ngrid = few\n")
    assert "integer" in msg
    msg = _err("n = 2\nlagrangian_tol = -1e-9\n")
    assert "positive" in msg
    msg = _err("n = 2\nu1 = x1\nu1 = x2\n")
    assert "line 3" in msg and "duplicate" in msg
    msg = _err("n = 2\ncolor = blue\n")
    assert "line 2" in msg and "unknown key 'color'" in msg
    msg = _err("n = 2\nshape = round\n")
    assert "shape must be one of" in msg
    msg = _err("n = 2\nshape = triple-equal\nu1 = x1^2\n")
    assert "declared shape" in msg and "special-lagrangian" in msg


def test_case_insensitive_keys_and_blank_lines():
    d = parse_definition("\n\nN = 2\n\nU1 = x1^2\n")
    assert d.n == 2 and d.u1 == "x1^2"


def test_load_definition(tmp_path):
    p = tmp_path / "g.def"
    p.write_text("n = 1\nu1 = x1^4\n", encoding="utf-8")
    d = load_definition(str(p))
    assert d.n == 1 and d.name == str(p)
    with pytest.raises(OSError):
        load_definition(str(tmp_path / "missing.def"))


def test_grid_points_layout():
    d = parse_definition("n = 2\nu1 = 0\nbox = 0:1, 10:20\ngrid = 3\n")
    X = grid_points(d)
    assert X.shape == (9, 2)
    # row-major with the first axis slowest
    np.testing.assert_allclose(X[0], [0.0, 10.0])
    np.testing.assert_allclose(X[1], [0.0, 15.0])
    np.testing.assert_allclose(X[2], [0.0, 20.0])
    np.testing.assert_allclose(X[3], [0.5, 10.0])
    np.testing.assert_allclose(X[-1], [1.0, 20.0])


def test_interior_points_margin():
    d = parse_definition("n = 2\nu1 = 0\nbox = -1:1, -1:1\ngrid = 5\n")
    inner = interior_points(d, margin=2)
    assert inner.shape == (1, 2)
    np.testing.assert_allclose(inner[0], [0.0, 0.0])
    tiny = parse_definition("n = 2\nu1 = 0\ngrid = 4\n")
    assert interior_points(tiny, margin=2).shape == (0, 2)
    # margin 1 keeps a 2x2 core of a 4-grid
    assert interior_points(tiny, margin=1).shape == (4, 2)


def test_fixture_registry():
    assert FIXTURE_NAMES == ("sigma1", "sigma2", "cubic-sl", "quadratic")
    s2 = fixture("sigma2")
    assert isinstance(s2, GraphDefinition)
    assert s2.shape == "triple-equal" and s2.grid == 21
    sl = fixture("cubic-sl")
    assert sl.shape == "special-lagrangian"
    assert sl.u1 == s2.u1  # same harmonic cubic
    q = fixture("quadratic")
    assert q.shape == "general-triple" and q.grid == 11
    s1 = fixture("sigma1")
    assert isinstance(s1, GeneralMapFixture)
    assert s1.n == 2 and s1.grid == 21
    with pytest.raises(DefinitionError) as exc:
        fixture("sigma3")
    assert "unknown fixture" in str(exc.value)


def test_sigma1_jacobians():
    s1 = fixture("sigma1")
    X = np.array([[1.0, 0.0], [0.0, 0.0]])
    d1, d2, d3, ok = s1.jacobians(X)
    assert ok.all()
    np.testing.assert_allclose(d1[0], [[6.0, 0.0], [0.0, -6.0]], atol=1e-12)
    np.testing.assert_allclose(d2[0], np.eye(2))
    np.testing.assert_allclose(d1, d3)
    assert s1.grid_points().shape == (441, 2)
