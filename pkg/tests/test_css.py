import json

import numpy as np
import pytest

from hypqec.css import (
    BUNDLE_MAGIC,
    CssCode,
    from_complex,
    is_logical,
    logical_basis,
    random_logical_search,
    rate_bound,
    rate_bound_check,
    read_bundle,
    write_bundle,
)
from hypqec.errors import ParseError, VerificationError
from hypqec.gf2 import BitMatrix, RowSpace, in_row_space, kernel_basis, rank


def test_davis_code(davis):
    code = davis.code
    assert (code.n, code.k) == (144, 72)
    assert code.css_condition()
    assert rate_bound(144) == 24
    assert rate_bound_check(code) is True
    assert code.meta["chi"] == 26 and code.meta["cell_counts"] == [1, 60, 144, 60, 1]


def test_k_two_ways(davis, torus):
    for res in (davis, torus(3)):
        c, code = res.complex, res.code
        i = code.meta["qubit_dim"]
        homology = kernel_basis(c.boundary(i)).rows - (rank(c.boundary(i + 1)) if i < c.dim else 0)
        assert code.k == homology


@pytest.mark.parametrize("L", [2, 3, 4])
def test_toric_code(torus, L):
    code = torus(L).code
    assert (code.n, code.k) == (2 * L * L, 2)
    assert rate_bound_check(code) is None


def test_code6_rate_bound(code6):
    code = code6.code
    assert code.n == 9792
    assert rate_bound(9792) == 1766
    assert rate_bound_check(code)
    # self-dual tessellation: X and Z checks look alike
    assert dict(zip(*np.unique(code.hx.row_weights(), return_counts=True))) == \
        dict(zip(*np.unique(code.hz.row_weights(), return_counts=True)))


def test_qubit_dimension_bounds(davis):
    with pytest.raises(ValueError):
        from_complex(davis.complex, 0)
    with pytest.raises(ValueError):
        from_complex(davis.complex, 4)
    c1 = from_complex(davis.complex, 1)
    assert c1.n == 60


def test_css_violation_is_rejected():
    hx = BitMatrix.from_dense(np.array([[1, 1, 0]], dtype=np.uint8))
    hz = BitMatrix.from_dense(np.array([[0, 1, 1]], dtype=np.uint8))
    with pytest.raises(VerificationError):
        CssCode(hx, hz)
    with pytest.raises(ValueError):
        CssCode(hx, BitMatrix(1, 4))


@pytest.mark.parametrize("side", ["X", "Z"])
def test_logical_basis(davis, torus, side):
    for res in (davis, torus(3)):
        code = res.code
        L = logical_basis(code, side)
        assert L.rows == code.k
        space = RowSpace(code.stabilizers(side))
        for row in L.to_dense():
            assert is_logical(code, row, side, space)


def test_torus_logicals_have_weight_L(torus):
    for L in (3, 4):
        r = random_logical_search(torus(L).code, "Z", iterations=20, seed=1)
        assert r.weight == L
        assert r.upper_bound == L


def test_davis_weight_two_logical(davis):
    code = davis.code
    r = random_logical_search(code, "Z", iterations=50, seed=0, target=2)
    assert r.weight == 2
    assert not in_row_space(code.hz, r.vector)
    assert is_logical(code, r.vector, "Z")
    rx = random_logical_search(code, "X", iterations=50, seed=0, target=2)
    assert rx.weight == 2


def test_search_history_is_monotone(davis):
    for seed in (0, 1, 2):
        r = random_logical_search(davis.code, "Z", iterations=8, seed=seed)
        assert all(a >= b for a, b in zip(r.history, r.history[1:]))
        assert r.iterations == 8


def test_search_is_deterministic(torus):
    code = torus(4).code
    a = random_logical_search(code, "X", iterations=5, seed=7)
    b = random_logical_search(code, "X", iterations=5, seed=7)
    assert a.history == b.history and np.array_equal(a.vector, b.vector)


def test_stabilizer_is_not_logical(davis):
    code = davis.code
    row = code.hz.to_dense()[0]
    assert not is_logical(code, row, "Z")
    assert not is_logical(code, np.zeros(code.n, dtype=np.uint8), "Z")


def test_bundle_roundtrip(davis, tmp_path):
    path = tmp_path / "davis.code"
    write_bundle(davis.code, path)
    lines = path.read_text().splitlines()
    assert lines[0] == BUNDLE_MAGIC
    header = json.loads(lines[1])
    assert header["n"] == 144 and header["k"] == 72 and header["chi"] == 26
    code = read_bundle(path)
    assert code.hx == davis.code.hx and code.hz == davis.code.hz
    assert code.k == 72


def test_bundle_errors(davis, tmp_path):
    path = tmp_path / "davis.code"
    write_bundle(davis.code, path)
    text = path.read_text()
    cases = {
        "nomagic": text.replace(BUNDLE_MAGIC, "HELLO"),
        "badjson": text.replace(text.splitlines()[1], "{oops"),
        "truncated": text[: len(text) // 2],
        "nosection": text.replace("[H_Z]", "[H_Q]"),
    }
    for name, body in cases.items():
        p = tmp_path / name
        p.write_text(body)
        with pytest.raises(ParseError):
            read_bundle(p)
    lines = text.splitlines()
    k = lines.index("[H_X]") + 2
    lines[k] = " ".join(lines[k].split()[1:])
    p = tmp_path / "flipped"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(VerificationError):
        read_bundle(p)
    assert read_bundle(p, verify=False).n == 144
