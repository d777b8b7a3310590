import numpy as np
import pytest

from hypqec.algebra import GoldenInt, classify_ideal, sqrt5_ideal
from hypqec.coxeter import (
    GoldenRing,
    SchlafliSymbol,
    gram_from_symbol,
    golden_det,
    local_faithfulness,
    preserves_form,
    presentation_from_symbol,
    reduce_rep,
    reflection_rep,
    rotation_generators,
    verify_relations,
)

SYMBOLS = ["5,3,3,5", "5,3,3,3", "3,5,3", "5,3,5", "3,3,3"]


def test_symbol_parsing():
    s = SchlafliSymbol.parse("{5, 3,3,5}")
    assert s.entries == (5, 3, 3, 5) and s.dim == 4 and s.rank == 5
    assert str(s) == "{5,3,3,5}"
    assert s.reversed() == SchlafliSymbol((5, 3, 3, 5))
    with pytest.raises(ValueError):
        SchlafliSymbol.parse("5,x")
    with pytest.raises(ValueError):
        SchlafliSymbol.parse("5,1")


def test_presentation_5335():
    p = presentation_from_symbol("5,3,3,5")
    assert p.rank == 5
    m = p.exponents
    assert (m[0][1], m[1][2], m[2][3], m[3][4]) == (5, 3, 3, 5)
    for i in range(5):
        for j in range(5):
            if abs(i - j) > 1:
                assert m[i][j] == 2
    assert p.letters == "abcde"
    assert p.parse_word("abe") == [0, 1, 4]
    assert p.format_word([0, 1, 4]) == "abe"


def test_presentation_small_symbols():
    p = presentation_from_symbol("4,4")
    assert p.rank == 3 and p.exponents[0][1] == 4 and p.exponents[1][2] == 4
    p = presentation_from_symbol("4,3,4")
    assert p.rank == 4 and (p.exponents[0][1], p.exponents[1][2], p.exponents[2][3]) == (4, 3, 4)


def test_gram_5335():
    g = gram_from_symbol("5,3,3,5")
    assert [g.entry(i, i) for i in range(5)] == [GoldenInt(2, 0)] * 5
    assert g.off_diagonal() == [GoldenInt(0, -1), GoldenInt(-1, 0), GoldenInt(-1, 0), GoldenInt(0, -1)]
    assert g.entry(0, 2) == GoldenInt()
    # the 5-entries equal -2 cos(pi/5)
    assert float(g.entry(0, 1)) == pytest.approx(-2 * np.cos(np.pi / 5))


def test_gram_33():
    g = gram_from_symbol("3,3")
    assert g.off_diagonal() == [GoldenInt(-1, 0), GoldenInt(-1, 0)]
    assert g.signature() == (0, 0, 3)


def test_gram_signature_is_lorentzian():
    assert gram_from_symbol("5,3,3,5").signature() == (1, 0, 4)


def test_gram_rejects_non_golden_entries():
    with pytest.raises(ValueError):
        gram_from_symbol("4,4")
    with pytest.raises(ValueError):
        gram_from_symbol("5,3,3,5", golden_sign=0)


@pytest.mark.parametrize("symbol", SYMBOLS)
def test_generators_are_reflections(symbol):
    rep = reflection_rep(gram_from_symbol(symbol))
    for M in rep.generators:
        assert rep.is_identity(GoldenRing.matmul(M, M))
        assert golden_det(M) == GoldenInt(-1, 0)
    assert all(verify_relations(rep, presentation_from_symbol(symbol)).values())
    assert preserves_form(rep)


def test_pentagon_relation_exactly():
    rep = reflection_rep(gram_from_symbol("5,3,3,5"))
    ab = GoldenRing.matmul(rep.generators[0], rep.generators[1])
    P = GoldenRing.identity(5)
    for k in range(1, 6):
        P = GoldenRing.matmul(P, ab)
        assert rep.is_identity(P) == (k == 5)
    ac = GoldenRing.matmul(rep.generators[0], rep.generators[2])
    assert rep.is_identity(GoldenRing.matmul(ac, ac))


def test_all_fifteen_relations():
    rep = reflection_rep(gram_from_symbol("5,3,3,5"))
    rel = verify_relations(rep, presentation_from_symbol("5,3,3,5"))
    assert len(rel) == 15 and all(rel.values())


def test_positive_golden_sign_also_satisfies_relations():
    rep = reflection_rep(gram_from_symbol("5,3,3,5", golden_sign=1))
    assert all(verify_relations(rep, presentation_from_symbol("5,3,3,5")).values())


def test_perturbed_gram_breaks_a_relation():
    g = gram_from_symbol("5,3,3,5")
    g.a[1, 2] = g.a[2, 1] = -2
    rep = reflection_rep(g)
    rel = verify_relations(rep, presentation_from_symbol("5,3,3,5"))
    assert not all(rel.values())
    assert rel[(1, 1)]  # still reflections


@pytest.mark.parametrize("ideal", [classify_ideal(2), sqrt5_ideal(), classify_ideal(11), classify_ideal(3)],
                         ids=lambda i: i.label())
def test_reduction_keeps_relations_and_form(ideal):
    rep = reflection_rep(gram_from_symbol("5,3,3,5"))
    red = reduce_rep(rep, ideal)
    assert all(verify_relations(red, presentation_from_symbol("5,3,3,5")).values())
    assert preserves_form(red)
    for M in red.generators:
        assert M.shape == (5, 5)
        assert M.min() >= 0 and M.max() < ideal.q
    with pytest.raises(ValueError):
        reduce_rep(red, ideal)


def test_reduction_mod_sqrt5_maps_phi_to_3():
    rep = reflection_rep(gram_from_symbol("5,3,3,5"))
    red = reduce_rep(rep, sqrt5_ideal())
    assert red.ring.field.q == 5
    # rho(a_0)[0, 1] = -g_01 = phi, which maps to 3
    assert red.generators[0][0, 1] == 3
    assert red.reduced_gram[0, 1] == (-3) % 5


def test_identity_reduces_to_identity():
    rep = reflection_rep(gram_from_symbol("5,3,3,5"))
    red = reduce_rep(rep, classify_ideal(2))
    I = rep.word_matrix([])
    assert red.is_identity(red.word_matrix([]))
    assert rep.is_identity(I)


def test_local_faithfulness_sqrt5():
    rep = reflection_rep(gram_from_symbol("5,3,3,5"))
    red = reduce_rep(rep, sqrt5_ideal())
    assert local_faithfulness(rep, red, 4)
    assert local_faithfulness(rep, red, 0)


def test_local_faithfulness_negative_control():
    # the hyperbolic triangle group {5,5} is infinite, so its image over F_5
    # must identify two distinct elements; the first coincidence is at length 12
    rep = reflection_rep(gram_from_symbol("5,5"))
    red = reduce_rep(rep, sqrt5_ideal())
    assert local_faithfulness(rep, red, 11)
    assert not local_faithfulness(rep, red, 12)
    with pytest.raises(ValueError):
        local_faithfulness(rep, red, -1)


def test_minus_identity_collapses_in_characteristic_two():
    # the longest element of H_3 is -I (length 15), which is I mod 2
    rep = reflection_rep(gram_from_symbol("5,3"))
    red = reduce_rep(rep, classify_ideal(2))
    assert local_faithfulness(rep, red, 14)
    assert not local_faithfulness(rep, red, 15)


def test_rotation_generators():
    rep = reflection_rep(gram_from_symbol("5,3,3,5"))
    rots = rotation_generators(rep)
    assert len(rots) == 10
    m = presentation_from_symbol("5,3,3,5").exponents
    pairs = [(i, j) for i in range(5) for j in range(i + 1, 5)]
    for (i, j), R in zip(pairs, rots):
        P = GoldenRing.identity(5)
        for k in range(1, m[i][j] + 1):
            P = GoldenRing.matmul(P, R)
            assert rep.is_identity(P) == (k == m[i][j])


def test_overflow_is_loud():
    big = GoldenRing.identity(5) * (1 << 40)
    with pytest.raises(OverflowError):
        GoldenRing.matmul(big, big)
