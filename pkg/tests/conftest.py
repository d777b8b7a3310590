"""Shared fixtures.  Expensive constructions are built once per session and
remember how long the first build took."""

import time

import numpy as np
import pytest

from hypqec.construct import build
from hypqec.coxeter import presentation_from_symbol

DAVIS_WORD = "ababacbdedcbabacedcbaedced"
WORD_9 = "baedcbedcbabacbdcedcbabcedcbabacbded"
WORD_8 = "bedcbabedcbabedcbabedcbabedcbabedcba"

_BUILDS = {}
ACCEPTANCE = {}


def get_build(descriptor, **kw):
    """BuildResult for a descriptor, with ``seconds`` set on the first build."""
    key = (descriptor, tuple(sorted(kw.items())))
    if key not in _BUILDS:
        t0 = time.perf_counter()
        res = build(descriptor, **kw)
        res.seconds = time.perf_counter() - t0
        _BUILDS[key] = res
    return _BUILDS[key]


def all_builds():
    return list(_BUILDS.values())


def torus_descriptor(L):
    return f"4,4/word({'abcb' * L})"


def random_tree_tanner(rng, max_qubits=20):
    """Parity-check matrix whose Tanner graph is a random tree.

    Starting from one qubit, each step hangs a new check off a random existing
    qubit together with one to three fresh qubits, so every check has degree at
    least two and no qubit value is forced by the syndrome.
    """
    target = int(rng.integers(2, max_qubits + 1))
    n, rows = 1, []
    while n < target:
        new = min(int(rng.integers(1, 4)), target - n)
        rows.append([int(rng.integers(n))] + list(range(n, n + new)))
        n += new
    H = np.zeros((len(rows), n), dtype=np.uint8)
    for c, qs in enumerate(rows):
        H[c, qs] = 1
    return H


def record(number, ok, detail, out=None):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    if out is not None:
        with out.disabled():
            print("\n" + line)
    return line


@pytest.fixture(scope="session")
def pres5335():
    return presentation_from_symbol("5,3,3,5")


@pytest.fixture(scope="session")
def davis():
    return get_build(f"5,3,3,5/word({DAVIS_WORD})")


@pytest.fixture(scope="session")
def code6():
    return get_build("5,3,3,5/ideal(2)")


@pytest.fixture(scope="session")
def torus():
    return lambda L: get_build(torus_descriptor(L))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(str(k).rstrip("abc")), str(k))):
        terminalreporter.write_line(ACCEPTANCE[key])
