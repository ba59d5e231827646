import math

import numpy as np
import pytest
import sympy as sp

from lhm_sim.validation import fig2_params, fig3_params


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fig2():
    return fig2_params


@pytest.fixture
def fig3():
    return fig3_params


def symbolic_rhs():
    """Lindblad RHS derived with sympy from H and the three collapse operators.

    Returns (function(rho, params) -> 4x4 complex array, element expressions).
    """
    w1, w2, w3, phi, d1, d2, d4, g1, g2, g4 = sp.symbols(
        "w1 w2 w3 phi d1 d2 d4 g1 g2 g4", real=True
    )
    r = sp.Matrix(4, 4, lambda i, j: sp.Symbol(f"r{i + 1}{j + 1}"))
    h = sp.Matrix(
        [
            [d1 + d2, -w1, 0, -w3 * sp.exp(sp.I * phi)],
            [-w1, d2, -w2, 0],
            [0, -w2, 0, 0],
            [-w3 * sp.exp(-sp.I * phi), 0, 0, d4 + d2],
        ]
    )
    dot = -sp.I * (h * r - r * h)
    for rate, lower, upper in ((2 * g1, 1, 0), (2 * g4, 1, 3), (2 * g2, 2, 1)):
        c = sp.zeros(4, 4)
        c[lower, upper] = 1
        cd = c.T
        dot += rate * (c * r * cd - sp.Rational(1, 2) * (cd * c * r + r * cd * c))
    dot = dot.applyfunc(sp.expand)
    args = (w1, w2, w3, phi, d1, d2, d4, g1, g2, g4, *r)
    f = sp.lambdify(args, dot, "numpy")

    def evaluate(rho, p):
        values = (p.omega1, p.omega2, p.omega3, p.phi3, p.delta1, p.delta2, p.delta4,
                  p.gamma1, p.gamma2, p.gamma4, *np.asarray(rho).reshape(-1))
        return np.array(f(*values), dtype=complex)

    return evaluate, dot


@pytest.fixture(scope="session")
def symbolic():
    return symbolic_rhs()[0]


TWO_PI = 2 * math.pi


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
