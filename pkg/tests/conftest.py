import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from qdopt.problem import Problem, load_bundled
from qdopt.expr import parse

settings.register_profile(
    "qdopt", derandomize=True, deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qdopt")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def bundled():
    return load_bundled


# -- random expressions vanishing at the origin ----------------------------------------

def rand_linear(rng: random.Random, n: int, zero_ok: bool = True) -> str:
    while True:
        cs = [rng.randint(-3, 3) for _ in range(n)]
        if zero_ok or any(cs):
            break
    terms = [f"{c}*x{k + 1}" for k, c in enumerate(cs) if c]
    return " + ".join(terms) if terms else "0"


def rand_dc(rng: random.Random, n: int, depth: int = 3) -> str:
    """Random expression source with value 0 at the origin.

    Smooth atoms take linear arguments without offsets, so every sin, cos
    and activity decision at the origin is exact.
    """
    if depth <= 0 or rng.random() < 0.25:
        kind = rng.randrange(5)
        lin = rand_linear(rng, n)
        if kind == 0:
            return f"sin({lin})"
        if kind == 1:
            return f"(cos({lin}) - 1)"
        if kind == 2:
            return f"pow({lin}, {rng.randint(2, 3)})"
        return lin
    kind = rng.randrange(7)
    a = rand_dc(rng, n, depth - 1)
    b = rand_dc(rng, n, depth - 1)
    if kind == 0:
        return f"abs({a})"
    if kind == 1:
        return f"max({a}, {b})"
    if kind == 2:
        return f"min({a}, {b})"
    if kind == 3:
        return f"({a}) - ({b})"
    if kind == 4:
        return f"{Fraction(rng.randint(-4, 4), rng.randint(1, 3))}*({a})"
    if kind == 5:
        return f"({a})*({b})"
    return f"({a}) + ({b})"


def rand_problem(rng: random.Random, n: int = 2, m: int = 1, l: int = 1, depth: int = 2) -> Problem:
    def f():
        return parse(rand_dc(rng, n, depth))
    return Problem(n, (0,) * n, parse(rand_dc(rng, n, depth)),
                   tuple(f() for _ in range(m)), tuple(f() for _ in range(l)))
