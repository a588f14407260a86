import pytest

from trisol.constants import compute_report, unit_ball_volume
from trisol.geometry import Ball, Grid, inradius
from trisol.presets import build_problem, benchmark_ball_domain


def ball_constants(radius: float, q: float = 3.0):
    measure = unit_ball_volume(3) * radius**3
    return compute_report(3, measure, radius, q)


@pytest.fixture(scope="session")
def benchmark_spec_radial():
    """Benchmark ball instance on a 256-cell radial grid."""
    grid = Grid.radial(benchmark_ball_domain(), 256)
    return build_problem("singular-ball-example", grid)


@pytest.fixture(scope="session")
def benchmark_constants():
    return ball_constants(inradius(benchmark_ball_domain()))


@pytest.fixture(scope="session")
def capped_spec():
    """Compliant instance on the unit ball (all four hypotheses pass)."""
    grid = Grid.radial(Ball((0.0, 0.0, 0.0), 1.0), 128)
    return build_problem("capped-quadratic", grid)


@pytest.fixture(scope="session")
def capped_constants():
    return ball_constants(1.0)
