"""Registry of built-in problems for the command line and the test suites."""

import difflib
from dataclasses import dataclass, field

import numpy as np

from .cmc import cmc_graph_problem
from .errors import UnknownProblemError
from .geodesics import closed_geodesic_problem, straight_loop_graph_problem
from .harmonic import harmonic_circle_problem, harmonic_sphere_problem


@dataclass
class CatalogEntry:
    name: str
    summary: str
    build: object  # callable(n=None, scheme="spectral", **params) -> ProblemInstance
    default_n: int
    lambda0: float
    lambda_target: float
    expected: str = "completed"  # completed | obstructed | degenerate
    params: dict = field(default_factory=dict)

    def make(self, n=None, scheme="spectral", **overrides):
        kwargs = dict(self.params)
        kwargs.update(overrides)
        problem = self.build(n=n or self.default_n, scheme=scheme, **kwargs)
        return problem, problem.metadata["x0"]


def _entries():
    return [
        CatalogEntry(
            "cmc_plane_circle",
            "circles in the plane: constant-curvature branch, radius 1/lambda",
            lambda n, scheme: cmc_graph_problem("plane", n=n, scheme=scheme),
            default_n=128, lambda0=1.0, lambda_target=2.0),
        CatalogEntry(
            "cmc_sphere_equator",
            "latitude circles on the round sphere from the equator",
            lambda n, scheme: cmc_graph_problem("sphere", n=n, scheme=scheme),
            default_n=128, lambda0=0.0, lambda_target=0.4),
        CatalogEntry(
            "cmc_flat_torus",
            "winding loop on the flat torus: obstructed branch, multiplier = lambda",
            lambda n, scheme: cmc_graph_problem("flat_torus", n=n, scheme=scheme),
            default_n=128, lambda0=0.0, lambda_target=0.5,
            expected="obstructed"),
        CatalogEntry(
            "geodesic_flat_torus",
            "straight loop on the flat torus as a transverse graph",
            lambda n, scheme: straight_loop_graph_problem(
                "flat_torus", "vertical", n=n, scheme=scheme),
            default_n=64, lambda0=0.0, lambda_target=1.0),
        CatalogEntry(
            "geodesic_channel_torus",
            "closed geodesic of the channel metric diag(1, 1 + t*eps*cos x)",
            lambda n, scheme: closed_geodesic_problem(
                "channel_torus", winding=(0, 1), n=n, scheme=scheme,
                parameter_range=(0.0, 1.0)),
            default_n=64, lambda0=0.2, lambda_target=1.0),
        CatalogEntry(
            "geodesic_lorentz_flat",
            "timelike straight loop on the Lorentzian flat torus (graph form)",
            lambda n, scheme, orientation="vertical": straight_loop_graph_problem(
                "lorentz_flat", orientation, n=n, scheme=scheme),
            default_n=64, lambda0=0.0, lambda_target=1.0),
        CatalogEntry(
            "harmonic_circle_torus",
            "degree-(1,0) circle-valued map over a deforming source metric",
            lambda n, scheme, family="channel_torus": harmonic_circle_problem(
                n=n, family=family, scheme=scheme),
            default_n=16, lambda0=0.0, lambda_target=1.0),
        CatalogEntry(
            "harmonic_sphere_equator",
            "equator map into the 2-sphere: degenerate kernel, refusal pathway",
            lambda n, scheme: harmonic_sphere_problem(n=n, scheme=scheme),
            default_n=16, lambda0=0.0, lambda_target=1.0,
            expected="degenerate"),
    ]


_CATALOG = {e.name: e for e in _entries()}


def list_problems():
    """Catalog of built-in problems (name, summary, parameter window)."""
    return list(_CATALOG.values())


def get_problem(name):
    if name not in _CATALOG:
        suggestion = difflib.get_close_matches(name, _CATALOG, n=1)
        raise UnknownProblemError(name, suggestion[0] if suggestion else None)
    return _CATALOG[name]
