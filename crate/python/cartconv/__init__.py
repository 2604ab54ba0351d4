"""Python surface over the exact Cartesian convexity toolkit.

Coordinates, weights, and levels are rational strings ("1/2", "-0.25", "3")
so nothing is lost at the boundary; envelope values, functional values, and
sweep minima come back as floats.
"""

import json

from ._cartconv import (
    Hull,
    MaximalSquares,
    Scene,
    SimpleFunction,
    Supremand,
    eval_ip,
    eval_j,
    eval_j_rlx,
    eval_j_rlx_minformula,
    gamma_sweep,
    run_selftest,
)

__all__ = [
    "Hull",
    "MaximalSquares",
    "Scene",
    "SimpleFunction",
    "Supremand",
    "eval_ip",
    "eval_j",
    "eval_j_rlx",
    "eval_j_rlx_minformula",
    "fixture",
    "gamma_sweep",
    "make_scene",
    "run_selftest",
]


def fixture(name):
    """Named scene: G1, G2, G3, G2L, G2M, or G2R."""
    return Scene.fixture(name)


def make_scene(dim, atoms, norm="linf", growth_exponent=1):
    """Scene from atom dicts, e.g.

    make_scene(2, [{"kind": "polytope", "vertices": [["0", "0"], ["1", "1/2"]]},
                   {"kind": "points", "points": [["1", "0"]]}])
    """
    spec = {
        "dim": dim,
        "atoms": atoms,
        "norm": norm,
        "growth_exponent": growth_exponent,
    }
    return Scene.from_json(json.dumps(spec))
