import numpy as np
import pytest

from lazysdp.errors import InfeasibleInitialization, NotConverged
from lazysdp.initializer import (
    build_modified,
    default_lipschitz,
    extract_solution,
    feasibility_defects,
    residual_bound,
)
from lazysdp.instances import random_instance, scalar_toy, trace_toy
from lazysdp.model import SdpInstance, Solution, validate


@pytest.mark.parametrize("seed", range(5))
def test_start_point_is_feasible(seed):
    inst, R = random_instance(4, 6, seed)
    prob = build_modified(inst, R, delta=1e-3)
    d = feasibility_defects(prob)
    assert d["primal"] <= 1e-10 and d["dual"] <= 1e-10
    assert (prob.modified.n, prob.modified.m) == (6, 7)
    assert np.linalg.eigvalsh(prob.S0).min() > 0
    assert validate(prob.modified).ok


def test_layout_on_scalar_toy():
    inst = scalar_toy(a=2.0, b=3.0, c=1.0)
    prob = build_modified(inst, R=10.0, delta=0.5)
    mod = prob.modified
    # corner entry b/R - tr A
    assert mod.A[0, 2, 2] == pytest.approx(0.3 - 2.0)
    np.testing.assert_allclose(mod.b, [0.3, 2.0])
    np.testing.assert_allclose(np.diag(mod.C), [0.5, 0.0, -1.0])
    np.testing.assert_allclose(prob.S0, np.diag([0.5, 1.0, 1.0]))
    assert (prob.n_orig, prob.m_orig) == (1, 1)


def test_argument_checks():
    inst = trace_toy()
    with pytest.raises(ValueError):
        build_modified(inst, R=0.0)
    with pytest.raises(ValueError):
        build_modified(inst, R=1.0, delta=2.0)
    with pytest.raises(ValueError):
        build_modified(inst, R=1.0, L=0.5)
    # C = I with L = ||C|| and delta = 1 puts I - C delta / L on the boundary
    pos = SdpInstance(np.eye(2), np.eye(2)[None], [1.0])
    with pytest.raises(InfeasibleInitialization):
        build_modified(pos, R=1.0, L=1.0, delta=1.0)


def test_default_lipschitz():
    assert default_lipschitz(trace_toy()) == pytest.approx(1.0)
    zero = SdpInstance(np.zeros((2, 2)), np.eye(2)[None], [1.0])
    assert default_lipschitz(zero) == pytest.approx(1e-12)


def test_extraction_maps_back_and_checks_gap():
    inst = trace_toy()
    prob = build_modified(inst, R=1.0, delta=0.1)
    mod = prob.modified
    X = np.zeros((4, 4))
    X[0, 0] = 0.5
    X[1, 1] = 0.5
    X[2, 2] = 2.0
    y = np.array([0.0, 0.0])
    sol = Solution.evaluate(mod, X, y)
    with pytest.raises(NotConverged):
        extract_solution(sol, inst, 1.0, 0.1)
    sol.duality_gap = 0.0
    out = extract_solution(sol, inst, 1.0, 0.1, L=1.0)
    np.testing.assert_allclose(out.X, np.diag([0.5, 0.5]))
    assert out.primal_residual == pytest.approx(0.0)
    assert out.info["modified_duality_gap"] == 0.0


def test_residual_bound_formula():
    inst = SdpInstance(np.zeros((2, 2)), np.stack([np.diag([1.0, -2.0])]), [3.0])
    assert residual_bound(inst, R=2.0, delta=0.1) == pytest.approx(4 * 2 * 0.1 * (2.0 * 3.0 + 3.0))
