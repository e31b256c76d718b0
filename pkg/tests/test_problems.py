import math

import numpy as np
import pytest
import sympy as sp

from comirror.problems import (
    PROBLEM_NAMES,
    SIM12_DIMENSION,
    bracketed_root,
    load_problem,
    sim12_stand_in,
    tp2_optimum,
    tp3_optimum,
)
from comirror.solver import SolverConfig, history_csv, run

X1, X2 = sp.symbols("x1 x2")

# independent symbolic definitions of the three benchmark problems
SYMBOLIC = {
    "tp1": {
        "objective": [-X1 - 2 * X2],
        "constraint": [-X1, X1 - 1, X2],
    },
    "tp2": {
        "objective": [6 * X1**2 + X2**2 - 60 * X1 - 8 * X2 + 166],
        "constraint": [-X1, X1 - 10, -X2, X2 - 10,
                       X1 * X2 - X1 - X2, 3 - X1 - X2],
    },
    "tp3": {
        "objective": [7 * X1**2 + 3 * X2**2 - 84 * X1 - 34 * X2 + 300],
        "constraint": [-X1, X1 - 10, -X2, X2 - 10,
                       1 - X1 * X2, X1**2 + X2**2 - 9],
    },
}


class TestProblemValues:
    def test_known_points(self):
        tp1 = load_problem("tp1").spec
        assert tp1.objective.value(np.array([1.0, 0.0])) == -1.0
        assert tp1.known_optimum == -1.0
        tp2 = load_problem("tp2").spec
        assert tp2.objective.value(np.array([0.0, 0.0])) == 166.0
        tp3 = load_problem("tp3").spec
        opt = np.array([2.6390, 1.4267])
        assert abs(tp3.constraint.value(opt)) <= 1e-3
        assert 1 - opt[0] * opt[1] < 0

    @pytest.mark.parametrize("name", ["tp1", "tp2", "tp3"])
    def test_values_match_independent_symbolic_oracle(self, name):
        named = load_problem(name)
        spec = named.spec
        sym = SYMBOLIC[name]
        objective = [sp.lambdify((X1, X2), e, "math") for e in sym["objective"]]
        constraint = [sp.lambdify((X1, X2), e, "math") for e in sym["constraint"]]
        rng = np.random.default_rng(101)
        for x in rng.uniform(spec.box.lower, spec.box.upper, size=(100, 2)):
            want_f = max(f(*x) for f in objective)
            want_g = max(g(*x) for g in constraint)
            scale_f = 1 + abs(want_f)
            scale_g = 1 + abs(want_g)
            assert abs(spec.objective.value(x) - want_f) <= 1e-12 * scale_f
            assert abs(spec.constraint.value(x) - want_g) <= 1e-12 * scale_g

    @pytest.mark.parametrize("name", ["tp1", "tp2", "tp3"])
    def test_gradient_and_hessian_bounds_hold_empirically(self, name):
        spec = load_problem(name).spec
        consts = spec.constants
        rng = np.random.default_rng(55)
        h = 1e-6
        eye = np.eye(2)
        for rep, l_bound, k_bound in ((spec.objective, consts.l_f, consts.k_f),
                                      (spec.constraint, consts.l_g, consts.k_g)):
            for piece in rep.pieces:
                f = piece.value_oracle
                for x in rng.uniform(spec.box.lower + 0.01,
                                     spec.box.upper - 0.01, size=(40, 2)):
                    grad = np.array([
                        (f(x + h * eye[i]) - f(x - h * eye[i])) / (2 * h)
                        for i in range(2)
                    ])
                    assert np.linalg.norm(grad) <= l_bound + 1e-6
                    second = np.array([
                        (f(x + h * eye[i]) - 2 * f(x) + f(x - h * eye[i])) / h**2
                        for i in range(2)
                    ])
                    assert np.max(np.abs(second)) <= k_bound + 1e-4

    def test_reference_values_present(self):
        for name in ("tp1", "tp2", "tp3"):
            refs = load_problem(name).reference_values
            assert set(refs) == {"euclidean", "entropy"}

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown problem"):
            load_problem("tp9")

    def test_names_registry(self):
        for name in PROBLEM_NAMES:
            assert load_problem(name).name == name


class TestTp3Optimum:
    def test_published_approximations(self):
        opt = tp3_optimum()
        assert opt.f == pytest.approx(84.6710, abs=5e-4)
        np.testing.assert_allclose(opt.x, [2.6390, 1.4267], atol=1e-3)
        assert opt.lam == pytest.approx(-8.9150, abs=1e-3)
        assert opt.kkt_residual <= 1e-6
        assert opt.root_residual <= 1e-8

    def test_point_is_feasible_for_tp3(self):
        spec = load_problem("tp3").spec
        opt = tp3_optimum()
        assert spec.constraint.value(opt.x) <= 1e-9
        assert spec.objective.value(opt.x) == pytest.approx(opt.f, rel=1e-12)

    def test_grid_search_over_active_circle_confirms_minimum(self):
        # independent check: parametrize the circle x1^2 + x2^2 = 9 and
        # minimize f over the feasible arc
        spec = load_problem("tp3").spec
        opt = tp3_optimum()
        thetas = np.linspace(0.0, np.pi / 2, 200001)
        pts = 3.0 * np.column_stack([np.cos(thetas), np.sin(thetas)])
        feasible = pts[:, 0] * pts[:, 1] >= 1.0
        vals = (7 * pts[:, 0] ** 2 + 3 * pts[:, 1] ** 2
                - 84 * pts[:, 0] - 34 * pts[:, 1] + 300)
        best = np.min(vals[feasible])
        assert best == pytest.approx(opt.f, abs=1e-3)
        winner = pts[feasible][np.argmin(vals[feasible])]
        np.testing.assert_allclose(winner, opt.x, atol=1e-3)


class TestTp2Optimum:
    def test_kkt_certificate(self):
        opt = tp2_optimum()
        assert opt.kkt_residual <= 1e-9
        assert opt.mu > 0  # active inequality with a proper multiplier
        x1, x2 = opt.x
        assert x1 * x2 - x1 - x2 == pytest.approx(0.0, abs=1e-12)

    def test_grid_search_along_constraint_curve(self):
        opt = tp2_optimum()
        x1 = np.linspace(1.5, 9.9, 2000001)
        x2 = x1 / (x1 - 1.0)
        mask = (x2 >= 0) & (x2 <= 10) & (x1 + x2 >= 3)
        vals = 6 * x1**2 + x2**2 - 60 * x1 - 8 * x2 + 166
        assert np.min(vals[mask]) == pytest.approx(opt.f, abs=1e-9)

    def test_known_optimum_attached_to_problem(self):
        spec = load_problem("tp2").spec
        assert spec.known_optimum == pytest.approx(tp2_optimum().f, rel=1e-15)


class TestBracketedRoot:
    def test_simple_quadratic(self):
        root = bracketed_root((1.0, 0.0, -2.0), 0.0, 2.0)
        assert root == pytest.approx(math.sqrt(2), rel=1e-12)

    def test_bracketing_failure(self):
        with pytest.raises(ValueError, match="root bracketing failure"):
            bracketed_root((1.0, 0.0, 2.0), 0.0, 1.0)


class TestSim12:
    def test_shape_and_feasibility(self):
        named = sim12_stand_in()
        spec = named.spec
        assert spec.dimension == SIM12_DIMENSION == 12
        assert spec.constraint.value(spec.start) <= 0.0
        edge = sim12_stand_in("edge").spec
        assert edge.constraint.value(edge.start) <= 0.0
        assert spec.box.contains(edge.start)
        with pytest.raises(ValueError):
            sim12_stand_in("corner")

    def test_loadable_by_name(self):
        named = load_problem("sim12")
        assert named.spec.dimension == 12
        assert named.reference_values is None

    def test_deterministic_best_at_3000_evals(self):
        config = SolverConfig(f_eval_budget=3000, max_iterations=5000)
        a = run(sim12_stand_in().spec, config)
        b = run(sim12_stand_in().spec, config)
        assert a.best is not None
        assert a.best.f == b.best.f
        assert history_csv(a, 12) == history_csv(b, 12)

    def test_constants_spot_check(self):
        spec = sim12_stand_in().spec
        rng = np.random.default_rng(77)
        h = 1e-6
        f = spec.objective.pieces[0].value_oracle
        l_f = spec.constants.l_f
        for x in rng.uniform(spec.box.lower + 0.01, spec.box.upper - 0.01,
                             size=(10, 12)):
            grad = np.array([
                (f(x + h * e) - f(x - h * e)) / (2 * h) for e in np.eye(12)
            ])
            assert np.linalg.norm(grad) <= l_f + 1e-5
