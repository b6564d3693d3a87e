import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risaoi.conic import (
    ConicProblem,
    SocBlock,
    ball_oracle,
    ball_projection,
    check_solution,
    eliminate_fixed,
    lp_vertex_oracle,
    solve,
)
from risaoi.sca import initial_beamformers
from risaoi.sca.problems import build_p6

from conftest import make_problem


def random_lp(seed, n=None, m=None):
    g = np.random.default_rng(seed)
    n = int(g.integers(2, 7)) if n is None else n
    m = int(g.integers(1, 5)) if m is None else m
    A = np.vstack([g.normal(size=(m, n)), np.eye(n), -np.eye(n)])
    b = np.concatenate([g.uniform(0.2, 2.0, m), g.uniform(0.5, 3.0, 2 * n)])
    return g.normal(size=n), A, b


def unit_ball():
    return ConicProblem(objective=[1.0], soc=[SocBlock(A=[[1.0]], b=[0.0], c=[0.0], d=1.0)])


class TestExamples:
    @pytest.mark.parametrize("method", ["ipm", "admm"])
    def test_unit_ball(self, method):
        s = solve(unit_ball(), method=method)
        assert s.optimal
        assert s.x[0] == pytest.approx(1.0, abs=1e-5)
        assert s.objective == pytest.approx(1.0, abs=1e-5)

    @pytest.mark.parametrize("method", ["ipm", "admm"])
    def test_lp_vertex(self, method):
        p = ConicProblem(objective=[1, 1], rows=[[1, 1]], row_hi=[1.5], lb=[0, 0], ub=[1, 1])
        assert solve(p, method=method).objective == pytest.approx(1.5, abs=1e-5)

    def test_ball_closed_form(self):
        g = np.random.default_rng(0)
        for _ in range(10):
            c, r = g.normal(size=3), float(g.uniform(0.5, 2.0))
            p = ConicProblem(objective=c, soc=[SocBlock(A=np.eye(3), b=np.zeros(3), c=np.zeros(3), d=r)])
            s = solve(p)
            np.testing.assert_allclose(s.x, r * c / np.linalg.norm(c), atol=1e-5)

    def test_small_lps_match_vertex_enumeration(self):
        for seed in range(30):
            c, A, b = random_lp(seed)
            ref, _ = lp_vertex_oracle(c, A, b)
            s = solve(ConicProblem(objective=c, rows=A, row_hi=b), tol_feas=1e-8, tol_gap=1e-8)
            assert s.optimal
            assert abs(s.objective - ref) <= 1e-6 * max(1.0, abs(ref))


class TestStatus:
    def test_infeasible(self):
        p = ConicProblem(objective=[1.0], rows=[[1.0], [1.0]], row_lo=[2, -np.inf], row_hi=[np.inf, 1])
        assert solve(p).status == "infeasible"

    def test_unbounded(self):
        assert solve(ConicProblem(objective=[1.0], lb=[0.0])).status == "unbounded"

    def test_all_fixed(self):
        p = ConicProblem(objective=[2.0, 1.0], lb=[1.0, 0.5], ub=[1.0, 0.5])
        s = solve(p)
        assert s.optimal and s.objective == pytest.approx(2.5)

    def test_fixed_variables_eliminated(self):
        p = ConicProblem(
            objective=[1.0, 1.0, 1.0],
            rows=[[1, 1, 1]],
            row_hi=[2.0],
            lb=[0.5, 0, 0],
            ub=[0.5, 1, 1],
            soc=[SocBlock(A=np.eye(3), b=np.zeros(3), c=np.zeros(3), d=1.5)],
        )
        reduced, free, x_fixed = eliminate_fixed(p)
        np.testing.assert_array_equal(free, [1, 2])
        assert reduced.n == 2 and x_fixed[0] == 0.5
        s = solve(p)
        ref = 0.5 + min(1.5, 2 * np.sqrt((1.5**2 - 0.25) / 2))
        assert s.objective == pytest.approx(ref, abs=1e-5)


class TestCheckSolution:
    def test_optimal_point_clean(self):
        p = unit_ball()
        assert check_solution(p, solve(p)).max_violation <= 1e-6

    def test_perturbed_point(self):
        p = ConicProblem(
            objective=[1, 1],
            rows=[[1, 1]],
            row_hi=[1.5],
            lb=[0, 0],
            ub=[1, 1],
            row_names=["budget"],
        )
        x = solve(p).x + np.array([0.1, 0.0])
        bad = check_solution(p, x).violated(1e-6)
        assert "budget" in bad

    def test_p6_power_row(self):
        prob = make_problem(seed=3)
        rho = np.exp(1j * np.linspace(0, 3, prob.n_s))
        W, V = initial_beamformers(prob, rho)
        p = build_p6(prob, rho, W, V)
        s = solve(p, tol_feas=1e-7, tol_gap=1e-7)
        assert s.optimal
        assert check_solution(p, s).violations["power"] <= 1e-6

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            check_solution(unit_ball(), [1.0, 2.0])


class TestProperties:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31), st.floats(0.01, 100.0))
    def test_scaling_invariance(self, seed, scale):
        c, A, b = random_lp(seed, n=3, m=2)
        g = np.random.default_rng(seed)
        # strictly convex feasible set makes the argmax unique
        ctr = g.normal(size=3) * 0.1
        blk = SocBlock(A=np.eye(3), b=-ctr, c=np.zeros(3), d=1.0)
        x1 = solve(ConicProblem(objective=c, soc=[blk]), tol_feas=1e-8, tol_gap=1e-8).x
        x2 = solve(ConicProblem(objective=scale * c, soc=[blk]), tol_feas=1e-8, tol_gap=1e-8).x
        assert np.max(np.abs(x1 - x2)) <= 1e-4

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31))
    def test_ball_projection(self, seed):
        g = np.random.default_rng(seed)
        n = int(g.integers(1, 5))
        y, ctr, r = 2 * g.normal(size=n), g.normal(size=n), float(g.uniform(0.2, 2.0))
        # minimize ||x - y|| over the ball: variables (x, t), maximize -t
        A = np.hstack([np.eye(n), np.zeros((n, 1))])
        e = np.zeros(n + 1)
        e[-1] = 1.0
        p = ConicProblem(
            objective=-e,
            soc=[SocBlock(A=A, b=-y, c=e, d=0.0), SocBlock(A=A, b=-ctr, c=np.zeros(n + 1), d=r)],
        )
        s = solve(p, tol_feas=1e-8, tol_gap=1e-8)
        ref = ball_projection(y, ctr, r)
        assert -s.objective == pytest.approx(np.linalg.norm(ref - y), abs=1e-5)
        np.testing.assert_allclose(s.x[:n], ref, atol=1e-3)

    def test_ball_oracle_agrees(self):
        g = np.random.default_rng(1)
        for _ in range(10):
            n = int(g.integers(1, 6))
            c, ctr, r = g.normal(size=n), g.normal(size=n), float(g.uniform(0.1, 3))
            ref, xr = ball_oracle(c, ctr, r)
            s = solve(ConicProblem(objective=c, soc=[SocBlock(A=np.eye(n), b=-ctr, c=np.zeros(n), d=r)]))
            assert abs(s.objective - ref) <= 1e-6 * max(1, abs(ref))

    def test_admm_matches_ipm(self):
        for seed in range(5):
            c, A, b = random_lp(seed, n=3, m=2)
            p = ConicProblem(objective=c, rows=A, row_hi=b)
            a, i = solve(p, method="admm"), solve(p, method="ipm")
            assert abs(a.objective - i.objective) <= 1e-3 * max(1.0, abs(i.objective))

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            solve(unit_ball(), method="simplex")


def mixed_problem(seed):
    """Random bounded problem with box, SOC and (optionally) equality rows."""
    g = np.random.default_rng(seed)
    n = int(g.integers(2, 6))
    soc = [SocBlock(A=g.normal(size=(k, n)), b=g.normal(size=k), c=np.zeros(n), d=float(g.uniform(2, 4)))
           for k in g.integers(1, 4, size=int(g.integers(1, 3)))]
    # the SOC rows do not bound x on their own; the box does
    rows, lo, hi = g.normal(size=(1, n)), None, None
    if g.uniform() < 0.5:
        lo = hi = np.zeros(1)
    else:
        hi = np.ones(1)
    return ConicProblem(objective=g.normal(size=n), rows=rows, row_lo=lo, row_hi=hi,
                        lb=-np.full(n, 5.0), ub=np.full(n, 5.0), soc=soc)


class TestCompiledKernel:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_matches_reference_iteration(self, seed):
        from risaoi.conic.ipm import solve_hsde, solve_hsde_reference
        from risaoi.conic.problem import to_standard_form

        sf = to_standard_form(mixed_problem(seed))
        a = solve_hsde_reference(sf, tol_feas=1e-8, tol_gap=1e-8)
        b = solve_hsde(sf, tol_feas=1e-8, tol_gap=1e-8)
        assert a[0] == b[0]
        assert abs(a[7]["iters"] - b[7]["iters"]) <= 1
        if a[0] == "optimal":
            assert abs(sf.q @ a[1] - sf.q @ b[1]) <= 1e-6 * max(1.0, abs(sf.q @ a[1]))

    def test_matches_reference_on_beamforming_subproblem(self):
        from risaoi.conic.ipm import solve_hsde, solve_hsde_reference
        from risaoi.conic.problem import to_standard_form

        prob = make_problem(seed=3)
        rho = np.exp(1j * np.linspace(0, 2, prob.n_s))
        W, V = initial_beamformers(prob, rho)
        sf = to_standard_form(build_p6(prob, rho, W, V))
        a = solve_hsde_reference(sf, tol_feas=1e-8, tol_gap=1e-8)
        b = solve_hsde(sf, tol_feas=1e-8, tol_gap=1e-8)
        assert a[0] == b[0] == "optimal"
        np.testing.assert_allclose(b[1], a[1], rtol=1e-6, atol=1e-9)
