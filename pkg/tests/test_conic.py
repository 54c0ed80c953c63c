import numpy as np
import pytest

from irscrb.conic import (ConicProgram, ConicSolution, KktResiduals,
                          complexify, dump_program, embed_hermitian,
                          hermitian_functional, kkt_residuals, solve)

from oracles import dual_grid_sdp

RNG = np.random.default_rng(99)


def _random_symmetric(n, rng=RNG):
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2.0


def _random_hermitian(n, rng=RNG):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2.0


def _eigen_sdp(c):
    p = ConicProgram([c.shape[0]])
    p.set_objective({0: c})
    p.add_eq({0: np.eye(c.shape[0])}, 1.0)
    return p


class TestEmbedding:
    def test_identity(self):
        np.testing.assert_array_equal(embed_hermitian(np.eye(3)), np.eye(6))

    def test_eigenvalues_duplicate(self):
        h = _random_hermitian(4)
        ev_h = np.sort(np.linalg.eigvalsh(h))
        ev_e = np.sort(np.linalg.eigvalsh(embed_hermitian(h)))
        np.testing.assert_allclose(np.repeat(ev_h, 2), ev_e, atol=1e-12)

    def test_minimum_eigenvalue_sign_agreement(self):
        for _ in range(20):
            h = _random_hermitian(5)
            lam_h = np.linalg.eigvalsh(h).min()
            lam_e = np.linalg.eigvalsh(embed_hermitian(h)).min()
            assert np.sign(lam_h) == np.sign(lam_e)
            assert lam_e == pytest.approx(lam_h, rel=1e-10)

    def test_trace_doubles(self):
        h = _random_hermitian(3)
        assert np.trace(embed_hermitian(h)) == pytest.approx(
            2.0 * np.trace(h).real, rel=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            embed_hermitian(np.array([[0.0, 1.0], [2.0, 0.0]]))

    def test_complexify_inverts(self):
        h = _random_hermitian(4)
        np.testing.assert_allclose(complexify(embed_hermitian(h)), h, atol=1e-14)

    def test_functional_pairing(self):
        h = _random_hermitian(3)
        x = _random_hermitian(3)
        lhs = float(np.tensordot(hermitian_functional(h), embed_hermitian(x), axes=2))
        assert lhs == pytest.approx(np.trace(h @ x).real, rel=1e-12)


class TestSolve:
    def test_eigenvalue_sdp(self):
        for seed in range(8):
            rng = np.random.default_rng(seed)
            c = _random_symmetric(5, rng)
            sol = solve(_eigen_sdp(c), tol=1e-9)
            lam, vec = np.linalg.eigh(c)
            assert sol.status == "optimal"
            assert sol.objective == pytest.approx(lam[0], abs=1e-8)
            # solution is the eigenprojector of the smallest eigenvalue
            proj = np.outer(vec[:, 0], vec[:, 0])
            assert np.linalg.norm(sol.blocks[0] - proj) < 1e-6

    def test_scalar_block_is_a_bounded_lp(self):
        p = ConicProgram([1])
        p.set_objective({0: np.array([[-2.0]])})
        p.add_ineq({0: np.array([[1.0]])}, 3.0)
        sol = solve(p)
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(-6.0, abs=1e-8)

    def test_order_four_random_sdp_against_grid_oracle(self):
        # min tr(CX) s.t. tr(X) = 1, tr(AX) = tr(A)/4, X >= 0; the oracle
        # refines a 2-D grid over the dual and converges by strong duality
        for seed in (0, 1):
            rng = np.random.default_rng(100 + seed)
            c = _random_symmetric(4, rng)
            a = _random_symmetric(4, rng)
            b = float(np.trace(a)) / 4.0
            p = ConicProgram([4])
            p.set_objective({0: c})
            p.add_eq({0: np.eye(4)}, 1.0)
            p.add_eq({0: a}, b)
            sol = solve(p)
            assert sol.status == "optimal"
            oracle = dual_grid_sdp(c, a, b)
            assert sol.objective == pytest.approx(oracle, abs=1e-4)

    def test_hermitian_block_through_embedding(self):
        h = _random_hermitian(4)
        p = ConicProgram([8])
        p.set_objective({0: hermitian_functional(h)})
        p.add_eq({0: hermitian_functional(np.eye(4))}, 1.0)
        sol = solve(p, tol=1e-9)
        assert sol.objective == pytest.approx(np.linalg.eigvalsh(h).min(), abs=1e-8)

    def test_certified_interval(self):
        c = _random_symmetric(4)
        sol = solve(_eigen_sdp(c))
        lam = np.linalg.eigvalsh(c).min()
        dual = float(sol.y[0])
        gap = abs(sol.objective - dual)
        assert sol.objective - gap - 1e-12 <= lam <= dual + gap + 1e-12

    def test_deterministic(self):
        c = _random_symmetric(5)
        sol1 = solve(_eigen_sdp(c))
        sol2 = solve(_eigen_sdp(c))
        assert sol1.iterations == sol2.iterations
        assert np.array_equal(sol1.blocks[0], sol2.blocks[0])
        assert np.array_equal(sol1.y, sol2.y)

    def test_multiple_blocks(self):
        # block-diagonal eigenvalue problem: the mass moves to the block
        # with the smaller bottom eigenvalue
        rng = np.random.default_rng(7)
        c1, c2 = _random_symmetric(3, rng), _random_symmetric(4, rng)
        p = ConicProgram([3, 4])
        p.set_objective({0: c1, 1: c2})
        p.add_eq({0: np.eye(3), 1: np.eye(4)}, 1.0)
        sol = solve(p, tol=1e-9)
        expected = min(np.linalg.eigvalsh(c1).min(), np.linalg.eigvalsh(c2).min())
        assert sol.objective == pytest.approx(expected, abs=1e-8)

    def test_infeasible_program(self):
        p = ConicProgram([2])
        p.set_objective({0: np.zeros((2, 2))})
        p.add_eq({0: np.eye(2)}, -1.0)
        assert solve(p).status == "infeasible"

    def test_rejects_asymmetric_coefficients(self):
        p = ConicProgram([2])
        with pytest.raises(ValueError, match="symmetric"):
            p.add_eq({0: np.array([[0.0, 1.0], [0.0, 0.0]])}, 0.0)

    def test_rejects_bad_block_order(self):
        with pytest.raises(ValueError, match="block order"):
            ConicProgram([0])


class TestKktResiduals:
    def test_analytic_optimum_has_tiny_residuals(self):
        c = _random_symmetric(4)
        lam, vec = np.linalg.eigh(c)
        x = np.outer(vec[:, 0], vec[:, 0])
        s = c - lam[0] * np.eye(4)
        sol = ConicSolution(blocks=[x], objective=lam[0], status="optimal",
                            kkt=KktResiduals(0, 0, 0), y=np.array([lam[0]]),
                            dual_blocks=[s])
        res = kkt_residuals(_eigen_sdp(c), sol)
        assert res.max() <= 1e-10

    def test_perturbation_is_detected(self):
        c = _random_symmetric(4)
        lam, vec = np.linalg.eigh(c)
        x = np.outer(vec[:, 0], vec[:, 0]) + 1e-3 * np.eye(4)
        s = c - lam[0] * np.eye(4)
        sol = ConicSolution(blocks=[x], objective=float(np.tensordot(c, x, 2)),
                            status="optimal", kkt=KktResiduals(0, 0, 0),
                            y=np.array([lam[0]]), dual_blocks=[s])
        res = kkt_residuals(_eigen_sdp(c), sol)
        assert res.max() > 1e-4

    def test_infeasible_point_has_primal_residual(self):
        c = _random_symmetric(3)
        sol = ConicSolution(blocks=[2.0 * np.eye(3)], objective=0.0,
                            status="optimal", kkt=KktResiduals(0, 0, 0),
                            y=np.zeros(1), dual_blocks=[np.eye(3)])
        res = kkt_residuals(_eigen_sdp(c), sol)
        assert res.primal > 0.0


class TestDump:
    def test_format_and_roundtrippable_fields(self):
        p = ConicProgram([2, 1])
        p.set_objective({0: np.array([[1.0, 0.5], [0.5, 0.0]])})
        p.add_eq({0: np.eye(2)}, 1.0)
        p.add_ineq({1: np.array([[2.0]])}, 3.0)
        text = dump_program(p)
        lines = text.strip().splitlines()
        assert lines[1] == "blocks 2 1"
        assert "obj 0 0 0 1.0" in text
        assert "obj 0 0 1 0.5" in text
        assert "eq 0 1.0" in text
        assert "ineq 0 3.0" in text
        assert "ineqterm 0 1 0 0 2.0" in text
        # only upper-triangle entries are listed
        assert "obj 0 1 0" not in text
