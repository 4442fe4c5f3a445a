"""Kernel tests: eigendecomposition, HPD solves, Kronecker, Hankel, sampling."""

import numpy as np
import pytest

from stapbench import linalg
from stapbench.linalg import NumericalError


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (a + a.conj().T)


def random_hpd(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a @ a.conj().T + n * np.eye(n)


class TestHermitianEvd:
    def test_identity(self):
        pairs = linalg.hermitian_evd(np.eye(3))
        assert len(pairs) == 3
        np.testing.assert_allclose([p.value for p in pairs], [1.0, 1.0, 1.0], atol=1e-12)
        vecs = np.column_stack([p.vector for p in pairs])
        np.testing.assert_allclose(vecs.conj().T @ vecs, np.eye(3), atol=1e-10)

    def test_diagonal(self):
        pairs = linalg.hermitian_evd(np.diag([3.0, 1.0]))
        np.testing.assert_allclose([p.value for p in pairs], [3.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(np.abs(pairs[0].vector), [1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(np.abs(pairs[1].vector), [0.0, 1.0], atol=1e-12)

    def test_two_by_two_hand_case(self):
        # characteristic polynomial of [[2,1],[1,2]]: (2-x)^2 - 1 -> x in {3, 1}
        pairs = linalg.hermitian_evd(np.array([[2.0, 1.0], [1.0, 2.0]]))
        np.testing.assert_allclose([p.value for p in pairs], [3.0, 1.0], atol=1e-12)
        v0 = pairs[0].vector
        v1 = pairs[1].vector
        assert abs(abs(v0 @ np.ones(2) / np.sqrt(2)) - 1.0) < 1e-10
        assert abs(abs(v1 @ np.array([1.0, -1.0]) / np.sqrt(2))) > 1.0 - 1e-10

    def test_reconstruction_up_to_64(self):
        rng = np.random.default_rng(3)
        for n in (2, 5, 17, 64):
            a = random_hermitian(rng, n, scale=3.0)
            pairs = linalg.hermitian_evd(a)
            values = np.array([p.value for p in pairs])
            assert np.all(np.diff(values) <= 1e-12)
            rebuilt = sum(p.value * np.outer(p.vector, p.vector.conj()) for p in pairs)
            assert np.linalg.norm(a - rebuilt) <= 1e-8 * np.linalg.norm(a)
            for p in pairs:
                assert abs(np.linalg.norm(p.vector) - 1.0) < 1e-10

    def test_rejects_non_square_and_non_hermitian(self):
        with pytest.raises(ValueError):
            linalg.hermitian_evd(np.ones((2, 3)))
        with pytest.raises(ValueError):
            linalg.hermitian_evd(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestHpdSolve:
    def test_identity(self):
        b = np.array([1.0 + 2j, -3.0, 0.5j])
        np.testing.assert_allclose(linalg.hpd_solve(np.eye(3), b), b, atol=1e-14)

    def test_diagonal(self):
        x = linalg.hpd_solve(np.diag([2.0, 4.0]), np.array([2.0, 4.0]))
        np.testing.assert_allclose(x, [1.0, 1.0], atol=1e-14)

    def test_complex_hand_case(self):
        a = np.array([[2.0, 1j], [-1j, 2.0]])
        x = linalg.hpd_solve(a, np.array([1.0, 0.0]))
        np.testing.assert_allclose(x, [2.0 / 3.0, 1j / 3.0], atol=1e-12)

    def test_residual_on_random_hpd(self):
        rng = np.random.default_rng(11)
        for n in (2, 7, 16):
            a = random_hpd(rng, n)
            b = rng.normal(size=n) + 1j * rng.normal(size=n)
            x = linalg.hpd_solve(a, b)
            assert np.linalg.norm(a @ x - b) <= 1e-8 * np.linalg.norm(b)

    def test_agrees_with_columnwise_inverse(self):
        rng = np.random.default_rng(12)
        for n in (3, 8, 16):
            a = random_hpd(rng, n)
            inv = np.column_stack(
                [linalg.hpd_solve(a, np.eye(n)[:, i]) for i in range(n)]
            )
            b = rng.normal(size=n) + 1j * rng.normal(size=n)
            x = linalg.hpd_solve(a, b)
            assert np.linalg.norm(x - inv @ b) <= 1e-8 * np.linalg.norm(inv @ b)

    def test_non_pd_reports_pivot(self):
        with pytest.raises(NumericalError, match="pivot 2"):
            linalg.hpd_solve(np.diag([1.0, -1.0]), np.array([1.0, 1.0]))


class TestKron:
    def test_vector_case(self):
        out = linalg.kron(np.array([[1.0], [2.0]]), np.array([[1.0], [-1.0]]))
        np.testing.assert_allclose(out.ravel(), [1.0, -1.0, 2.0, -2.0])

    def test_identity(self):
        np.testing.assert_allclose(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_swap_blocks(self):
        out = linalg.kron(np.array([[0.0, 1.0], [1.0, 0.0]]), np.diag([1.0, 2.0]))
        expect = np.zeros((4, 4))
        expect[0:2, 2:4] = np.diag([1.0, 2.0])
        expect[2:4, 0:2] = np.diag([1.0, 2.0])
        np.testing.assert_allclose(out, expect)

    def test_bilinear_and_mixed_product(self):
        rng = np.random.default_rng(5)
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        c = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        d = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        np.testing.assert_allclose(
            linalg.kron(a + c, b), linalg.kron(a, b) + linalg.kron(c, b), atol=1e-12
        )
        np.testing.assert_allclose(
            linalg.kron(a, b) @ linalg.kron(c, d), linalg.kron(a @ c, b @ d), atol=1e-12
        )


class TestHankel:
    def test_three_by_two(self):
        a, b, c = 1.0 + 1j, 2.0, -3j
        out = linalg.hankel_from_vector(np.array([a, b, c]), 2)
        np.testing.assert_allclose(out, [[a, b], [b, c], [c, 0.0]])

    def test_width_one_is_column_copy(self):
        x = np.array([1.0, 2.0, 5.0])
        np.testing.assert_allclose(linalg.hankel_from_vector(x, 1).ravel(), x)

    def test_four_by_three(self):
        out = linalg.hankel_from_vector(np.array([1.0, 2.0, 3.0, 4.0]), 3)
        np.testing.assert_allclose(out, [[1, 2, 3], [2, 3, 4], [3, 4, 0], [4, 0, 0]])

    def test_constant_antidiagonals(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=12) + 1j * rng.normal(size=12)
        out = linalg.hankel_from_vector(x, 5)
        for m in range(12):
            for i in range(5):
                expect = x[m + i] if m + i < 12 else 0.0
                assert out[m, i] == expect

    def test_width_out_of_range(self):
        with pytest.raises(ValueError):
            linalg.hankel_from_vector(np.ones(3), 4)
        with pytest.raises(ValueError):
            linalg.hankel_from_vector(np.ones(3), 0)


class TestColoredSample:
    def test_zero_covariance(self):
        out = linalg.colored_sample(np.zeros((3, 3)), np.random.default_rng(0))
        np.testing.assert_allclose(out, 0.0)

    def test_white_per_entry_variance(self):
        rng = np.random.default_rng(21)
        sigma2 = 2.5
        draws = linalg.colored_sample(sigma2 * np.eye(4), rng, size=100_000)
        variances = np.mean(np.abs(draws) ** 2, axis=1)
        np.testing.assert_allclose(variances, sigma2, rtol=0.05)

    def test_diagonal_variances(self):
        rng = np.random.default_rng(22)
        draws = linalg.colored_sample(np.diag([4.0, 1.0]), rng, size=100_000)
        np.testing.assert_allclose(np.mean(np.abs(draws) ** 2, axis=1), [4.0, 1.0], rtol=0.05)

    def test_empirical_covariance_entrywise(self):
        rng = np.random.default_rng(23)
        r = np.array(
            [
                [2.0, 0.5 + 0.5j, 0.0],
                [0.5 - 0.5j, 1.5, -0.25j],
                [0.0, 0.25j, 1.0],
            ]
        )
        n = 100_000
        draws = linalg.colored_sample(r, rng, size=n)
        emp = draws @ draws.conj().T / n
        scale = np.sqrt(np.outer(np.diag(r).real, np.diag(r).real))
        assert np.all(np.abs(emp - r) <= 3.0 * 5.0 * scale / np.sqrt(n))

    def test_rank_deficient_factor(self):
        u = np.array([1.0, 1j]) / np.sqrt(2)
        r = np.outer(u, u.conj())
        factor = linalg.covariance_factor(r)
        np.testing.assert_allclose(factor @ factor.conj().T, r, atol=1e-12)

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(NumericalError):
            linalg.covariance_factor(np.diag([1.0, -0.5]))
