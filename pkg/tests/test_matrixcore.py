"""Tests for the dense matrix kernel."""

import numpy as np
import pytest

from degint.errors import (
    FactorizationNotDefined,
    MatrixOverflowError,
    NearDegenerateSpectrum,
    NonFiniteMatrixError,
)
from degint.matrixcore import (
    ULPair,
    as_matrix,
    mat_exp,
    spectral,
    traces_of_powers,
    ul_split_factorize,
)

RNG = np.random.default_rng(0)


def random_matrix(n, scale=0.3, shift=1.0):
    m = RNG.normal(size=(n, n)) + 1j * RNG.normal(size=(n, n))
    return shift * np.eye(n) + scale * m


class TestValidation:
    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            as_matrix(np.ones((2, 3)))

    def test_rejects_nan(self):
        m = np.eye(2)
        m[0, 1] = np.nan
        with pytest.raises(NonFiniteMatrixError):
            as_matrix(m)


class TestMatExp:
    def test_zero_matrix(self):
        assert np.allclose(mat_exp(np.zeros((3, 3))), np.eye(3), atol=1e-15)

    def test_diagonal(self):
        got = mat_exp(np.diag([1.0, -1.0]))
        want = np.diag([np.e, 1.0 / np.e])
        assert np.abs(got - want).max() < 1e-13

    def test_nilpotent_series_terminates(self):
        a = np.array([[0.0, 1.0], [0.0, 0.0]])
        assert np.abs(mat_exp(a) - np.array([[1, 1], [0, 1]])).max() < 1e-15

    def test_inverse_pairing(self):
        """exp(t a) exp(-t a) = 1 for random a and small t."""
        for _ in range(10):
            a = random_matrix(4, scale=1.0, shift=0.0)
            t = RNG.uniform(0.01, 0.5)
            prod = mat_exp(t * a) @ mat_exp(-t * a)
            assert np.abs(prod - np.eye(4)).max() < 1e-11

    def test_determinant_is_exp_trace(self):
        """det exp(a) = exp(tr a); keeps flows unimodular."""
        for _ in range(10):
            a = random_matrix(3, scale=1.0, shift=0.0)
            lhs = np.linalg.det(mat_exp(a))
            rhs = np.exp(np.trace(a))
            assert abs(lhs - rhs) < 1e-9 * abs(rhs)

    def test_accuracy_vs_spectral_oracle(self):
        """Build a = V D V^-1, compare exp(a) against V exp(D) V^-1."""
        for _ in range(5):
            d = RNG.normal(size=4) + 1j * RNG.normal(size=4)
            v = random_matrix(4, scale=0.4)
            a = v @ np.diag(d) @ np.linalg.inv(v)
            want = v @ np.diag(np.exp(d)) @ np.linalg.inv(v)
            got = mat_exp(a)
            assert np.abs(got - want).max() < 1e-12 * max(1.0, np.abs(want).max())

    def test_large_norm_within_contract(self):
        a = np.diag([10.0, -10.0])
        got = mat_exp(a)
        assert abs(got[0, 0] - np.exp(10.0)) < 1e-12 * np.exp(10.0)

    def test_extreme_norm_raises(self):
        with pytest.raises(MatrixOverflowError):
            mat_exp(1e4 * np.eye(2))


class TestULSplit:
    def test_identity(self):
        pair = ul_split_factorize(np.eye(3))
        assert np.abs(pair.g_plus - np.eye(3)).max() < 1e-14
        assert np.abs(pair.g_minus - np.eye(3)).max() < 1e-14

    def test_diagonal_splits_by_square_root(self):
        pair = ul_split_factorize(np.diag([4.0, 0.25]))
        assert np.abs(np.diag(pair.g_plus) - [2.0, 0.5]).max() < 1e-14
        assert np.abs(np.diag(pair.g_minus) - [0.5, 2.0]).max() < 1e-14

    def test_reassembly_oracle(self):
        """g+ g-^{-1} must reproduce the input matrix."""
        for n in (2, 3, 5):
            for _ in range(10):
                m = random_matrix(n)
                pair = ul_split_factorize(m)
                res = np.abs(pair.reassemble() - m).max()
                assert res < 1e-11 * max(1.0, np.abs(m).max())

    def test_triangularity_and_reciprocal_diagonals(self):
        m = random_matrix(4)
        pair = ul_split_factorize(m)
        assert np.abs(np.tril(pair.g_plus, -1)).max() < 1e-12
        assert np.abs(np.triu(pair.g_minus, 1)).max() < 1e-12
        assert np.abs(np.diag(pair.g_plus) * np.diag(pair.g_minus) - 1).max() < 1e-12

    def test_vanishing_minor_raises(self):
        # trailing 1x1 minor is zero
        m = np.array([[1.0, 1.0], [1.0, 0.0]])
        with pytest.raises(FactorizationNotDefined):
            ul_split_factorize(m)

    def test_pair_validates_triangularity(self):
        with pytest.raises(ValueError):
            ULPair(g_plus=np.array([[1.0, 0.0], [1.0, 1.0]]),
                   g_minus=np.eye(2))


class TestSpectral:
    def test_diagonal(self):
        w, v = spectral(np.diag([2.0, 3.0]))
        assert np.allclose(w, [2.0, 3.0])
        assert np.abs(v - np.eye(2)).max() < 1e-14

    def test_symmetric_flip(self):
        w, _ = spectral(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(w, [-1.0, 1.0])

    def test_build_then_recover(self):
        for _ in range(5):
            d = np.sort(RNG.normal(size=4)) + 1j * RNG.normal(size=4) * 0.1
            v = random_matrix(4, scale=0.4)
            m = v @ np.diag(d) @ np.linalg.inv(v)
            w, vec = spectral(m)
            rebuilt = vec @ np.diag(w) @ np.linalg.inv(vec)
            assert np.abs(rebuilt - m).max() < 1e-9

    def test_ordering_deterministic(self):
        w, _ = spectral(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(w, [1.0, 2.0, 3.0])

    def test_near_degenerate_raises(self):
        with pytest.raises(NearDegenerateSpectrum):
            spectral(np.diag([1.0, 1.0 + 1e-10]))


class TestTraces:
    def test_identity(self):
        assert np.allclose(traces_of_powers(np.eye(3), 2), [3.0, 3.0])

    def test_diag(self):
        assert np.allclose(traces_of_powers(np.diag([1.0, 2.0]), 3), [3.0, 5.0, 9.0])

    def test_against_spectral(self):
        m = random_matrix(4)
        w, _ = spectral(m)
        tr = traces_of_powers(m, 3)
        for k in range(1, 4):
            assert abs(tr[k - 1] - np.sum(w ** k)) < 1e-9 * max(1.0, abs(tr[k - 1]))
