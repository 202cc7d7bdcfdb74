from pathlib import Path

import numpy as np
import pytest

from optomagnonic.dynamics import build_diffusion, build_drift
from optomagnonic.lyapunov import (
    CovarianceMatrix,
    LyapunovError,
    UnstableSystemError,
    is_physical,
    residual,
    solve_lyapunov,
)
from optomagnonic.model import load_preset

DATA = Path(__file__).parent / "data"


def kronecker_oracle(A, D):
    """Row-major vectorisation: vec(AV) = (A kron I) v, vec(V A^T) = (I kron A) v."""
    n = A.shape[0]
    I = np.eye(n)
    v = np.linalg.solve(np.kron(A, I) + np.kron(I, A), -D.reshape(-1))
    return v.reshape(n, n)


def test_scaled_identity():
    cm = solve_lyapunov(-0.5 * np.eye(8), np.eye(8))
    np.testing.assert_allclose(cm.V, np.eye(8), atol=1e-15)


def test_decoupled_mode_at_zero_temperature_is_vacuum():
    p = load_preset("scheme_i").replace(G_a=0, G_c=0, G_m=0, T=0.0)
    V = solve_lyapunov(build_drift(p), build_diffusion(p)).V
    for k in range(3):
        np.testing.assert_allclose(V[2 * k:2 * k + 2, 2 * k:2 * k + 2], 0.5 * np.eye(2), atol=1e-12)


@pytest.mark.parametrize("method", ["kronecker", "schur"])
def test_scheme_i_regression(method):
    p = load_preset("scheme_i")
    A, D = build_drift(p), build_diffusion(p)
    V = solve_lyapunov(A, D, method=method).V
    frozen = np.loadtxt(DATA / "scheme_i_covariance.txt")
    np.testing.assert_allclose(V, frozen, rtol=0, atol=1e-9)
    np.testing.assert_allclose(V, kronecker_oracle(A, D), rtol=0, atol=1e-9)


def test_oracle_equivalence_on_random_corpus(corpus50):
    for p in corpus50:
        A, D = build_drift(p), build_diffusion(p)
        V = solve_lyapunov(A, D).V
        np.testing.assert_allclose(V, kronecker_oracle(A, D), rtol=0, atol=1e-9)
        np.testing.assert_allclose(V, solve_lyapunov(A, D, method="schur").V, rtol=0, atol=1e-9)
        assert np.linalg.norm(A @ V + V @ A.T + D) / np.linalg.norm(D) <= 1e-10


def test_physicality_on_random_corpus(corpus50):
    for p in corpus50:
        V = solve_lyapunov(build_drift(p), build_diffusion(p)).V
        assert np.max(np.abs(V - V.T)) <= 1e-12 * np.max(np.abs(V))
        assert is_physical(V)


def test_scaling_covariance(corpus50):
    for p in corpus50[:10]:
        A, D = build_drift(p), build_diffusion(p)
        V = solve_lyapunov(A, D).V
        np.testing.assert_allclose(solve_lyapunov(A, 3.7 * D).V, 3.7 * V, rtol=1e-12, atol=1e-12)


def test_decoupled_mechanical_block():
    p = load_preset("scheme_i").replace(G_a=0, G_c=0, G_m=0)
    assert p.gamma_b / p.omega_b == pytest.approx(4e-6)
    V = solve_lyapunov(build_drift(p), build_diffusion(p)).V
    mech = V[6:, 6:]
    np.testing.assert_allclose(mech, (p.n_b + 0.5) * np.eye(2), rtol=1e-2, atol=1e-2 * (p.n_b + 0.5))
    # and the off-diagonal blocks vanish
    assert np.max(np.abs(V[:6, 6:])) == 0


def test_unstable_raises_with_margin():
    p = load_preset("scheme_ii").replace(G_m=load_preset("scheme_ii").G_m * 40 / 3)
    A = build_drift(p)
    with pytest.raises(UnstableSystemError) as info:
        solve_lyapunov(A, build_diffusion(p))
    assert info.value.max_real_eig > 0


def test_unknown_method():
    with pytest.raises(ValueError):
        solve_lyapunov(-np.eye(2), np.eye(2), method="adi")


def test_singular_operator():
    with pytest.raises(LyapunovError):
        solve_lyapunov(np.zeros((2, 2)), np.eye(2), check_stability=False)


def test_near_marginal_warning():
    # max Re = -1 rad/s lies inside the marginal band
    cm = solve_lyapunov(-np.eye(8), np.eye(8))
    assert cm.warning is not None
    assert isinstance(cm, CovarianceMatrix) and cm.n == 4


class TestResidual:
    def test_exact_solution(self):
        p = load_preset("scheme_ii")
        A, D = build_drift(p), build_diffusion(p)
        assert residual(A, D, solve_lyapunov(A, D).V) <= 1e-10

    def test_zero_guess_is_one(self):
        p = load_preset("scheme_ii")
        A, D = build_drift(p), build_diffusion(p)
        assert residual(A, D, np.zeros((8, 8))) == pytest.approx(1.0, rel=1e-15)

    def test_linear_growth_under_perturbation(self):
        p = load_preset("scheme_i")
        A, D = build_drift(p), build_diffusion(p)
        V = solve_lyapunov(A, D).V
        r6 = residual(A, D, V + 1e-6 * np.eye(8))
        r3 = residual(A, D, V + 1e-3 * np.eye(8))
        # perturbation contributes eps * ||A + A^T||_F / ||D||_F
        slope = np.linalg.norm(A + A.T) / max(1.0, np.linalg.norm(D))
        assert r6 == pytest.approx(1e-6 * slope, rel=1e-3)
        assert r3 == pytest.approx(1e-3 * slope, rel=1e-6)
        assert r3 / r6 == pytest.approx(1e3, rel=1e-3)


def test_is_physical_rejects_squeezed_below_vacuum():
    assert is_physical(0.5 * np.eye(2))
    assert not is_physical(0.4 * np.eye(2))
