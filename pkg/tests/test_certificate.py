import math

import numpy as np
import pytest

from kyfan2k.norms import NormParams
from kyfan2k.solver import Certificate, ProblemSpec, build_certificate, certificate_check, certify, solve

TWO_BLOCK = np.kron(np.eye(2), np.ones((2, 2)))


def hand_certificate(theta):
    """Certificate for the noiseless two-block 4x4 instance, built by hand.

    X = A / 8 by symmetry. The split is Y = g A, Z = (1 - g) A with g chosen
    to balance 2 sqrt(2) g = (1 - g) / theta; alpha and beta are the two
    objective terms at X and lambda is their weighted sum.
    """
    A = TWO_BLOCK
    X = A / 8
    g = 1 / (1 + 2 * math.sqrt(2) * theta)
    alpha, beta = math.sqrt(2) / 4, 1.0
    return X, Certificate.from_split(A, g * A, alpha, beta, alpha + theta * beta)


@pytest.mark.parametrize("theta", [0.05, 0.3, 1.0])
def test_hand_built_certificate_passes(theta):
    spec = ProblemSpec(TWO_BLOCK, NormParams(2, theta))
    X, cert = hand_certificate(theta)
    rep = certificate_check(spec, X, cert, tol=1e-6)
    assert rep.certified and rep.verdict == "certified"
    assert all(c.passed for c in rep.conditions)
    assert rep.differentiable_Y and rep.unique


def test_hand_certificate_matches_solver():
    theta = 0.3
    out = solve(ProblemSpec(TWO_BLOCK, NormParams(2, theta)))
    X, cert = hand_certificate(theta)
    np.testing.assert_allclose(out.X, X, atol=1e-8)
    assert out.objective == pytest.approx(cert.lam, rel=1e-9)


def test_unbalanced_split_fails_condition_i():
    A = np.outer([1.0, 2.0], [1.0, 1.0, 3.0])
    spec = ProblemSpec(A, NormParams(1, 0.5))
    X = A / np.sum(A * A)
    cert = Certificate.from_split(A, A, 1.0, 0.0, 1.0)
    rep = certificate_check(spec, X, cert)
    assert rep.condition("i").passed is False
    assert rep.verdict == "not certified"


def test_perturbed_alpha_fails_condition_iv():
    spec = ProblemSpec(TWO_BLOCK, NormParams(2, 0.3))
    X, cert = hand_certificate(0.3)
    bad = Certificate(cert.Y, cert.Z, 1.1 * cert.alpha, cert.beta, cert.lam)
    rep = certificate_check(spec, X, bad)
    assert rep.condition("iv").passed is False
    assert rep.condition("i").passed


def test_wrong_support_fails_condition_iii():
    spec = ProblemSpec(TWO_BLOCK, NormParams(2, 0.3))
    X, cert = hand_certificate(0.3)
    X = X.copy()
    X[0, 3] = 1e-3
    assert certificate_check(spec, X, cert).condition("iii").passed is False


def test_negative_weights_raise():
    spec = ProblemSpec(TWO_BLOCK, NormParams(2, 0.3))
    X, cert = hand_certificate(0.3)
    with pytest.raises(ValueError):
        certificate_check(spec, X, Certificate(cert.Y, cert.Z, -1.0, cert.beta, cert.lam))
    with pytest.raises(ValueError):
        certificate_check(spec, X, Certificate(cert.Y, cert.Z, cert.alpha, -0.1, cert.lam))
    with pytest.raises(ValueError):
        certificate_check(spec, X, Certificate(cert.Y, cert.Z, cert.alpha, cert.beta, 0.0))


def test_split_is_exact():
    X, cert = hand_certificate(0.3)
    assert np.array_equal(cert.Y + cert.Z, TWO_BLOCK)


def test_certify_solver_output(rng):
    for shape, k, theta in [((6, 5), 2, 0.1), ((4, 4), 1, 0.5), ((5, 3), 3, 0.0)]:
        spec = ProblemSpec(rng.random(shape), NormParams(k, theta))
        out = solve(spec)
        rep = certify(spec, out.X, tol=1e-5)
        assert rep.certified, rep.lines()


def test_theta_zero_certificate():
    spec = ProblemSpec(TWO_BLOCK, NormParams(2, 0.0))
    out = solve(spec)
    cert = build_certificate(spec, out.X)
    assert np.array_equal(cert.Y, TWO_BLOCK) and not np.any(cert.Z)
    rep = certificate_check(spec, out.X, cert)
    assert rep.certified
    assert rep.condition("iii").passed is None


def test_report_lines():
    spec = ProblemSpec(TWO_BLOCK, NormParams(2, 0.3))
    X, cert = hand_certificate(0.3)
    lines = certificate_check(spec, X, cert).lines()
    assert lines[0].startswith("(i) pass")
    assert lines[-1] == "verdict: certified"
    with pytest.raises(KeyError):
        certificate_check(spec, X, cert).condition("vi")
