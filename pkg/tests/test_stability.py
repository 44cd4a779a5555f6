import numpy as np
import pytest

from criticlab import (
    Algorithm,
    CriticWeights,
    GreedyAnalytic,
    LearnerConfig,
    OmegaMode,
    ProblemConstants,
    Verdict,
    classify,
    curvature_factorization,
    curvature_weighting,
    eigenvalues_2x2,
    max_stable_alpha,
    reparam_transform,
    unroll,
    vgl_update,
    vgl_update_matrix,
)

from conftest import random_consts

F_LAM0 = np.array([[10.0, 1.0], [-1.0, -1.0]])
F_LAM1 = np.array([[-1.0, -1.0], [0.2, 0.02]])


def test_update_matrix_pinned_values(consts_lam0, consts_lam1):
    m0 = vgl_update_matrix(consts_lam0)
    assert np.max(np.abs(m0 - [[-0.75, 0.5], [-24.75, -50.5]])) < 1e-12
    m1 = vgl_update_matrix(consts_lam1)
    assert np.max(np.abs(m1 - [[-0.2625, -24.75], [-0.495, -50.5]])) < 1e-12


def test_update_matrix_requires_undiscounted():
    with pytest.raises(ValueError, match="gamma"):
        vgl_update_matrix(ProblemConstants(0.01, 0.01, 0.01, gamma=0.9, lam=0.0))


def test_transformed_matrix_pinned_values(consts_lam0, consts_lam1):
    m0 = reparam_transform(F_LAM0, vgl_update_matrix(consts_lam0))
    assert np.max(np.abs(m0 - [[117.0, -38.25], [189.0, -27.0]])) < 1e-9
    m1 = reparam_transform(F_LAM1, vgl_update_matrix(consts_lam1))
    assert np.max(np.abs(m1 - [[2.7665, 0.1295], [4.4954, 0.2222]])) < 5e-5


def test_eigenvalues_pinned(consts_lam0, consts_lam1):
    lo, hi = eigenvalues_2x2(reparam_transform(F_LAM0, vgl_update_matrix(consts_lam0)))
    assert lo.conjugate() == hi
    assert abs(hi.real - 45.0) < 1e-9
    assert abs(abs(hi.imag) - 45.22) < 0.01

    lo, hi = eigenvalues_2x2(reparam_transform(F_LAM1, vgl_update_matrix(consts_lam1)))
    assert lo.imag == 0.0 and hi.imag == 0.0
    assert lo.real > 0.0 and hi.real > 0.0


def test_eigenvalues_identity_and_residual():
    assert eigenvalues_2x2(np.eye(2)) == (1.0 + 0.0j, 1.0 + 0.0j)
    rng = np.random.default_rng(51)
    for _ in range(500):
        m = rng.uniform(-50, 50, (2, 2))
        tr = m[0, 0] + m[1, 1]
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        for mu in eigenvalues_2x2(m):
            residual = abs(mu * mu - tr * mu + det)
            assert residual < 1e-10 * max(1.0, abs(det))


def test_transform_identity_passthrough(consts_lam0):
    m = vgl_update_matrix(consts_lam0)
    assert np.array_equal(reparam_transform(np.eye(2), m), m)
    assert np.array_equal(reparam_transform(np.eye(2), m, np.eye(2)), m)


def test_update_matrix_matches_rollout(consts_lam0):
    # Row-by-row agreement with the simulated gradient errors, including
    # through a reparametrisation.
    rng = np.random.default_rng(52)
    for _ in range(300):
        consts = random_consts(rng)
        m = vgl_update_matrix(consts)
        w_arr = rng.uniform(-1, 1, 2)
        w = CriticWeights(w_arr[0], w_arr[1])
        traj = unroll(0.0, GreedyAnalytic(), w, consts)
        cfg = LearnerConfig(Algorithm.VGL, lam=consts.lam, alpha=1.0)
        update = vgl_update(traj, w, consts, cfg, OmegaMode.IDENTITY)[:2]
        want = m @ w_arr
        assert np.max(np.abs(update - want)) <= 1e-10 * max(np.max(np.abs(want)), 1e-300)


def test_weighted_update_matches_analytic_p_system():
    # alpha**-1 * (one weighted rollout update mapped to p space) must equal
    # (F.T D M F) p for random constants, weights and reparametrisations.
    rng = np.random.default_rng(55)
    for _ in range(300):
        consts = random_consts(rng)
        while True:
            f = rng.uniform(-2, 2, (2, 2))
            if abs(np.linalg.det(f)) > 0.05:
                break
        p = rng.uniform(-1, 1, 2)
        w12 = f @ p
        w = CriticWeights(w12[0], w12[1])
        traj = unroll(0.0, GreedyAnalytic(), w, consts)
        cfg = LearnerConfig(Algorithm.VGL, lam=consts.lam, alpha=1.0)
        dw = vgl_update(traj, w, consts, cfg, OmegaMode.CURVATURE)
        dp_sim = f.T @ dw[:2]
        system = reparam_transform(f, vgl_update_matrix(consts), curvature_weighting(consts))
        dp_want = system @ p
        assert np.max(np.abs(dp_sim - dp_want)) <= 1e-9 * max(np.max(np.abs(dp_want)), 1e-300)


def test_curvature_weighting_values(consts_lam0):
    d = curvature_weighting(consts_lam0)
    assert np.max(np.abs(d - np.diag([25.0, 25.0]))) < 1e-12
    d1 = curvature_weighting(ProblemConstants(0.99, 0.01, 0.01))
    assert np.max(np.abs(d1 - np.diag([0.5, 25.0]))) < 1e-12


def test_curvature_factorization_identity_and_determinant():
    rng = np.random.default_rng(53)
    for _ in range(100):
        consts = random_consts(rng)
        d, e, b = curvature_factorization(consts)
        lam1 = ProblemConstants(consts.c1, consts.c2, consts.k, gamma=1.0, lam=1.0)
        m = vgl_update_matrix(lam1)
        reconstructed = 2.0 * e @ b @ e @ d
        assert np.max(np.abs(reconstructed - m)) <= 1e-12 * np.max(np.abs(m))

        k, c2 = consts.k, consts.c2
        det_b = np.linalg.det(b)
        want = k * (k + 2.0) * (k + c2) ** 2
        assert abs(det_b - want) <= 1e-12 * abs(want)
        assert b[0, 0] + b[1, 1] < 0.0
        assert b[0, 1] == b[1, 0]


def test_weighted_lam1_system_symmetric_negative_definite():
    rng = np.random.default_rng(54)
    checked = 0
    while checked < 100:
        consts = random_consts(rng, lam=1.0)
        f = rng.uniform(-2, 2, (2, 2))
        if abs(np.linalg.det(f)) < 1e-2:
            continue
        checked += 1
        m = reparam_transform(f, vgl_update_matrix(consts), curvature_weighting(consts))
        assert abs(m[0, 1] - m[1, 0]) <= 1e-12 * max(1.0, abs(m[0, 1]))
        for mu in eigenvalues_2x2(m):
            assert mu.imag == 0.0
            assert mu.real < 0.0


def test_classify_preset_verdicts(consts_lam0, consts_lam1):
    assert classify(consts_lam0, F_LAM0, OmegaMode.IDENTITY).verdict is Verdict.UNSTABLE
    assert classify(consts_lam0, F_LAM0, OmegaMode.CURVATURE).verdict is Verdict.UNSTABLE
    assert classify(consts_lam1, F_LAM1, OmegaMode.IDENTITY).verdict is Verdict.UNSTABLE

    report = classify(consts_lam1, F_LAM1, OmegaMode.CURVATURE)
    assert report.verdict is Verdict.STABLE
    for mu in report.eigenvalues:
        assert mu.imag == 0.0 and mu.real < 0.0
    # the convergence preset's alpha must sit inside the discrete bound
    assert report.alpha_bound is not None
    assert report.alpha_bound > 1e-3


def test_curvature_weighting_preserves_lam0_instability(consts_lam0):
    # The weighting is a positive multiple of the identity for these
    # constants, so it cannot stabilise the system.
    base = classify(consts_lam0, F_LAM0, OmegaMode.IDENTITY)
    weighted = classify(consts_lam0, F_LAM0, OmegaMode.CURVATURE)
    assert weighted.verdict is base.verdict is Verdict.UNSTABLE
    scale = weighted.eigenvalues[0].real / base.eigenvalues[0].real
    assert scale == pytest.approx(25.0, rel=1e-12)


def test_max_stable_alpha():
    assert max_stable_alpha([complex(-1, 0), complex(-1, 0)]) == pytest.approx(2.0)
    assert max_stable_alpha([complex(-1, 1), complex(-1, -1)]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        max_stable_alpha([complex(1, 0), complex(-1, 0)])


def test_report_serialization(consts_lam1):
    report = classify(consts_lam1, F_LAM1, OmegaMode.CURVATURE)
    rec = report.to_dict()
    assert rec["verdict"] == "stable"
    assert len(rec["eigenvalues"]) == 2
    text = str(report)
    assert "verdict: stable" in text
    assert "p-space matrix" in text
    import json

    parsed = json.loads(report.to_json())
    assert parsed["verdict"] == "stable"
    assert parsed["alpha_bound"] == report.alpha_bound


def test_verdict_band():
    from criticlab.stability import verdict_for

    assert verdict_for([complex(-1, 0), complex(-2, 0)]) is Verdict.STABLE
    assert verdict_for([complex(-1, 0), complex(1e-9, 5)]) is Verdict.UNSTABLE
    # a pure rotation sits inside the marginal band
    rotation_eigs = eigenvalues_2x2(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert verdict_for(rotation_eigs) is Verdict.MARGINAL
    assert verdict_for([complex(-1, 0), complex(1e-13, 0)]) is Verdict.MARGINAL
