"""Analysis tests: morphing, effective potential, SNR, spectrum, cover bound."""

import numpy as np
import pytest

from kernel_hopfield import (
    KernelConfig,
    PatternSet,
    TrainingConfig,
    gen_random_patterns,
    pseudo_energy,
    train_klr,
)
from kernel_hopfield.analysis import (
    MorphConfig,
    SingularInterpolationError,
    cover_comparison,
    effective_potential_profile,
    eigen_spectrum,
    morph_experiment,
    morph_state,
    participation_ratio,
    slowdown_profile,
    snr_analysis,
)
from kernel_hopfield.training import build_targets


def trained_net(n=24, p=3, seed=0, gamma=0.02, mode="auto", iterations=500):
    pats = gen_random_patterns(n, p, seed)
    kernel = KernelConfig(gamma)
    w = train_klr(pats, TrainingConfig(mode=mode, iterations=iterations), kernel)
    return pats, w, kernel


# ---------------------------------------------------------------- morph state


def test_morph_state_endpoints_are_parents():
    rng = np.random.default_rng(0)
    a = gen_random_patterns(50, 1, 1).data[0]
    b = gen_random_patterns(50, 1, 2).data[0]
    np.testing.assert_array_equal(morph_state(a, b, 0.0, 0.0, rng), a)
    np.testing.assert_array_equal(morph_state(a, b, 1.0, 0.0, rng), b)


def test_morph_state_midpoint_tie_break():
    a = np.array([1.0, 1.0, -1.0, -1.0])
    b = np.array([1.0, -1.0, 1.0, -1.0])
    # agreement coords keep the shared value; ties resolve to +1
    np.testing.assert_array_equal(
        morph_state(a, b, 0.5, 0.0, np.random.default_rng(0)),
        np.array([1.0, 1.0, 1.0, -1.0]),
    )


def test_morph_state_deterministic_given_rng_state():
    a = gen_random_patterns(200, 1, 3).data[0]
    b = gen_random_patterns(200, 1, 4).data[0]
    s1 = morph_state(a, b, 0.4, 0.5, np.random.default_rng(7))
    s2 = morph_state(a, b, 0.4, 0.5, np.random.default_rng(7))
    np.testing.assert_array_equal(s1, s2)


def test_morph_state_validation():
    rng = np.random.default_rng(0)
    a = np.ones(4)
    with pytest.raises(ValueError):
        morph_state(a, np.ones(5), 0.5, 0.0, rng)
    with pytest.raises(ValueError):
        morph_state(a, a, 1.5, 0.0, rng)
    with pytest.raises(ValueError):
        morph_state(a, a, 0.5, -0.1, rng)


def test_morph_config_validation():
    with pytest.raises(ValueError):
        MorphConfig(ratio_grid=np.array([0.1, 0.5, 1.0]))
    with pytest.raises(ValueError):
        MorphConfig(ratio_grid=np.array([0.0, 0.6, 0.5, 1.0]))
    with pytest.raises(ValueError):
        MorphConfig(nu=-1.0)
    with pytest.raises(ValueError):
        MorphConfig(trials=0)
    assert MorphConfig().ratio_grid.shape == (101,)


# ----------------------------------------------------------- morph experiment


def test_morph_experiment_endpoint_rows_are_clean():
    pats, w, kernel = trained_net()
    cfg = MorphConfig(ratio_grid=np.array([0.0, 0.5, 1.0]), trials=4)
    res = morph_experiment(pats.data[0], pats.data[1], pats, w, kernel, cfg)
    assert res.mean_overlap_a[0] == 1.0 and res.spurious_rate[0] == 0.0
    assert res.mean_overlap_b[-1] == 1.0 and res.spurious_rate[-1] == 0.0
    assert res.mean_steps[0] == 1.0 and res.mean_steps[-1] == 1.0
    assert res.nonconverged_rate.max() == 0.0


def test_morph_experiment_requires_stored_distinct_endpoints():
    pats, w, kernel = trained_net()
    cfg = MorphConfig(ratio_grid=np.array([0.0, 1.0]), trials=1)
    with pytest.raises(ValueError):
        morph_experiment(np.ones(pats.n), pats.data[1], pats, w, kernel, cfg)
    with pytest.raises(ValueError):
        morph_experiment(pats.data[0], pats.data[0], pats, w, kernel, cfg)


def test_morph_experiment_deterministic_across_calls():
    pats, w, kernel = trained_net(seed=5)
    cfg = MorphConfig(ratio_grid=np.array([0.0, 0.3, 0.7, 1.0]), trials=3, seed=9)
    r1 = morph_experiment(pats.data[0], pats.data[2], pats, w, kernel, cfg)
    r2 = morph_experiment(pats.data[0], pats.data[2], pats, w, kernel, cfg)
    np.testing.assert_array_equal(r1.mean_overlap_a, r2.mean_overlap_a)
    np.testing.assert_array_equal(r1.mean_steps, r2.mean_steps)
    np.testing.assert_array_equal(r1.spurious_rate, r2.spurious_rate)


def test_slowdown_profile_matches_morph_steps():
    pats, w, kernel = trained_net(seed=2)
    cfg = MorphConfig(ratio_grid=np.array([0.0, 0.5, 1.0]), trials=3, seed=4)
    grid, steps, nonconv = slowdown_profile(pats.data[0], pats.data[1], pats, w, kernel, cfg)
    res = morph_experiment(pats.data[0], pats.data[1], pats, w, kernel, cfg)
    np.testing.assert_array_equal(grid, cfg.ratio_grid)
    np.testing.assert_array_equal(steps, res.mean_steps)
    np.testing.assert_array_equal(nonconv, res.nonconverged_rate)
    assert steps[0] == 1.0


def test_sharp_kernel_large_n_midpoint_is_spurious():
    # At N=512 and gamma=5.0 every cross-pattern kernel value underflows to
    # zero once the state sits ~halfway between the parents, so the field
    # vanishes and the tie-break freezes the all-ones state: a converged
    # attractor resembling neither parent.
    pats = gen_random_patterns(512, 2, 0)
    kernel = KernelConfig(5.0)
    w = train_klr(pats, TrainingConfig(), kernel)
    cfg = MorphConfig(ratio_grid=np.array([0.0, 0.5, 1.0]), trials=5, seed=0)
    res = morph_experiment(pats.data[0], pats.data[1], pats, w, kernel, cfg)
    assert res.spurious_rate[0] == 0.0
    assert res.spurious_rate[1] == 1.0
    assert res.spurious_rate[2] == 0.0
    assert abs(res.mean_overlap_a[1]) < 0.2 and abs(res.mean_overlap_b[1]) < 0.2


# -------------------------------------------------------- effective potential


def test_potential_endpoints_equal_stored_energies_exactly():
    pats, w, kernel = trained_net(seed=6)
    grid = np.array([0.0, 0.5, 1.0])
    u = effective_potential_profile(pats.data[0], pats.data[1], pats, w, kernel, grid)
    assert u[0] == pseudo_energy(pats.data[0], pats, w, kernel)
    assert u[-1] == pseudo_energy(pats.data[1], pats, w, kernel)


def test_potential_swap_symmetry_exact_on_dyadic_grid():
    pats, w, kernel = trained_net(seed=8)
    grid = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    u_ab = effective_potential_profile(pats.data[0], pats.data[1], pats, w, kernel, grid)
    u_ba = effective_potential_profile(pats.data[1], pats.data[0], pats, w, kernel, grid)
    np.testing.assert_array_equal(u_ab, u_ba[::-1])


def test_potential_swap_symmetry_on_fine_grid():
    pats, w, kernel = trained_net(seed=8)
    grid = np.linspace(0.0, 1.0, 101)
    u_ab = effective_potential_profile(pats.data[0], pats.data[1], pats, w, kernel, grid)
    u_ba = effective_potential_profile(pats.data[1], pats.data[0], pats, w, kernel, grid)
    np.testing.assert_allclose(u_ab, u_ba[::-1], rtol=1e-9, atol=1e-9)


def test_potential_antipodal_midpoint_raises():
    a = np.ones(10)
    pats = PatternSet(data=np.stack([a, -a]))
    kernel = KernelConfig(0.02)
    w = train_klr(pats, TrainingConfig(iterations=10), kernel)
    with pytest.raises(SingularInterpolationError):
        effective_potential_profile(a, -a, pats, w, kernel, np.array([0.0, 0.5, 1.0]))


# ------------------------------------------------------------------------ SNR


def oracle_snr_terms(pats, alpha, gamma, y):
    p, n = alpha.shape
    sig = np.empty((p, n))
    noi = np.empty((p, n))
    for mu in range(p):
        for i in range(n):
            sig[mu, i] = y[mu, i] * alpha[mu, i]
            acc = 0.0
            for nu in range(p):
                if nu == mu:
                    continue
                d2 = float(np.sum((pats[mu] - pats[nu]) ** 2))
                acc += alpha[nu, i] * np.exp(-gamma * d2)
            noi[mu, i] = y[mu, i] * acc
    return float(sig.mean()), float(noi.std())


@pytest.mark.parametrize("mode", ["auto", "sequence"])
def test_snr_matches_scalar_oracle(mode):
    pats, w, kernel = trained_net(n=8, p=3, seed=1, mode=mode, iterations=50)
    res = snr_analysis(pats, w)
    y = build_targets(pats, mode).y
    s_ref, sigma_ref = oracle_snr_terms(pats.data, w.alpha, kernel.gamma, y)
    assert res.signal_mean == pytest.approx(s_ref, rel=1e-10)
    assert res.noise_std == pytest.approx(sigma_ref, rel=1e-10)
    assert res.snr == pytest.approx(s_ref / sigma_ref, rel=1e-10)
    assert not res.undefined
    assert res.n_samples == 24


def test_snr_mode_override_changes_targets():
    pats, w, kernel = trained_net(n=8, p=3, seed=1, mode="auto", iterations=50)
    y_seq = build_targets(pats, "sequence").y
    s_ref, sigma_ref = oracle_snr_terms(pats.data, w.alpha, kernel.gamma, y_seq)
    res = snr_analysis(pats, w, mode="sequence")
    assert res.signal_mean == pytest.approx(s_ref, rel=1e-10)
    assert res.noise_std == pytest.approx(sigma_ref, rel=1e-10)


def test_snr_signal_plus_noise_reconstructs_field():
    pats, w, kernel = trained_net(n=12, p=4, seed=3, iterations=100)
    from kernel_hopfield import gram_matrix

    y = build_targets(pats, "auto").y
    gram = gram_matrix(pats, kernel)
    signal = y * w.alpha
    noise = y * (gram @ w.alpha - w.alpha)
    np.testing.assert_allclose(signal + noise, y * (gram @ w.alpha), rtol=1e-10, atol=1e-12)


def test_snr_single_pattern_undefined():
    pats, w, kernel = trained_net(n=10, p=1, seed=4, iterations=20)
    res = snr_analysis(pats, w)
    assert res.undefined
    assert res.noise_std == 0.0
    assert np.isnan(res.snr)


# ----------------------------------------------------- spectrum / d_eff / cover


def test_participation_ratio_exact_cases():
    assert participation_ratio(np.ones(7)) == 7.0
    assert participation_ratio(np.array([5.0, 0.0, 0.0])) == 1.0
    assert participation_ratio(np.array([2.0, 1.0, 1.0])) == 16.0 / 6.0
    lam = np.array([3.0, 2.0, 0.5])
    assert participation_ratio(3.7 * lam) == pytest.approx(participation_ratio(lam), rel=1e-12)
    with pytest.raises(ValueError):
        participation_ratio(np.zeros(3))


def test_eigen_spectrum_identity():
    res = eigen_spectrum(np.eye(5))
    np.testing.assert_array_equal(res.eigenvalues, np.ones(5))
    assert res.d_eff == 5.0
    assert res.cover_bound == 10.0


def test_eigen_spectrum_rank_one():
    res = eigen_spectrum(np.ones((3, 3)))
    np.testing.assert_allclose(res.eigenvalues, [3.0, 0.0, 0.0], atol=1e-12)
    assert res.d_eff == pytest.approx(1.0, rel=1e-12)
    assert np.all(res.eigenvalues >= 0.0)


def test_eigen_spectrum_real_gram_trace_and_bounds():
    from kernel_hopfield import gram_matrix

    pats = gen_random_patterns(50, 30, 0)
    gram = gram_matrix(pats, KernelConfig(0.02))
    res = eigen_spectrum(gram)
    assert res.eigenvalues.sum() == pytest.approx(np.trace(gram), abs=1e-9)
    assert 1.0 <= res.d_eff <= 30.0
    assert res.eigenvalues[0] >= res.eigenvalues[-1]


def test_eigen_spectrum_rejects_bad_input():
    with pytest.raises(ValueError):
        eigen_spectrum(np.array([[1.0, 0.5], [0.0, 1.0]]))  # not symmetric
    with pytest.raises(ValueError):
        eigen_spectrum(np.ones((2, 3)))
    with pytest.raises(ValueError):
        eigen_spectrum(-np.eye(3))  # negative beyond clamp tolerance


def test_cover_comparison_single_pattern():
    rows = cover_comparison(
        16, [1], KernelConfig(0.02), TrainingConfig(mode="sequence"), trials=2
    )
    assert rows[0]["P"] == 1
    assert rows[0]["d_eff"] == pytest.approx(1.0)
    assert rows[0]["cover_bound"] == pytest.approx(2.0)
    assert rows[0]["accuracy"] == 1.0


def test_cover_comparison_untrained_fails_but_reports_spectrum():
    rows = cover_comparison(
        30,
        [2, 4],
        KernelConfig(0.02),
        TrainingConfig(mode="sequence", iterations=0),
        trials=1,
    )
    assert [r["P"] for r in rows] == [2, 4]
    for r in rows:
        assert 1.0 <= r["d_eff"] <= r["P"]
        assert r["cover_bound"] == 2.0 * r["d_eff"]
        assert r["accuracy"] == 0.0


def test_cover_comparison_auto_mode_low_load():
    rows = cover_comparison(
        24,
        [2],
        KernelConfig(0.02),
        TrainingConfig(mode="auto"),
        trials=2,
        mode="auto",
        noise_fraction=0.1,
    )
    assert rows[0]["accuracy"] == 1.0


def test_cover_comparison_requires_ascending_grid():
    with pytest.raises(ValueError):
        cover_comparison(10, [4, 2], KernelConfig(0.02), TrainingConfig(), trials=1)
