"""Acceptance suite: one test per criterion, each printing a PASS line.

Criteria marked by runtime budgets; the heavy posterior experiments run
sequentially and fit comfortably inside theirs.  Tolerances are pinned
here, not configured.
"""

import collections
import math

import numpy as np

from supermix import (
    DiscreteMixingMeasure,
    KernelSpec,
    coefficients,
    convolve,
    finite_gaussian_mixture,
    gaussian_smoothing_error,
    interpolation_checks,
    kernel_grid,
    lp_norm,
    moment_match,
    nig_density,
    parse_kernel_id,
    sinc_approx_error,
    spectral_symbol_check,
    support_budget,
    transform_analytic,
    transform_sobolev,
)
from supermix.posterior import (
    contraction_experiment,
    wasserstein_recovery_experiment,
)
from supermix.priors import (
    NIGParams,
    lemma_verification_table,
    nig_marginal_cdf,
    nig_sample,
)

from conftest import random_gaussian_mixture


def report(cid: str, detail: str) -> None:
    print(f"ACCEPTANCE {cid}: PASS ({detail})")


def fit_slope(xs, ys):
    A = np.vstack([xs, np.ones(len(xs))]).T
    return np.linalg.lstsq(A, ys, rcond=None)[0][0]


def test_criterion_1_coefficients_and_identity():
    coef = coefficients(40)
    assert coef.d[2] == 0.5
    assert coef.c[4] == -0.25
    assert coef.d[4] == -0.125
    odd = np.arange(1, 41, 2)
    assert np.all(coef.c[odd] == 0.0) and np.all(coef.d[odd] == 0.0)
    dev = spectral_symbol_check(40, 0.5)
    assert dev <= 1e-10
    report("1", f"identity deviation {dev:.2e} at J=40")


def test_criterion_2_band_limited_invariance(fvp_truth):
    worst = 0.0
    for sigma in (1.0, 0.8, 0.5, 0.25):
        err = sinc_approx_error(fvp_truth.f, fvp_truth.smooth, sigma, math.inf)
        worst = max(worst, err)
    assert worst <= 1e-12
    report("2", f"max sup deviation {worst:.2e} over sigma <= 1")


def test_criterion_3_decay_slopes(gaussian_truth, cauchy_truth, phi1, cauchy1):
    sigmas = [0.5, 0.4, 0.3, 0.25, 0.2]

    errs = [sinc_approx_error(gaussian_truth.f, gaussian_truth.smooth, s, math.inf)
            for s in sigmas]
    slope_g = fit_slope([(gaussian_truth.smooth.rho / s) ** 2 for s in sigmas],
                        np.log(errs))
    assert -1.1 <= slope_g <= -0.85

    errs = [sinc_approx_error(cauchy_truth.f, cauchy_truth.smooth, s, math.inf)
            for s in sigmas]
    slope_c = fit_slope([cauchy_truth.smooth.rho / s for s in sigmas], np.log(errs))
    assert -1.1 <= slope_c <= -0.8

    errs = [gaussian_smoothing_error(transform_analytic(cauchy1, s), cauchy1)
            for s in sigmas]
    slope_t = fit_slope([1.0 / s for s in sigmas], np.log(errs))
    assert -1.1 <= slope_t <= -0.8

    sob_sigmas = [0.4, 0.3, 0.2, 0.15, 0.1]
    errs = [gaussian_smoothing_error(transform_sobolev(phi1, s, 2), phi1)
            for s in sob_sigmas]
    slope_s = fit_slope(np.log(sob_sigmas), np.log(errs))
    assert slope_s >= 2 - 0.75

    report("3", f"slopes: sinc-gauss {slope_g:.3f}, sinc-cauchy {slope_c:.3f}, "
                f"transform-cauchy {slope_t:.3f}, sobolev {slope_s:.3f}")


def test_criterion_4_moment_matching():
    mm = moment_match(np.array([1.0, 0.0, 1.0 / 3.0, 0.0]), 3, (-1, 1))
    assert np.abs(mm.atoms - np.array([-1.0, 1.0]) / math.sqrt(3)).max() <= 1e-10
    assert np.abs(mm.weights - 0.5).max() <= 1e-10

    atoms = np.linspace(-2, 2, 41)
    w = 1 + 0.5 * np.cos(3 * atoms)
    src = DiscreteMixingMeasure(atoms, w / w.sum())
    kernel = KernelSpec("gaussian")
    xs = np.linspace(-6, 6, 4001)
    sups = []
    for eps in (1e-3, 1e-4):
        budget = support_budget(eps, 2.0, 0.5, kernel)
        out = moment_match(src, budget.order, (-2, 2))
        f_in = src.mixture_density(kernel, 0.5, xs)
        f_out = out.mixture_density(kernel, 0.5, xs)
        sup = float(np.abs(f_in - f_out).max())
        assert sup <= eps / 0.5
        sups.append(sup)
    report("4", f"uniform rule exact; budget errors {sups[0]:.1e}, {sups[1]:.1e}")


def test_criterion_5_finite_gaussian_mixture(gaussian_truth):
    kls, m2s = [], []
    for sigma in (0.4, 0.3, 0.25):
        approx = finite_gaussian_mixture(gaussian_truth, sigma)
        cap = 4.0 * (approx.half_support / sigma) ** 2
        assert len(approx.mixing) <= cap
        kls.append(approx.kl)
        m2s.append(approx.second_log_moment)
    assert kls[-1] <= 1e-3 and m2s[-1] <= 1e-3
    assert np.all(np.diff(kls) < 0) and np.all(np.diff(m2s) < 0)
    report("5", f"KL ladder {kls[0]:.1e} > {kls[1]:.1e} > {kls[2]:.1e}")


def test_criterion_6_nig_law():
    rng = np.random.default_rng(314)
    n = 10 ** 6
    u = rng.random((n, 2))
    z1 = np.minimum(u[:, 0], u[:, 1])
    z2 = np.abs(u[:, 0] - u[:, 1])
    z = np.stack([z1, z2, 1.0 - z1 - z2], axis=1)
    vals = nig_density(z, NIGParams(np.array([1.0, 1.0, 1.0])))
    integral = float(vals.mean() * 0.5)
    assert abs(integral - 1.0) <= 0.02

    params = NIGParams(np.array([1.0, 1.0]))
    draws = nig_sample(params, rng, size=10 ** 6)
    zs = np.linspace(1e-9, 1 - 1e-9, 20001)
    cdf = nig_marginal_cdf(params, zs)
    emp = np.sort(draws[:, 0])
    dev = float(np.abs(
        np.interp(emp, zs, cdf) - np.arange(1, emp.size + 1) / emp.size
    ).max())
    assert dev <= 0.01
    report("6", f"simplex integral {integral:.4f}, sampler CDF deviation {dev:.4f}")


def test_criterion_7_prior_mass_bounds():
    rng = np.random.default_rng(2718)
    counts = {}
    for lemma in ("py-sticks", "py-locations", "nig"):
        _, rows = lemma_verification_table(lemma, 10 ** 6, rng)
        assert len(rows) >= 6, lemma
        violations = [r for r in rows if not r.holds]
        assert not violations, (lemma, violations)
        counts[lemma] = len(rows)
    report("7", "zero violations on grids of sizes "
                + ", ".join(f"{k}={v}" for k, v in counts.items()))


def test_criterion_8_inequality_suite(phi1):
    rng = np.random.default_rng(1618)
    grid = kernel_grid(parse_kernel_id("gaussian:1"), 40.0, 2 ** 13)

    # interpolation inequalities (moment bound, L1 vs sup, p vs max{1,2})
    for _ in range(200):
        f = random_gaussian_mixture(rng, grid)
        g = random_gaussian_mixture(rng, grid)
        rep = interpolation_checks(f, g, upsilon=0.6, u=1.0, p=1.5, t=2.0)
        assert rep.all_hold(tol=1e-9)

    # location perturbation: the bound is tight as the shift vanishes, so
    # the L1 distance is evaluated exactly (the translated Gaussians cross
    # at the midpoint: ||.||_1 = 2 (2 Phi(delta/(2 s)) - 1))
    from scipy.special import ndtr

    sup_k = 1.0 / math.sqrt(2 * math.pi)
    for _ in range(200):
        s = rng.uniform(0.3, 2.0)
        a, b = rng.uniform(-5, 5, 2)
        l1 = 2.0 * (2.0 * ndtr(abs(a - b) / (2 * s)) - 1.0)
        assert l1 <= 2 * sup_k * abs(a - b) / s + 1e-9

    # scale perturbation across three families
    for family, shape in (("gaussian", None), ("cauchy", None), ("stable", 1.5)):
        for _ in range(67):
            s1, s2 = rng.uniform(0.3, 2.5, 2)
            k1 = kernel_grid(KernelSpec(family, s1, shape), 40.0, 2 ** 13)
            k2 = kernel_grid(KernelSpec(family, s2, shape), 40.0, 2 ** 13)
            assert lp_norm(k1 - k2, 1) <= 2 * abs(s1 - s2) / min(s1, s2) + 1e-6

    # convolution floor for the monotone-profile Gaussian case
    from scipy.special import ndtri

    zeta = 0.9
    ell = math.exp(-0.5) / math.sqrt(2 * math.pi)
    c_zeta = zeta * ell * math.sqrt(2 * math.pi)
    tau = 2.0 / ndtri((1 + zeta) / 2)
    for s in (0.3, 0.6, 0.9, 1.2):
        assert s < tau
        conv = convolve(phi1, kernel_grid(KernelSpec("gaussian", s)))
        assert np.all(conv.values >= c_zeta * phi1.values - 1e-9)

    report("8", "200 trials per inequality, zero violations")


def _rows_as_strings(rows):
    return ["%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g"
            % (r.n, r.replicate, r.l1, r.l2, r.sup, r.w2, r.kl) for r in rows]


def test_criterion_9_contraction_experiment():
    rows = contraction_experiment(
        "gaussian:1", "dp", [250, 1000, 4000], 10, seed=0, threads=1
    )
    by_n = collections.defaultdict(list)
    for r in rows:
        by_n[r.n].append(r.l1)
    medians = [float(np.median(by_n[n])) for n in (250, 1000, 4000)]
    assert medians[0] > medians[1] > medians[2]
    assert medians[2] <= 0.6 * medians[0]

    # determinism: the n=250 block rerun with the same seed is byte-identical
    rerun = contraction_experiment("gaussian:1", "dp", [250], 10, seed=0, threads=1)
    assert _rows_as_strings(rerun) == _rows_as_strings(rows[:10])

    report("9", f"median L1 {medians[0]:.4f} > {medians[1]:.4f} > {medians[2]:.4f}, "
                f"ratio {medians[2] / medians[0]:.3f}")


def test_criterion_10_wasserstein_recovery():
    rows = wasserstein_recovery_experiment(
        "twopoint", [250, 1000, 4000], 10, seed=0, threads=1
    )
    by_n = collections.defaultdict(list)
    w2_max = 0.0
    for r in rows:
        by_n[r.n].append(r.w2_median)
        w2_max = max(w2_max, r.w2_max)
    med = {n: float(np.median(by_n[n])) for n in (250, 1000, 4000)}
    assert med[4000] < med[250]
    assert w2_max <= 8.0  # diam of the compact atom space [-4, 4]

    # single-atom truth concentrates near zero (calibrated: median 0.151
    # over 8 replicates at n = 4000)
    point = wasserstein_recovery_experiment("gaussian:1", [4000], 3, seed=2, threads=1)
    assert float(np.median([r.w2_median for r in point])) <= 0.2

    report("10", f"median W2 {med[250]:.3f} -> {med[1000]:.3f} -> {med[4000]:.3f}, "
                 f"max {w2_max:.3f} <= diam 8")
