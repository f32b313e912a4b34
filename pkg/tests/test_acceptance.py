"""
End-to-end acceptance checks, one test per criterion.

Each test prints ``criterion N: PASS`` or ``criterion N: FAIL`` (or ``SKIP``
when external data is missing). Run directly with ``python
tests/test_acceptance.py`` or through pytest.
"""

import contextlib
import os
import sys
import time

import numpy as np
import pytest
from scipy import integrate, stats
from sklearn.metrics import adjusted_rand_score

sys.path.insert(0, os.path.dirname(__file__))

from msgh import (  # noqa: E402
    EmConfig,
    GhParams,
    GigParams,
    MixtureModel,
    MsghParams,
    TildeParams,
    canonicalize,
    chi_bounds,
    chi_q,
    bessel_k,
    e_step,
    fit_mixture,
    fit_msnig,
    fit_nig_baseline,
    gh_log_density,
    gh_mean,
    gh_sample,
    gig_log_pdf,
    gig_moment,
    gig_sample,
    marginal_pdf,
    msgh_cov,
    msgh_log_density,
    msgh_mean,
    msgh_sample,
    msnig_log_density,
    rotation_2d,
    update_gamma,
    update_location_skew,
    update_orientation,
    update_shape,
)
from msgh.em import orientation_objective  # noqa: E402
from msgh.io import load_model, read_csv, save_model  # noqa: E402
from helpers import cov_z, mean_z  # noqa: E402
from oracles import (  # noqa: E402
    GigCdfOracle,
    best_angle,
    gig_moment_quad,
    integrate_2d,
    log_bessel_k_quad,
    minimize_quadratic,
)


@pytest.fixture
def criterion(capsys):
    """Context manager factory that reports the outcome of one criterion."""

    @contextlib.contextmanager
    def report(n):
        try:
            yield
        except pytest.skip.Exception as exc:
            with capsys.disabled():
                print(f"\ncriterion {n}: SKIP ({exc.msg})")
            raise
        except BaseException:
            with capsys.disabled():
                print(f"\ncriterion {n}: FAIL")
            raise
        with capsys.disabled():
            print(f"\ncriterion {n}: PASS")

    return report


def random_msnig(rng, M):
    Q, _ = np.linalg.qr(rng.standard_normal((M, M)))
    A = rng.uniform(0.3, 3, M)
    A = A / np.exp(np.mean(np.log(A)))
    return MsghParams(mu=rng.normal(0, 2, M), D=Q, A=A, beta=rng.normal(0, 1, M),
                      gamma=rng.uniform(2, 4.5, M), delta=rng.uniform(0.4, 2))


SKEWED_2D = [
    dict(beta=[2, 2], gamma=[1, 1]),
    dict(beta=[0, 5], gamma=[2, 2]),
    dict(beta=[0, -5], gamma=[2, 2]),
    dict(beta=[0, -5], gamma=[2, 10]),
]


def test_criterion_1_bessel_accuracy(criterion):
    with criterion(1):
        rng = np.random.default_rng(2024)
        orders = rng.uniform(-30, 30, 1000)
        xs = np.exp(rng.uniform(np.log(1e-6), np.log(700), 1000))
        start = time.perf_counter()
        values = bessel_k(orders, xs)
        ref = np.array([log_bessel_k_quad(r, x) for r, x in zip(orders, xs)])
        elapsed = time.perf_counter() - start
        rel = np.abs(np.expm1(np.log(values) - ref))
        assert np.max(rel) <= 1e-10, np.max(rel)
        assert elapsed < 30


def test_criterion_2_gig(criterion):
    with criterion(2):
        rng = np.random.default_rng(11)
        params = [GigParams(rng.uniform(-3, 3), rng.uniform(0.2, 4), rng.uniform(0.2, 4))
                  for _ in range(20)]
        for k, p in enumerate(params):
            mass = integrate.quad(lambda x: np.exp(gig_log_pdf(np.exp(x), p) + x), -60, 60,
                                  epsabs=0, epsrel=1e-12, limit=500, points=[0.0])[0]
            assert abs(mass - 1) <= 1e-8
            for r in (1, 2, -1, 0.5):
                ref = gig_moment_quad(r, p.lam, p.gamma, p.delta)
                assert abs(gig_moment(r, p) / ref - 1) <= 1e-8
            oracle = GigCdfOracle(p.lam, p.gamma, p.delta)
            w = np.sort(gig_sample(p, 100_000, 100 + k))
            F = oracle.cdf(w)
            n = w.size
            ks = max(np.max(np.arange(1, n + 1) / n - F), np.max(F - np.arange(n) / n))
            assert ks < 0.006, (p, ks)


def test_criterion_3_normalisation(criterion):
    with criterion(3):
        start = time.perf_counter()
        rng = np.random.default_rng(5)
        ms = [MsghParams.from_angle([0, 0], np.pi / 4, [1.5, 2 / 3], delta=1.0, **kw) for kw in SKEWED_2D]
        ms.append(random_msnig(rng, 2))
        for p in ms:
            val, status = integrate_2d(lambda x: np.exp(msgh_log_density(x, p)), msgh_mean(p))
            assert status == "converged" and abs(val - 1) < 1e-4, val
        S = np.array([[1.0, 0.5], [0.5, 1.0]])
        nig = [
            GhParams([0, 0], np.eye(2), [1, 0], 1.0, 1.0),
            GhParams([0, 0], S, [0, 0], 1.0, 1.0),
            GhParams([1, -1], [[2.0, 0.3], [0.3, 0.5]], [0.5, -0.7], 1.5, 0.6),
            GhParams([0, 0], S, [2, 2], 2.0, 2.0),
            GhParams([0, 0], [[1.0, -0.4], [-0.4, 1.0]], [0, -3], 4.0, 0.5),
        ]
        for g in nig:
            val, status = integrate_2d(lambda x: np.exp(gh_log_density(x, g)), gh_mean(g))
            assert status == "converged" and abs(val - 1) < 1e-4, val
        assert time.perf_counter() - start < 60


def test_criterion_4_identifiability(criterion):
    with criterion(4):
        rng = np.random.default_rng(8)
        gx, gy = np.meshgrid(np.linspace(-4, 4, 10), np.linspace(-3, 5, 10))
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        p = MsghParams.from_angle([0.5, 1], 0.7, [2.0, 0.5], [1, -0.5], [1.5, 3.0], 0.8)
        k = np.array([2.0, 0.4])
        q = p.replace(A=k**2 * p.A, gamma=k * p.gamma, delta=p.delta / k)
        assert np.max(np.abs(msgh_log_density(pts, p) - msgh_log_density(pts, q))) <= 1e-10
        g = GhParams([0, 1], [[1.0, 0.3], [0.3, 2.0]], [0.4, -1], 1.5, 0.6)
        g2 = GhParams(g.mu, 4 * g.Sigma, g.beta, 2 * g.gamma, g.delta / 2)
        assert np.max(np.abs(gh_log_density(pts, g) - gh_log_density(pts, g2))) <= 1e-10
        for _ in range(5):
            Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
            r = MsghParams(mu=rng.normal(size=3), D=Q, A=rng.uniform(0.2, 5, 3),
                           beta=rng.normal(size=3), gamma=rng.uniform(0.5, 3, 3),
                           delta=rng.uniform(0.2, 3, 3))
            c = canonicalize(r)
            assert np.ndim(c.delta) == 0
            assert abs(np.prod(c.A) - 1) <= 4 * np.finfo(float).eps
            y = rng.normal(size=(100, 3))
            assert np.max(np.abs(msgh_log_density(y, c) - msgh_log_density(y, r))) <= 1e-10


def test_criterion_5_moments(criterion):
    with criterion(5):
        rng = np.random.default_rng(21)
        sets = [random_msnig(rng, M) for M in (1, 2, 2, 3, 3, 3)]
        sets += [random_msnig(rng, 2).replace(lam=lam) for lam in (1.0, -1.5)]
        sets += [random_msnig(rng, 2).replace(beta=np.zeros(2)), random_msnig(rng, 3).replace(D=np.eye(3))]
        for k, p in enumerate(sets):
            x = msgh_sample(p, 200_000, 300 + k)
            assert np.all(np.abs(mean_z(x, msgh_mean(p))) < 4), k
            assert np.all(np.abs(cov_z(x, msgh_cov(p))) < 4), k


def _gauss_bin_probabilities(density, xe, ye):
    """Bin masses by 3x3 Gauss-Legendre quadrature per cell."""
    g, w = np.polynomial.legendre.leggauss(3)
    hx, hy = np.diff(xe)[0], np.diff(ye)[0]
    cx = (xe[:-1] + xe[1:]) / 2
    cy = (ye[:-1] + ye[1:]) / 2
    px = (cx[:, None] + 0.5 * hx * g[None, :]).ravel()
    py = (cy[:, None] + 0.5 * hy * g[None, :]).ravel()
    PX, PY = np.meshgrid(px, py, indexing="ij")
    vals = density(np.column_stack([PX.ravel(), PY.ravel()])).reshape(cx.size, 3, cy.size, 3)
    return np.einsum("iajb,a,b->ij", vals, w, w) * hx * hy / 4


def test_criterion_6_marginals(criterion):
    with criterion(6):
        p = MsghParams(mu=[0.5, -1], D=np.eye(2), A=[1, 1], beta=[0.7, -0.2], gamma=[1.5, 2.0], delta=0.8)
        ys = np.linspace(-5, 6, 45)
        one = MsghParams([0.5], [[1.0]], [1.0], [0.7], [1.5], 0.8)
        assert np.max(np.abs(marginal_pdf(p, [0], ys) - np.exp(msgh_log_density(ys, one)))) <= 1e-6

        S = np.full((3, 3), 0.5)
        np.fill_diagonal(S, 1.0)
        A, D = np.linalg.eigh(S)
        p3 = MsghParams(mu=np.zeros(3), D=D, A=A, beta=[-6, 2, 2], gamma=[3, 3, 3], delta=3.0)
        n = 1_000_000
        X = msgh_sample(p3, n, 4)[:, :2]
        m, sd = msgh_mean(p3)[:2], np.sqrt(np.diag(msgh_cov(p3))[:2])
        xe = np.linspace(m[0] - 2.5 * sd[0], m[0] + 2.5 * sd[0], 13)
        ye = np.linspace(m[1] - 2.5 * sd[1], m[1] + 2.5 * sd[1], 13)
        counts, _, _ = np.histogram2d(X[:, 0], X[:, 1], bins=[xe, ye])
        prob = _gauss_bin_probabilities(lambda y: marginal_pdf(p3, [0, 1], y), xe, ye)
        z = (counts / n - prob) / np.sqrt(prob * (1 - prob) / n)
        # Bonferroni over 144 cells
        assert np.max(np.abs(z)) < stats.norm.isf(0.001 / (2 * z.size)), np.max(np.abs(z))


def _small_instance(seed, N, M):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((M, M)))
    X = rng.standard_t(4, size=(N, M)) @ np.diag(rng.uniform(0.5, 2, M)) + rng.normal(0, 1, M)
    tilde = TildeParams(X.mean(0) + rng.normal(0, 0.2, M), Q, rng.uniform(0.5, 2, M),
                        rng.normal(0, 0.3, M), rng.uniform(0.5, 2, M))
    return X, tilde, e_step(X, tilde)


def _expected_negloglik(X, st_, mu, D, A, bt):
    u = (X - mu) @ D
    b = D.T @ bt
    return 0.5 * float(np.sum((st_.t * u * u - 2 * u * b + st_.s * b * b) / A + np.log(A)))


def test_criterion_7_em_correctness(criterion):
    with criterion(7):
        cfg = EmConfig(restarts=1, max_iter=300, tol=1e-10)
        for seed in range(20):
            rng = np.random.default_rng(seed)
            p1 = random_msnig(rng, 2)
            p2 = random_msnig(rng, 2).replace(mu=p1.mu + rng.normal(0, 6, 2))
            X1 = msgh_sample(p1, 300, seed)
            X2, _ = MixtureModel([0.5, 0.5], [p1, p2]).sample(400, seed)
            for rep in (fit_msnig(X1, cfg), fit_mixture(X2, 2, cfg), fit_nig_baseline(X1, 1, cfg)):
                assert np.all(np.diff(rep.loglik_trace) >= -1e-8), seed

        for seed in range(3):
            for M, N in ((2, 20), (3, 30)):
                X, tl, st_ = _small_instance(seed, N, M)
                mu, bt, _ = update_location_skew(X, st_, tl.D)
                obj = lambda v: _expected_negloglik(X, st_, v[:M], tl.D, tl.A_tilde, v[M:])
                ref = minimize_quadratic(obj, np.concatenate([tl.mu, tl.beta_tilde]))
                assert np.max(np.abs(np.concatenate([mu, bt]) - ref)) <= 1e-6

                A = update_shape(X, st_, tl.D, tl.mu, tl.beta_tilde)
                obj = lambda la: _expected_negloglik(X, st_, tl.mu, tl.D, np.exp(la), tl.beta_tilde)
                ref = np.exp(minimize_quadratic(obj, np.zeros(M)))
                assert np.max(np.abs(A / ref - 1)) <= 1e-6

                obj = lambda g: -float(np.sum(g * N - 0.5 * g**2 * st_.s.sum(0)))
                ref = minimize_quadratic(obj, np.ones(M))
                assert np.max(np.abs(update_gamma(st_) / ref - 1)) <= 1e-6

        for seed in range(5):
            X, tl, st_ = _small_instance(seed, 30, 2)
            args = (X, st_, tl.mu, tl.beta_tilde, tl.A_tilde)
            D = update_orientation(*args, np.eye(2))
            _, f_grid = best_angle(lambda th: orientation_objective(rotation_2d(th), *args))
            assert orientation_objective(D, *args) <= f_grid + 1e-3


def test_criterion_8_recovery(criterion):
    with criterion(8):
        p1 = MsghParams.from_angle([0, 0], np.pi / 4, [1.5, 2 / 3], [1, -1], [1, 3], 1.0)
        p2 = MsghParams.from_angle([8, 4], np.pi / 6, [2, 0.5], [0, 1], [4, 0.8], 1.0)
        truth = MixtureModel([0.4, 0.6], [p1, p2])
        X, labels = truth.sample(5000, 0)
        start = time.perf_counter()
        rep = fit_mixture(X, 2, EmConfig(restarts=2, seed=0))
        elapsed = time.perf_counter() - start
        assert adjusted_rand_score(labels, rep.labels) >= 0.9
        assert rep.loglik >= truth.loglik(X) - 1.0
        assert elapsed < 120, elapsed


# Published single-component fits on the Co/U petroleum data and K = 2 fits
# on the CD4/ZAP70 lymphoma data.
PETROLEUM = {
    "msnig": dict(loglik=207.6, mu=[0.96, 0.35], gamma=[8.17, 14.69], delta=0.28),
    "nig": dict(loglik=168.4, mu=[0.99, 0.46], gamma=8.77, delta=0.33),
}
LYMPHOMA = {"msnig": -23_545.0, "nig": -23_842.0}


def _within(value, target, frac=0.05):
    value, target = np.sort(np.atleast_1d(value)), np.sort(np.atleast_1d(target))
    return np.all(np.abs(value - target) <= frac * np.abs(target))


def test_criterion_9_published_fits(criterion):
    with criterion(9):
        pet = os.environ.get("MSGH_PETROLEUM_CSV")
        lym = os.environ.get("MSGH_LYMPHOMA_CSV")
        if not (pet and lym):
            pytest.skip("set MSGH_PETROLEUM_CSV and MSGH_LYMPHOMA_CSV to run")
        cfg = EmConfig(seed=0)
        X = read_csv(pet, os.environ.get("MSGH_PETROLEUM_COLS", "Co,U").split(",")).X
        ms = fit_msnig(X, cfg)
        ng = fit_nig_baseline(X, 1, cfg)
        ref = PETROLEUM
        assert abs(ms.loglik - ref["msnig"]["loglik"]) <= 0.5
        assert abs(ng.loglik - ref["nig"]["loglik"]) <= 0.5
        c, g = ms.model.components[0], ng.model.components[0]
        for fitted, target in ((c, ref["msnig"]), (g, ref["nig"])):
            assert _within(fitted.gamma, target["gamma"])
            assert _within(fitted.delta, target["delta"])
            assert np.all(np.abs(fitted.mu - target["mu"]) <= 0.05 * np.abs(target["mu"]))
        Y = read_csv(lym, os.environ.get("MSGH_LYMPHOMA_COLS", "CD4,ZAP70").split(",")).X
        ms2 = fit_mixture(Y, 2, cfg)
        ng2 = fit_nig_baseline(Y, 2, cfg)
        assert abs(ms2.loglik - LYMPHOMA["msnig"]) <= 30
        assert abs(ng2.loglik - LYMPHOMA["nig"]) <= 30
        assert ms.loglik > ng.loglik and ms2.loglik > ng2.loglik


def test_criterion_10_tail_dependence(criterion):
    with criterion(10):
        n = 100_000
        q = np.linspace(0.9, 0.99, 10)
        S = np.array([[1.0, 0.5], [0.5, 1.0]])
        rng = np.random.default_rng(0)
        vals, vecs = np.linalg.eigh(S)
        samples = {
            "t": stats.multivariate_t(np.zeros(2), S, df=1).rvs(n, random_state=rng),
            "msnig": msgh_sample(MsghParams(np.zeros(2), vecs, vals, np.zeros(2), [1, 1], 1.0), n, 1),
            "nig": gh_sample(GhParams(np.zeros(2), S, np.zeros(2), 1.0, 1.0), n, 2),
            "gauss": rng.multivariate_normal(np.zeros(2), S, n),
        }
        mean_chi = {k: np.mean(chi_q(x[:, 0], x[:, 1], q, n_boot=0).chi_hat)
                    for k, x in samples.items()}
        assert mean_chi["t"] > mean_chi["msnig"] > mean_chi["nig"] > mean_chi["gauss"], mean_chi

        qq = np.linspace(0.55, 0.95, 9)
        x = rng.normal(size=n)
        co = chi_q(x, x, qq, n_boot=0)
        assert np.max(np.abs(co.chi_hat - 1)) <= 0.02
        ind = chi_q(rng.random(n), rng.random(n), qq, n_boot=0)
        assert np.max(np.abs(ind.chi_hat)) <= 0.02
        lo = chi_bounds(qq)[0]
        anti = chi_q(x, -x, qq, n_boot=0)
        assert np.max(np.abs(anti.chi_hat - lo)) <= 0.02
        assert abs(chi_bounds(0.75)[0] - (2 - np.log(0.5) / np.log(0.75))) <= 1e-15
        assert chi_bounds(0.5)[0] == -np.inf and abs(chi_bounds(1 - 1e-12)[0]) <= 0.02


def test_criterion_11_determinism_and_persistence(criterion, tmp_path):
    with criterion(11):
        p = MsghParams.from_angle([0, 0], np.pi / 4, [1.5, 2 / 3], [1, -1], [1, 3], 1.0)
        X = msgh_sample(p, 1000, 3)
        cfg = EmConfig(restarts=3, max_iter=500, seed=9)
        files = []
        for name in ("a.json", "b.json"):
            rep = fit_mixture(X, 1, cfg)
            path = tmp_path / name
            save_model(path, rep.model, {"loglik": rep.loglik, "config": cfg.as_dict()})
            files.append(path)
        assert files[0].read_bytes() == files[1].read_bytes()
        model, meta = load_model(files[0])
        assert abs(model.loglik(X) - meta["loglik"]) <= 1e-10
        assert abs(float(np.sum(msnig_log_density(X, model.components[0]))) - rep.loglik) <= 1e-10


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
