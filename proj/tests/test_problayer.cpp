#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "labdx/graph.hpp"
#include "labdx/prob.hpp"

using namespace labdx;

TEST_CASE("kl closed-form fixtures") {
    DiagGaussian std1{{0.0}, {1.0}};
    CHECK(kl_diag(std1, std1) == Catch::Approx(0.0).margin(1e-9));

    DiagGaussian q1{{1.0}, {1.0}};
    CHECK(kl_diag(q1, std1) == Catch::Approx(0.5).margin(1e-9));

    DiagGaussian q2{{0.0}, {2.0}};
    // 0.5*(4 - 1 - ln 4)
    CHECK(kl_diag(q2, std1) == Catch::Approx(0.80685).margin(1e-5));
}

TEST_CASE("kl rejects dimension mismatch") {
    DiagGaussian q{{0.0, 0.0}, {1.0, 1.0}};
    DiagGaussian p{{0.0}, {1.0}};
    CHECK_THROWS_AS(kl_diag(q, p), NumericError);
}

TEST_CASE("kl is non-negative on random gaussian pairs") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> usig(0.1, 3.0);
    for (int it = 0; it < 10000; ++it) {
        DiagGaussian q, p;
        const std::size_t d = 1 + it % 5;
        for (std::size_t k = 0; k < d; ++k) {
            q.mu.push_back(n01(rng));
            q.sigma.push_back(usig(rng));
            p.mu.push_back(n01(rng));
            p.sigma.push_back(usig(rng));
        }
        CHECK(kl_diag(q, p) >= -1e-12);
    }
}

TEST_CASE("reparameterize degenerate sigma gives z = mu") {
    DiagGaussian g{{1.5, -2.0}, {0.0, 0.0}};
    std::mt19937_64 rng(9);
    LatentSample s = reparameterize(g, rng);
    CHECK(s.z[0] == 1.5);
    CHECK(s.z[1] == -2.0);
}

TEST_CASE("reparameterize is deterministic under a fixed seed") {
    DiagGaussian g{{0.0, 0.0, 0.0}, {1.0, 2.0, 3.0}};
    std::mt19937_64 r1(123), r2(123);
    LatentSample a = reparameterize(g, r1);
    LatentSample b = reparameterize(g, r2);
    CHECK(a.z == b.z);
    CHECK(a.noise == b.noise);
    // and z = mu + sigma * noise exactly
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(a.z[k] == g.mu[k] + g.sigma[k] * a.noise[k]);
    }
}

TEST_CASE("reparameterize monte-carlo moments") {
    DiagGaussian g{{0.0}, {1.0}};
    std::mt19937_64 rng(2024);
    double sum = 0.0, sumsq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        LatentSample s = reparameterize(g, rng);
        sum += s.z[0];
        sumsq += s.z[0] * s.z[0];
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sumsq / n - mean * mean);
    CHECK(std::abs(mean) < 0.02);
    CHECK(sd > 0.99);
    CHECK(sd < 1.01);
}

TEST_CASE("masked loglik single observed standard normal at the mean") {
    DiagGaussian g{{0.0}, {1.0}};
    CHECK(masked_gaussian_loglik({0.0}, {1}, g) ==
          Catch::Approx(-0.91894).margin(1e-5));
}

TEST_CASE("masked loglik with everything masked is exactly zero") {
    DiagGaussian g{{1.0, -1.0}, {0.5, 2.0}};
    CHECK(masked_gaussian_loglik({3.0, 4.0}, {0, 0}, g) == 0.0);
}

TEST_CASE("masked loglik ignores masked coordinates bit-exactly") {
    DiagGaussian g{{0.3, -0.7, 1.1}, {1.0, 0.5, 2.0}};
    const double a = masked_gaussian_loglik({1.0, 99.0, -2.0}, {1, 0, 1}, g);
    const double b = masked_gaussian_loglik({1.0, -1e9, -2.0}, {1, 0, 1}, g);
    CHECK(a == b);
}

TEST_CASE("masked loglik mu-gradient matches finite differences") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> usig(0.2, 2.0);
    for (int it = 0; it < 20; ++it) {
        const std::size_t d = 4;
        std::vector<double> x(d), mu(d), ls(d);
        BoolVec mask(d);
        for (std::size_t k = 0; k < d; ++k) {
            x[k] = n01(rng);
            mu[k] = n01(rng);
            ls[k] = std::log(usig(rng));
            mask[k] = (rng() % 2) ? 1 : 0;
        }
        Tape tp;
        int mu_n = tp.leaf(mu);
        int ls_n = tp.leaf(ls);
        int ll = tp.masked_gauss_loglik(x, mask, mu_n, ls_n);
        tp.backward(ll);
        const double h = 1e-6;
        for (std::size_t k = 0; k < d; ++k) {
            auto eval = [&](double delta) {
                DiagGaussian g;
                g.mu = mu;
                g.mu[k] += delta;
                g.sigma.resize(d);
                for (std::size_t j = 0; j < d; ++j) g.sigma[j] = std::exp(ls[j]);
                return masked_gaussian_loglik(x, mask, g);
            };
            const double fd = (eval(h) - eval(-h)) / (2.0 * h);
            CHECK(std::abs(tp.grad(mu_n)[k] - fd) < 1e-6);
        }
    }
}

TEST_CASE("cross entropy fixtures") {
    CHECK(cross_entropy({1.0, 0.0}, 0) == Catch::Approx(0.0).margin(1e-12));
    std::vector<double> uniform50(50, 1.0 / 50.0);
    CHECK(cross_entropy(uniform50, 7) == Catch::Approx(std::log(50.0)).margin(1e-9));
    CHECK(cross_entropy({0.5, 0.5}, 1) == Catch::Approx(std::log(2.0)).margin(1e-9));
}

TEST_CASE("cross entropy floors the probability and validates the label") {
    CHECK(cross_entropy({0.0, 1.0}, 0) == Catch::Approx(-std::log(1e-12)));
    CHECK_THROWS_AS(cross_entropy({0.5, 0.5}, 2), NumericError);
    CHECK_THROWS_AS(cross_entropy({0.5, 0.5}, -1), NumericError);
}

TEST_CASE("log sigma clamp bounds") {
    CHECK(clamp_log_sigma(-100.0) == kLogSigmaMin);
    CHECK(clamp_log_sigma(100.0) == kLogSigmaMax);
    CHECK(clamp_log_sigma(0.25) == 0.25);
}

TEST_CASE("tape kl matches the eager closed form and its gradients check out") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> n01(0.0, 1.0);
    const std::size_t d = 3;
    std::vector<double> qmu(d), qls(d), pmu(d), pls(d);
    for (std::size_t k = 0; k < d; ++k) {
        qmu[k] = n01(rng);
        qls[k] = 0.3 * n01(rng);
        pmu[k] = n01(rng);
        pls[k] = 0.3 * n01(rng);
    }
    Tape tp;
    int qm = tp.leaf(qmu), ql = tp.leaf(qls), pm = tp.leaf(pmu), pl = tp.leaf(pls);
    int kl = tp.kl_diag(qm, ql, pm, pl);

    DiagGaussian q, p;
    q.mu = qmu;
    p.mu = pmu;
    for (std::size_t k = 0; k < d; ++k) {
        q.sigma.push_back(std::exp(qls[k]));
        p.sigma.push_back(std::exp(pls[k]));
    }
    CHECK(tp.val(kl)[0] == Catch::Approx(kl_diag(q, p)).margin(1e-12));

    tp.backward(kl);
    auto fd_check = [&](std::vector<double>& vec, const std::vector<double>& grad) {
        const double h = 1e-6;
        for (std::size_t k = 0; k < d; ++k) {
            auto eval = [&]() {
                DiagGaussian qq, pp;
                qq.mu = qmu;
                pp.mu = pmu;
                for (std::size_t j = 0; j < d; ++j) {
                    qq.sigma.push_back(std::exp(qls[j]));
                    pp.sigma.push_back(std::exp(pls[j]));
                }
                return kl_diag(qq, pp);
            };
            const double orig = vec[k];
            vec[k] = orig + h;
            const double fp = eval();
            vec[k] = orig - h;
            const double fm = eval();
            vec[k] = orig;
            CHECK(std::abs(grad[k] - (fp - fm) / (2.0 * h)) < 1e-6);
        }
    };
    fd_check(qmu, tp.grad(qm));
    fd_check(qls, tp.grad(ql));
    fd_check(pmu, tp.grad(pm));
    fd_check(pls, tp.grad(pl));
}

TEST_CASE("tape reparam gradient of z w.r.t. mu is the identity") {
    Tape tp;
    int mu = tp.leaf({0.5, -0.5});
    int ls = tp.leaf({0.0, 0.7});
    int z = tp.reparam(mu, ls, {1.0, -2.0});
    // back-propagate d(z[0])/d(inputs)
    int z0 = tp.slice(z, 0, 1);
    tp.backward(z0);
    CHECK(tp.grad(mu)[0] == 1.0);
    CHECK(tp.grad(mu)[1] == 0.0);
}
