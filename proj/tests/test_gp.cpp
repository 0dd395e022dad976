/*
 Copyright 2026 The nugap Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "nugap/errors.hpp"
#include "nugap/gp.hpp"

using namespace nugap;

namespace {

Eigen::MatrixXd random_inputs(std::mt19937_64& rng, int n, int d, double scale = 2.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) X(i, j) = u(rng);
    return X;
}

Eigen::VectorXd random_targets(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = g(rng);
    return y;
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Hyperparams& hp) {
    Eigen::MatrixXd K(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < B.rows(); ++j) K(i, j) = matern32(A.row(i).transpose(), B.row(j).transpose(), hp);
    return K;
}

// Draw targets from the GP prior itself.
Eigen::VectorXd sample_gp(std::mt19937_64& rng, const Eigen::MatrixXd& X, const Hyperparams& hp) {
    Eigen::MatrixXd K = gram(X, X, hp);
    K.diagonal().array() += hp.noise_variance + 1e-10;
    const Eigen::MatrixXd L = K.llt().matrixL();
    return L * random_targets(rng, static_cast<int>(X.rows()));
}

PriorMean linear_prior() {
    return [](const Eigen::VectorXd& x) { return 0.5 * x.sum() - 0.2; };
}

} // namespace

TEST_CASE("matern 3/2 values") {
    const Hyperparams hp{1.0, 1.0, 1e-6};
    Eigen::VectorXd a(1), b(1);
    a << 0.0;
    b << 1.0;
    CHECK(matern32(a, a, Hyperparams{2.5, 0.3, 1e-6}) == 2.5);
    CHECK(matern32(a, b, hp) == doctest::Approx((1 + std::sqrt(3.0)) * std::exp(-std::sqrt(3.0))).epsilon(1e-14));
    CHECK(matern32(a, b, hp) == doctest::Approx(0.48336).epsilon(1e-5));
    b << 30.01;
    CHECK(matern32(a, b, hp) < 1e-12);
    std::mt19937_64 rng(1);
    const auto X = random_inputs(rng, 20, 3);
    const Hyperparams h2{0.7, 0.8, 1e-3};
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const double k = matern32(X.row(i).transpose(), X.row(j).transpose(), h2);
            CHECK(k == matern32(X.row(j).transpose(), X.row(i).transpose(), h2));
            CHECK(k <= 0.7);
        }
}

TEST_CASE("hyperparameter validation") {
    CHECK_THROWS_AS(Hyperparams({0.0, 1.0, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS(Hyperparams({1.0, -1.0, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS(Hyperparams({1.0, 1.0, std::nan("")}).validate(), ConfigError);
    const auto b = HyperBounds::for_input_width(10.0);
    CHECK(b.lengthscale.first == doctest::Approx(1e-2));
    CHECK(b.lengthscale.second == doctest::Approx(100.0));
    CHECK(b.signal_variance == std::pair<double, double>{1e-4, 10.0});
    CHECK(b.noise_variance == std::pair<double, double>{1e-8, 1.0});
}

TEST_CASE("empty dataset falls back to the prior") {
    const Hyperparams hp{0.4, 1.0, 1e-3};
    const auto m = GPModel::fit(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0), linear_prior(), hp);
    Eigen::VectorXd x(2);
    x << 1.0, 3.0;
    const auto p = m.predict(x);
    CHECK(p.mean == linear_prior()(x));
    CHECK(p.variance == 0.4);
    CHECK_THROWS_AS(m.log_marginal_likelihood(), ConfigError);
}

TEST_CASE("duplicate inputs with different targets fit when noise is present") {
    Eigen::MatrixXd X(3, 1);
    X << 1.0, 1.0, 1.0;
    Eigen::VectorXd y(3);
    y << 0.0, 1.0, 2.0;
    const auto m = GPModel::fit(X, y, zero_mean(), {1.0, 1.0, 0.1});
    Eigen::VectorXd x(1);
    x << 1.0;
    CHECK(std::isfinite(m.predict(x).mean));
}

TEST_CASE("jitter rescues a singular covariance") {
    Eigen::MatrixXd X(4, 1);
    X << 0.5, 0.5, 0.5, 0.5;
    Eigen::VectorXd y(4);
    y << 1.0, 1.0, 1.0, 1.0;
    const auto m = GPModel::fit(X, y, zero_mean(), {1.0, 1.0, 1e-300});
    CHECK(m.jitter() >= 1e-9);
    CHECK(m.jitter() <= 1e-3);
}

TEST_CASE("non-finite training data is rejected") {
    Eigen::MatrixXd X(2, 1);
    X << 0.0, std::nan("");
    CHECK_THROWS_AS(GPModel::fit(X, Eigen::VectorXd::Ones(2), zero_mean(), {1.0, 1.0, 1e-2}), ConfigError);
    CHECK_THROWS_AS(GPModel::fit(X, Eigen::VectorXd::Ones(3), zero_mean(), {1.0, 1.0, 1e-2}), ConfigError);
}

TEST_CASE("one-point posterior is the closed form") {
    for (const Hyperparams hp : {Hyperparams{1.0, 1.0, 1.0}, Hyperparams{0.3, 2.0, 0.01}, Hyperparams{4.0, 0.1, 0.5}}) {
        Eigen::MatrixXd X(1, 2);
        X << 0.2, -0.4;
        Eigen::VectorXd y(1);
        y << 1.7;
        const auto m = GPModel::fit(X, y, zero_mean(), hp);
        const auto p = m.predict(X.row(0).transpose());
        const double s = hp.signal_variance, n = hp.noise_variance;
        CHECK(std::abs(p.mean - s / (s + n) * 1.7) < 1e-12);
        CHECK(std::abs(p.variance - (s - s * s / (s + n))) < 1e-12);
    }
    Eigen::MatrixXd X(1, 1);
    X << 0.0;
    Eigen::VectorXd y(1);
    y << 3.0;
    const auto p = GPModel::fit(X, y, zero_mean(), {1.0, 1.0, 1.0}).predict(X.row(0).transpose());
    CHECK(p.mean == doctest::Approx(1.5));
    CHECK(p.variance == doctest::Approx(0.5));
}

TEST_CASE("interpolation and prior reversion") {
    std::mt19937_64 rng(4);
    const auto X = random_inputs(rng, 8, 1);
    const auto y = random_targets(rng, 8);
    const Hyperparams hp{1.0, 0.5, 1e-9};
    const auto m = GPModel::fit(X, y, linear_prior(), hp);
    for (int i = 0; i < 8; ++i) CHECK(std::abs(m.predict(X.row(i).transpose()).mean - y(i)) < 1e-5);
    Eigen::VectorXd far(1);
    far << 2.0 + 31.0 * 0.5 + 1.0;
    const auto p = m.predict(far);
    CHECK(std::abs(p.mean - linear_prior()(far)) < 1e-8);
    CHECK(std::abs(p.variance - 1.0) < 1e-8);
}

TEST_CASE("cached factorisation agrees with a dense solve") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const auto X = random_inputs(rng, 5, 2);
        const auto y = random_targets(rng, 5);
        const Hyperparams hp{0.8, 0.9, 0.05};
        const auto m = GPModel::fit(X, y, linear_prior(), hp);
        Eigen::MatrixXd K = gram(X, X, hp);
        K.diagonal().array() += hp.noise_variance;
        const Eigen::MatrixXd Kinv = K.inverse();
        Eigen::VectorXd r(5);
        for (int i = 0; i < 5; ++i) r(i) = y(i) - linear_prior()(X.row(i).transpose());
        const auto T = random_inputs(rng, 6, 2);
        for (int t = 0; t < 6; ++t) {
            const Eigen::VectorXd x = T.row(t).transpose();
            const Eigen::VectorXd k = gram(X, T.row(t), hp).col(0);
            const double mean = linear_prior()(x) + k.dot(Kinv * r);
            const double var = hp.signal_variance - k.dot(Kinv * k);
            const auto p = m.predict(x);
            CHECK(std::abs(p.mean - mean) < 1e-10);
            CHECK(std::abs(p.variance - var) < 1e-10);
        }
    }
}

TEST_CASE("prior-mean shift is equivariant") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const auto X = random_inputs(rng, 12, 3);
        const auto y = random_targets(rng, 12);
        const double c = 10.0 * random_targets(rng, 1)(0);
        const Hyperparams hp{0.5, 1.2, 0.01};
        const auto base = GPModel::fit(X, y, linear_prior(), hp);
        const PriorMean shifted_prior = [c](const Eigen::VectorXd& x) { return linear_prior()(x) + c; };
        const auto shifted = GPModel::fit(X, (y.array() + c).matrix(), shifted_prior, hp);
        const auto T = random_inputs(rng, 10, 3);
        for (int t = 0; t < 10; ++t) {
            const auto a = base.predict(T.row(t).transpose());
            const auto b = shifted.predict(T.row(t).transpose());
            CHECK(std::abs(b.mean - a.mean - c) < 1e-10);
            CHECK(std::abs(b.variance - a.variance) < 1e-10);
        }
    }
}

TEST_CASE("posterior variance is bounded by the prior and shrinks with data") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        const auto X = random_inputs(rng, 15, 2);
        const auto y = random_targets(rng, 15);
        const Hyperparams hp{0.9, 0.7, 1e-4};
        const auto T = random_inputs(rng, 10, 2, 3.0);
        std::vector<double> previous(10, hp.signal_variance);
        for (int n = 1; n <= 15; ++n) {
            const auto m = GPModel::fit(X.topRows(n), y.head(n), zero_mean(), hp);
            for (int t = 0; t < 10; ++t) {
                const double v = m.predict(T.row(t).transpose()).variance;
                CHECK(v >= 0.0);
                CHECK(v <= hp.signal_variance + 1e-12);
                CHECK(v <= previous[static_cast<std::size_t>(t)] + 1e-8);
                previous[static_cast<std::size_t>(t)] = v;
            }
        }
    }
}

TEST_CASE("evidence values") {
    Eigen::MatrixXd X(1, 1);
    X << 0.3;
    const auto m = GPModel::fit(X, Eigen::VectorXd::Zero(1), zero_mean(), {1.0, 1.0, 1.0});
    CHECK(m.log_marginal_likelihood() == doctest::Approx(-0.5 * std::log(2.0) - 0.5 * std::log(2 * M_PI)).epsilon(1e-14));
    CHECK(m.log_marginal_likelihood() == doctest::Approx(-1.2655).epsilon(1e-4));
}

TEST_CASE("evidence is permutation invariant") {
    std::mt19937_64 rng(2);
    const auto X = random_inputs(rng, 20, 2);
    const auto y = random_targets(rng, 20);
    const Hyperparams hp{1.0, 0.6, 0.02};
    const double base = GPModel::fit(X, y, linear_prior(), hp).log_marginal_likelihood();
    std::vector<int> perm(20);
    std::iota(perm.begin(), perm.end(), 0);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(perm.begin(), perm.end(), rng);
        Eigen::MatrixXd Xp(20, 2);
        Eigen::VectorXd yp(20);
        for (int i = 0; i < 20; ++i) {
            Xp.row(i) = X.row(perm[static_cast<std::size_t>(i)]);
            yp(i) = y(perm[static_cast<std::size_t>(i)]);
        }
        CHECK(std::abs(GPModel::fit(Xp, yp, linear_prior(), hp).log_marginal_likelihood() - base) < 1e-10);
    }
}

TEST_CASE("evidence peaks near the true noise level") {
    std::mt19937_64 rng(77);
    const Hyperparams truth{1.0, 0.5, 0.01};
    const std::vector<double> levels{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
    std::vector<double> mean(levels.size(), 0.0);
    for (int d = 0; d < 100; ++d) {
        const auto X = random_inputs(rng, 40, 1, 3.0);
        const auto y = sample_gp(rng, X, truth);
        for (std::size_t i = 0; i < levels.size(); ++i)
            mean[i] += GPModel::fit(X, y, zero_mean(), {1.0, 0.5, levels[i]}).log_marginal_likelihood();
    }
    CHECK(mean[0] < mean[1]);
    CHECK(mean[1] < mean[2]);
    CHECK(mean[4] < mean[3]);
    CHECK(mean[3] < mean[2]);
}

TEST_CASE("evidence is smooth in log hyperparameters") {
    std::mt19937_64 rng(9);
    const auto X = random_inputs(rng, 15, 2);
    const auto y = random_targets(rng, 15);
    const std::array<double, 3> at{0.7, 0.9, 0.05};
    auto evidence = [&](std::array<double, 3> logs) {
        return GPModel::fit(X, y, zero_mean(), {std::exp(logs[0]), std::exp(logs[1]), std::exp(logs[2])})
            .log_marginal_likelihood();
    };
    for (std::size_t i = 0; i < 3; ++i) {
        auto central = [&](double h) {
            std::array<double, 3> up{std::log(at[0]), std::log(at[1]), std::log(at[2])};
            auto down = up;
            up[i] += h;
            down[i] -= h;
            return (evidence(up) - evidence(down)) / (2 * h);
        };
        const double d1 = central(1e-3);
        const double d2 = central(5e-4);
        const double d3 = central(2.5e-4);
        // Central differences converge at second order: successive gaps shrink about fourfold.
        CHECK(std::abs(d1 - d2) <= 1e-6 * std::max(1.0, std::abs(d1)));
        const double ratio = std::abs(d1 - d2) / std::max(std::abs(d2 - d3), 1e-14);
        CHECK((ratio > 2.0 || std::abs(d1 - d2) < 1e-9));
    }
}

TEST_CASE("hyperparameter search recovers the lengthscale") {
    std::mt19937_64 rng(123);
    const Hyperparams truth{1.0, 0.5, 0.01};
    std::vector<double> recovered;
    int within = 0;
    for (int d = 0; d < 20; ++d) {
        const auto X = random_inputs(rng, 50, 1, 2.5);
        const auto y = sample_gp(rng, X, truth);
        HyperSearch s;
        s.seed = static_cast<std::uint64_t>(d);
        const auto hp = optimize_hyperparameters(X, y, zero_mean(), HyperBounds{}, s);
        recovered.push_back(hp.lengthscale);
        if (hp.lengthscale >= 0.25 && hp.lengthscale <= 1.0) ++within;
    }
    std::sort(recovered.begin(), recovered.end());
    const double median = 0.5 * (recovered[9] + recovered[10]);
    CHECK(median >= 0.25);
    CHECK(median <= 1.0);
    CHECK(within >= 16);
}

TEST_CASE("hyperparameter search is deterministic, bounded and never worse than its start") {
    std::mt19937_64 rng(5);
    const auto X = random_inputs(rng, 25, 1);
    const auto y = sample_gp(rng, X, {0.5, 0.8, 0.02});
    HyperSearch s;
    s.n_restarts = 1;
    s.seed = 99;
    const HyperBounds b{};
    const auto a = optimize_hyperparameters(X, y, zero_mean(), b, s);
    CHECK(a == optimize_hyperparameters(X, y, zero_mean(), b, s));
    CHECK(a.signal_variance >= b.signal_variance.first);
    CHECK(a.signal_variance <= b.signal_variance.second);
    CHECK(a.lengthscale >= b.lengthscale.first);
    CHECK(a.lengthscale <= b.lengthscale.second);

    const Hyperparams start{0.05, 3.0, 0.3};
    s.initial = start;
    const auto warm = optimize_hyperparameters(X, y, zero_mean(), b, s);
    CHECK(GPModel::fit(X, y, zero_mean(), warm).log_marginal_likelihood() >=
          GPModel::fit(X, y, zero_mean(), start).log_marginal_likelihood());
}

TEST_CASE("collapsed bounds return the point") {
    std::mt19937_64 rng(6);
    const auto X = random_inputs(rng, 10, 1);
    const auto y = random_targets(rng, 10);
    const HyperBounds b{{0.3, 0.3}, {0.7, 0.7}, {0.01, 0.01}};
    const auto hp = optimize_hyperparameters(X, y, zero_mean(), b, {});
    CHECK(hp == Hyperparams{0.3, 0.7, 0.01});
    CHECK_THROWS_AS(optimize_hyperparameters(X.topRows(1), y.head(1), zero_mean(), b, {}), ConfigError);
    CHECK_THROWS_AS(HyperBounds({{1.0, 0.5}, {0.1, 1}, {0.1, 1}}).validate(), ConfigError);
}
