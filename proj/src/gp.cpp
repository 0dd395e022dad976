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
#include "nugap/gp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include "nelder_mead.hpp"
#include "nugap/errors.hpp"

namespace nugap {

namespace {

const double kSqrt3 = std::sqrt(3.0);

double matern32_from_distance(double r, const Hyperparams& hp) {
    const double s = kSqrt3 * r / hp.lengthscale;
    return hp.signal_variance * (1.0 + s) * std::exp(-s);
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            R(i, j) = R(j, i) = (X.row(i) - X.row(j)).norm();
        }
    }
    return R;
}

struct Factorization {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
};

// Jitter schedule: none, then 1e-9 s_f^2 doubling while it stays within 1e-3 s_f^2.
std::optional<Factorization> factorize(const Eigen::MatrixXd& R, const Hyperparams& hp) {
    const Eigen::Index n = R.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = hp.signal_variance + hp.noise_variance;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            K(i, j) = K(j, i) = matern32_from_distance(R(i, j), hp);
        }
    }
    Factorization f;
    f.llt.compute(K);
    if (f.llt.info() == Eigen::Success) {
        return f;
    }
    const double cap = 1e-3 * hp.signal_variance;
    for (double jitter = 1e-9 * hp.signal_variance; jitter <= cap * (1.0 + 1e-12); jitter *= 2.0) {
        f.llt.compute(K + jitter * Eigen::MatrixXd::Identity(n, n));
        if (f.llt.info() == Eigen::Success) {
            f.jitter = jitter;
            return f;
        }
    }
    return std::nullopt;
}

double evidence(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& residual) {
    const Eigen::VectorXd weights = llt.solve(residual);
    const auto n = static_cast<double>(residual.size());
    const double log_det_half = llt.matrixLLT().diagonal().array().log().sum();
    return -0.5 * residual.dot(weights) - log_det_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

} // namespace

void Hyperparams::validate() const {
    const auto ok = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!ok(signal_variance) || !ok(lengthscale) || !ok(noise_variance)) {
        throw ConfigError(fmt::format("hyperparameters must be positive and finite (signal {}, lengthscale {}, "
                                      "noise {})",
                                      signal_variance, lengthscale, noise_variance));
    }
}

HyperBounds HyperBounds::for_input_width(double width) {
    HyperBounds b;
    b.lengthscale = {1e-3 * width, 10.0 * width};
    return b;
}

void HyperBounds::validate() const {
    for (const auto& [lo, hi] : {signal_variance, lengthscale, noise_variance}) {
        if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
            throw ConfigError(fmt::format("invalid hyperparameter bounds [{}, {}]", lo, hi));
        }
    }
}

Hyperparams HyperBounds::clamp(const Hyperparams& hp) const {
    return {std::clamp(hp.signal_variance, signal_variance.first, signal_variance.second),
            std::clamp(hp.lengthscale, lengthscale.first, lengthscale.second),
            std::clamp(hp.noise_variance, noise_variance.first, noise_variance.second)};
}

double matern32(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, const Hyperparams& hp) {
    return matern32_from_distance((x1 - x2).norm(), hp);
}

PriorMean zero_mean() {
    return [](const Eigen::VectorXd&) { return 0.0; };
}

GPModel GPModel::fit(Eigen::MatrixXd inputs, Eigen::VectorXd targets, PriorMean prior, const Hyperparams& hp) {
    hp.validate();
    if (inputs.rows() != targets.size()) {
        throw ConfigError(fmt::format("GP fit: {} inputs but {} targets", inputs.rows(), targets.size()));
    }
    if (!inputs.allFinite() || !targets.allFinite()) {
        throw ConfigError("GP fit: non-finite training data");
    }
    if (!prior) {
        prior = zero_mean();
    }
    GPModel model;
    model.hp_ = hp;
    model.prior_ = std::move(prior);
    model.inputs_ = std::move(inputs);
    model.targets_ = std::move(targets);
    const Eigen::Index n = model.targets_.size();
    model.residual_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        model.residual_(i) = model.targets_(i) - model.prior_(model.inputs_.row(i).transpose());
    }
    if (n == 0) {
        model.weights_.resize(0);
        return model;
    }
    auto f = factorize(pairwise_distances(model.inputs_), hp);
    if (!f) {
        throw NumericalError(fmt::format("GP fit: covariance of {} points is ill-conditioned even with jitter {}",
                                         n, 1e-3 * hp.signal_variance));
    }
    model.llt_ = std::move(f->llt);
    model.jitter_ = f->jitter;
    model.weights_ = model.llt_.solve(model.residual_);
    return model;
}

Prediction GPModel::predict(const Eigen::VectorXd& x) const {
    const double prior_value = prior_(x);
    const Eigen::Index n = size();
    if (n == 0) {
        return {prior_value, hp_.signal_variance};
    }
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i) = matern32_from_distance((inputs_.row(i).transpose() - x).norm(), hp_);
    }
    const Eigen::VectorXd v = llt_.matrixL().solve(k);
    double variance = hp_.signal_variance - v.squaredNorm();
    if (variance < -1e-8) {
        spdlog::debug("GP posterior variance {} clamped to 0", variance);
    }
    variance = std::clamp(variance, 0.0, hp_.signal_variance);
    return {prior_value + k.dot(weights_), variance};
}

double GPModel::log_marginal_likelihood() const {
    if (size() == 0) {
        throw ConfigError("log marginal likelihood needs at least one data point");
    }
    return evidence(llt_, residual_);
}

Hyperparams optimize_hyperparameters(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                     const PriorMean& prior, const HyperBounds& bounds, const HyperSearch& search) {
    bounds.validate();
    if (inputs.rows() != targets.size()) {
        throw ConfigError("hyperparameter search: inputs and targets differ in length");
    }
    if (targets.size() < 2) {
        throw ConfigError("hyperparameter search needs at least two data points");
    }
    const PriorMean mean = prior ? prior : zero_mean();
    Eigen::VectorXd residual(targets.size());
    for (Eigen::Index i = 0; i < targets.size(); ++i) {
        residual(i) = targets(i) - mean(inputs.row(i).transpose());
    }
    const Eigen::MatrixXd R = pairwise_distances(inputs);

    const std::array<std::pair<double, double>, 3> box{bounds.signal_variance, bounds.lengthscale,
                                                       bounds.noise_variance};
    std::vector<int> free;
    for (int i = 0; i < 3; ++i) {
        if (box[static_cast<std::size_t>(i)].second > box[static_cast<std::size_t>(i)].first) {
            free.push_back(i);
        }
    }
    auto assemble = [&](const Eigen::VectorXd& z) {
        std::array<double, 3> v{box[0].first, box[1].first, box[2].first};
        for (std::size_t j = 0; j < free.size(); ++j) {
            v[static_cast<std::size_t>(free[j])] = std::exp(z(static_cast<Eigen::Index>(j)));
        }
        return bounds.clamp(Hyperparams{v[0], v[1], v[2]});
    };
    auto negative_evidence = [&](const Eigen::VectorXd& z) {
        const auto f = factorize(R, assemble(z));
        if (!f) {
            return std::numeric_limits<double>::infinity();
        }
        const double e = evidence(f->llt, residual);
        return std::isfinite(e) ? -e : std::numeric_limits<double>::infinity();
    };

    if (free.empty()) {
        const Hyperparams fixed = assemble(Eigen::VectorXd{});
        if (!std::isfinite(negative_evidence(Eigen::VectorXd{}))) {
            throw NumericalError("hyperparameter search: the only admissible point fails to factorize");
        }
        return fixed;
    }

    const auto dims = static_cast<Eigen::Index>(free.size());
    Eigen::VectorXd lo(dims);
    Eigen::VectorXd hi(dims);
    for (Eigen::Index j = 0; j < dims; ++j) {
        lo(j) = std::log(box[static_cast<std::size_t>(free[static_cast<std::size_t>(j)])].first);
        hi(j) = std::log(box[static_cast<std::size_t>(free[static_cast<std::size_t>(j)])].second);
    }

    std::mt19937_64 rng(search.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int restarts = std::max(1, search.n_restarts);
    double best_value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best;
    for (int r = 0; r < restarts; ++r) {
        Eigen::VectorXd start(dims);
        if (r == 0 && search.initial) {
            const Hyperparams init = bounds.clamp(*search.initial);
            const std::array<double, 3> v{init.signal_variance, init.lengthscale, init.noise_variance};
            for (Eigen::Index j = 0; j < dims; ++j) {
                start(j) = std::log(v[static_cast<std::size_t>(free[static_cast<std::size_t>(j)])]);
            }
        } else {
            for (Eigen::Index j = 0; j < dims; ++j) {
                start(j) = lo(j) + (hi(j) - lo(j)) * unit(rng);
            }
        }
        const auto result = detail::nelder_mead(negative_evidence, start, lo, hi, search.max_evaluations);
        if (result.value < best_value) {
            best_value = result.value;
            best = result.x;
        }
    }
    if (!std::isfinite(best_value)) {
        throw NumericalError("hyperparameter search: every restart failed to factorize");
    }
    return assemble(best);
}

} // namespace nugap
