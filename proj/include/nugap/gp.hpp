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
#ifndef NUGAP_GP_HPP
#define NUGAP_GP_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

namespace nugap {

struct Hyperparams {
    double signal_variance = 1.0;
    double lengthscale = 1.0;
    double noise_variance = 1e-6;

    void validate() const;
    bool operator==(const Hyperparams&) const = default;
};

/// Box constraints for the hyperparameter search, as [lo, hi] per field.
struct HyperBounds {
    std::pair<double, double> signal_variance{1e-4, 10.0};
    std::pair<double, double> lengthscale{1e-3, 10.0};
    std::pair<double, double> noise_variance{1e-8, 1.0};

    /// Defaults with the lengthscale box scaled to the width of the input domain.
    static HyperBounds for_input_width(double width);
    void validate() const;
    Hyperparams clamp(const Hyperparams& hp) const;
};

/// Matern 3/2: s2 (1 + sqrt(3) r / l) exp(-sqrt(3) r / l).
double matern32(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, const Hyperparams& hp);

using PriorMean = std::function<double(const Eigen::VectorXd&)>;

PriorMean zero_mean();

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

/**
 * GP posterior with a deterministic prior-mean function:
 *
 *   mean(x)     = m(x) + k(x)^T (K + s_n^2 I)^{-1} (y - m(X))
 *   variance(x) = k(x, x) - k(x)^T (K + s_n^2 I)^{-1} k(x)
 *
 * Inputs are stored one per row. Immutable once fitted.
 */
class GPModel {
public:
    static GPModel fit(Eigen::MatrixXd inputs, Eigen::VectorXd targets, PriorMean prior, const Hyperparams& hp);

    Prediction predict(const Eigen::VectorXd& x) const;
    double log_marginal_likelihood() const;

    Eigen::Index size() const { return targets_.size(); }
    Eigen::Index dim() const { return inputs_.cols(); }
    const Eigen::MatrixXd& inputs() const { return inputs_; }
    const Eigen::VectorXd& targets() const { return targets_; }
    const Hyperparams& hyperparams() const { return hp_; }
    const PriorMean& prior() const { return prior_; }
    /// Diagonal jitter that was needed on top of the noise variance.
    double jitter() const { return jitter_; }

private:
    GPModel() = default;

    Eigen::MatrixXd inputs_;
    Eigen::VectorXd targets_;
    Eigen::VectorXd residual_;
    PriorMean prior_;
    Hyperparams hp_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd weights_;
    double jitter_ = 0.0;
};

struct HyperSearch {
    int n_restarts = 3;
    std::uint64_t seed = 0;
    int max_evaluations = 200;
    /// Optional warm start, counted as the first restart.
    std::optional<Hyperparams> initial;
};

/// Derivative-free maximization of the log evidence in log-hyperparameter space.
Hyperparams optimize_hyperparameters(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                     const PriorMean& prior, const HyperBounds& bounds, const HyperSearch& search);

} // namespace nugap

#endif // NUGAP_GP_HPP
