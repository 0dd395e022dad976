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
#include "nugap/lti.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include <fmt/core.h>

#include "nugap/errors.hpp"

namespace nugap {

namespace {

void require_sampling_time(double Ts) {
    if (!(Ts > 0.0) || !std::isfinite(Ts)) {
        throw ConfigError(fmt::format("sampling time must be positive, got {}", Ts));
    }
}

// Faddeev-LeVerrier; coefficients of det(zI - M) in descending powers.
std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& M) {
    const Eigen::Index n = M.rows();
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    c[0] = 1.0;
    Eigen::MatrixXd Mk = Eigen::MatrixXd::Zero(n, n);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        Mk = M * Mk + c[static_cast<std::size_t>(k - 1)] * I;
        c[static_cast<std::size_t>(k)] = -(M * Mk).trace() / static_cast<double>(k);
    }
    return c;
}

} // namespace

std::optional<int> first_markov_index(const StateSpaceModel& model);

StateSpaceModel::StateSpaceModel(Eigen::MatrixXd A_, Eigen::VectorXd B_, Eigen::RowVectorXd C_, double D_,
                                 double Ts_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(D_), Ts(Ts_) {
    require_sampling_time(Ts);
    if (A.rows() != A.cols()) {
        throw ConfigError(fmt::format("A must be square, got {}x{}", A.rows(), A.cols()));
    }
    if (B.size() != A.rows() || C.size() != A.rows()) {
        throw ConfigError(fmt::format("inconsistent dimensions: A {}x{}, B {}, C {}", A.rows(), A.cols(),
                                      B.size(), C.size()));
    }
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !std::isfinite(D)) {
        throw ConfigError("state-space matrices must be finite");
    }
}

double StateSpaceModel::nyquist() const { return std::numbers::pi / Ts; }

bool StateSpaceModel::operator==(const StateSpaceModel& other) const {
    return A.rows() == other.A.rows() && A == other.A && B == other.B && C == other.C && D == other.D &&
           Ts == other.Ts;
}

StateSpaceModel sim_plant(double alpha, double beta, double Ts) {
    Eigen::MatrixXd A(2, 2);
    A << 1.0, Ts - beta, 0.0, 1.0 - beta;
    Eigen::VectorXd B(2);
    B << 0.5 * Ts * Ts, Ts;
    B *= alpha;
    Eigen::RowVectorXd C(2);
    C << 1.0, 0.0;
    return {A, B, C, 0.0, Ts};
}

PDController::PDController(double kp_, double kd_, double Ts_) : kp(kp_), kd(kd_), Ts(Ts_) {
    require_sampling_time(Ts);
    if (!std::isfinite(kp) || !std::isfinite(kd)) {
        throw ConfigError("PD gains must be finite");
    }
}

StateSpaceModel close_loop(const StateSpaceModel& plant, const PDController& controller) {
    if (plant.Ts != controller.Ts) {
        throw ConfigError(fmt::format("plant Ts {} does not match controller Ts {}", plant.Ts, controller.Ts));
    }
    // u = g e(k) - c e(k-1); a plant feedthrough D closes an algebraic loop through s.
    const double g = controller.kp + controller.kd / controller.Ts;
    const double c = controller.kd / controller.Ts;
    const double loop = 1.0 + plant.D * g;
    if (std::abs(loop) < 1e-12) {
        throw ConfigError("feedback loop is algebraically singular (1 + D*(kp + kd/Ts) = 0)");
    }
    const double s = 1.0 / loop;

    const Eigen::Index n = plant.order();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n + 1);
    A.topLeftCorner(n, n) = plant.A - g * s * plant.B * plant.C;
    A.topRightCorner(n, 1) = -c * s * plant.B;
    A.bottomLeftCorner(1, n) = -s * plant.C;
    A(n, n) = s * plant.D * c;

    Eigen::VectorXd B(n + 1);
    B.head(n) = g * s * plant.B;
    B(n) = s;

    Eigen::RowVectorXd C(n + 1);
    C.head(n) = s * plant.C;
    C(n) = -s * plant.D * c;

    return {A, B, C, s * plant.D * g, plant.Ts};
}

ClosedLoopSystem::ClosedLoopSystem(StateSpaceModel plant, PDController controller)
    : plant_(std::move(plant)),
      controller_(controller),
      model_(close_loop(plant_, controller_)),
      state_(Eigen::VectorXd::Zero(model_.order())) {}

void ClosedLoopSystem::reset() { state_.setZero(); }

double ClosedLoopSystem::peek(double reference) const { return model_.C.dot(state_) + model_.D * reference; }

double ClosedLoopSystem::step(double reference) {
    const double y = peek(reference);
    state_ = model_.A * state_ + model_.B * reference;
    return y;
}

std::vector<double> simulate(const StateSpaceModel& model, std::span<const double> reference,
                             const Eigen::VectorXd& x0) {
    if (reference.empty()) {
        throw ConfigError("simulate: empty reference");
    }
    if (x0.size() != model.order()) {
        throw ConfigError(fmt::format("simulate: x0 has {} entries, model order is {}", x0.size(), model.order()));
    }
    std::vector<double> y(reference.size());
    Eigen::VectorXd x = x0;
    for (std::size_t k = 0; k < reference.size(); ++k) {
        y[k] = model.C.dot(x) + model.D * reference[k];
        x = model.A * x + model.B * reference[k];
    }
    return y;
}

std::vector<double> simulate(const StateSpaceModel& model, std::span<const double> reference) {
    return simulate(model, reference, Eigen::VectorXd::Zero(model.order()));
}

ComplexResponse frequency_response(const StateSpaceModel& model, double omega) {
    if (!(omega >= 0.0) || !(omega < model.nyquist())) {
        throw ConfigError(fmt::format("frequency {} rad/s outside [0, pi/Ts = {})", omega, model.nyquist()));
    }
    const Eigen::Index n = model.order();
    if (n == 0) {
        return {model.D, 0.0};
    }
    const std::complex<double> z = std::polar(1.0, omega * model.Ts);
    const Eigen::MatrixXcd M = z * Eigen::MatrixXcd::Identity(n, n) - model.A.cast<std::complex<double>>();
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    if (!(lu.rcond() > 1e-13)) {
        throw SingularityError(fmt::format("frequency response is singular at {} rad/s (pole on the unit circle)",
                                           omega),
                               omega);
    }
    const Eigen::VectorXcd x = lu.solve(model.B.cast<std::complex<double>>());
    const std::complex<double> value = (model.C.cast<std::complex<double>>() * x)(0) + model.D;
    const auto out = ComplexResponse::from(value);
    if (!out.finite()) {
        throw SingularityError(fmt::format("non-finite frequency response at {} rad/s", omega), omega);
    }
    return out;
}

TransferFunction transfer_function(const StateSpaceModel& model) {
    TransferFunction tf;
    tf.den = characteristic_polynomial(model.A);
    const std::vector<double> closed = characteristic_polynomial(model.A - model.B * model.C);
    tf.num.resize(tf.den.size());
    for (std::size_t i = 0; i < tf.den.size(); ++i) {
        tf.num[i] = closed[i] - tf.den[i] + model.D * tf.den[i];
    }
    // The leading coefficient cancels exactly unless D is present; so do the
    // coefficients below the relative degree.
    if (model.D == 0.0) {
        const int rho = first_markov_index(model).value_or(static_cast<int>(tf.num.size()));
        for (int i = 0; i < rho && i < static_cast<int>(tf.num.size()); ++i) {
            tf.num[static_cast<std::size_t>(i)] = 0.0;
        }
    }
    return tf;
}

std::optional<int> first_markov_index(const StateSpaceModel& model) {
    if (model.D != 0.0) {
        return 0;
    }
    const double scale = model.C.norm() * model.B.norm();
    const double growth = std::max(1.0, model.A.norm());
    Eigen::VectorXd v = model.B;
    double bound = scale;
    for (Eigen::Index k = 1; k <= model.order(); ++k) {
        if (std::abs(model.C.dot(v)) > 1e-12 * bound) {
            return static_cast<int>(k);
        }
        v = model.A * v;
        bound *= growth;
    }
    return std::nullopt;
}

int relative_degree(const StateSpaceModel& model) {
    if (const auto rho = first_markov_index(model)) {
        return *rho;
    }
    throw NumericalError("transfer function is identically zero");
}

std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs) {
    double largest = 0.0;
    for (double c : coeffs) {
        largest = std::max(largest, std::abs(c));
    }
    std::size_t first = 0;
    while (first < coeffs.size() && std::abs(coeffs[first]) <= 1e-14 * largest) {
        ++first;
    }
    if (first == coeffs.size()) {
        throw NumericalError("polynomial is identically zero");
    }
    const std::size_t degree = coeffs.size() - first - 1;
    if (degree == 0) {
        return {};
    }
    const auto deg = static_cast<Eigen::Index>(degree);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (Eigen::Index j = 0; j < deg; ++j) {
        companion(0, j) = -coeffs[first + 1 + static_cast<std::size_t>(j)] / coeffs[first];
    }
    companion.bottomLeftCorner(deg - 1, deg - 1).setIdentity();
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    std::vector<std::complex<double>> roots(degree);
    for (Eigen::Index i = 0; i < deg; ++i) {
        roots[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    }
    return roots;
}

std::vector<std::complex<double>> poles(const StateSpaceModel& model) {
    return polynomial_roots(transfer_function(model).den);
}

std::vector<std::complex<double>> zeros(const StateSpaceModel& model) {
    return polynomial_roots(transfer_function(model).num);
}

bool check_minimum_phase(const StateSpaceModel& model) {
    const TransferFunction tf = transfer_function(model);
    const auto zs = polynomial_roots(tf.num);
    const auto ps = polynomial_roots(tf.den);
    const bool zeros_inside = std::all_of(zs.begin(), zs.end(), [](auto z) { return std::abs(z) < 1.0; });
    const bool poles_ok = std::all_of(ps.begin(), ps.end(), [](auto p) { return std::abs(p) <= 1.0 + 1e-9; });
    return zeros_inside && poles_ok;
}

} // namespace nugap
