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
#ifndef NUGAP_LTI_HPP
#define NUGAP_LTI_HPP

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "nugap/response.hpp"

namespace nugap {

inline constexpr double kSimSamplingTime = 0.015;

/**
 * Discrete-time SISO state-space model
 *
 *   x(k+1) = A x(k) + B u(k)
 *   y(k)   = C x(k) + D u(k)
 *
 * sampled every Ts seconds. A zero-order model (A empty) is a static gain D.
 */
struct StateSpaceModel {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;
    double Ts = kSimSamplingTime;

    StateSpaceModel(Eigen::MatrixXd A, Eigen::VectorXd B, Eigen::RowVectorXd C, double D, double Ts);

    Eigen::Index order() const { return A.rows(); }
    double nyquist() const;

    bool operator==(const StateSpaceModel& other) const;
};

/// Double-integrator-like plant parameterized by gain alpha and damping beta.
StateSpaceModel sim_plant(double alpha, double beta, double Ts = kSimSamplingTime);

/// u(k) = kp e(k) + kd (e(k) - e(k-1)) / Ts with e(-1) = 0.
struct PDController {
    double kp = 0.0;
    double kd = 0.0;
    double Ts = kSimSamplingTime;

    PDController(double kp, double kd, double Ts);
};

/// Augmented model from reference y_r to output y_a; the last state is e(k-1).
StateSpaceModel close_loop(const StateSpaceModel& plant, const PDController& controller);

/**
 * A plant under PD feedback, usable as a black box: feed references, read outputs.
 * Copies are independent experiments.
 */
class ClosedLoopSystem {
public:
    ClosedLoopSystem(StateSpaceModel plant, PDController controller);

    const StateSpaceModel& plant() const { return plant_; }
    const PDController& controller() const { return controller_; }
    const StateSpaceModel& model() const { return model_; }
    double Ts() const { return model_.Ts; }

    void reset();
    /// Returns y_a(k) for the applied y_r(k), then advances to k+1.
    double step(double reference);
    /// Output at the current step if y_r(k) = reference.
    double peek(double reference) const;

    const Eigen::VectorXd& state() const { return state_; }

private:
    StateSpaceModel plant_;
    PDController controller_;
    StateSpaceModel model_;
    Eigen::VectorXd state_;
};

std::vector<double> simulate(const StateSpaceModel& model, std::span<const double> reference,
                             const Eigen::VectorXd& x0);
std::vector<double> simulate(const StateSpaceModel& model, std::span<const double> reference);

/// C (zI - A)^{-1} B + D at z = e^{j w Ts}; requires 0 <= w < pi/Ts.
ComplexResponse frequency_response(const StateSpaceModel& model, double omega);

/// Coefficients in descending powers of z, both of length order()+1.
struct TransferFunction {
    std::vector<double> num;
    std::vector<double> den;
};

TransferFunction transfer_function(const StateSpaceModel& model);

/// Number of steps before the input reaches the output (0 when D != 0).
int relative_degree(const StateSpaceModel& model);

/// Roots of a polynomial given in descending powers, leading zeros trimmed.
std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs);

std::vector<std::complex<double>> poles(const StateSpaceModel& model);
std::vector<std::complex<double>> zeros(const StateSpaceModel& model);

/// Zeros strictly inside the unit circle, poles inside or on it.
bool check_minimum_phase(const StateSpaceModel& model);

} // namespace nugap

#endif // NUGAP_LTI_HPP
