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
#ifndef NUGAP_TESTS_SUPPORT_HPP
#define NUGAP_TESTS_SUPPORT_HPP

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nugap/bo_select.hpp"
#include "nugap/lti.hpp"

namespace nugap::testing {

inline PDController bank_pd() { return PDController(5.0, 4.5, kSimSamplingTime); }

inline NamedSystem bank_target() { return {"T", ClosedLoopSystem(sim_plant(0.85, 0.003), bank_pd())}; }

inline std::vector<NamedSystem> bank_sources() {
    return {{"S1", ClosedLoopSystem(sim_plant(1.0, 0.003), bank_pd())},
            {"S2", ClosedLoopSystem(sim_plant(0.97, 0.004), bank_pd())},
            {"S3", ClosedLoopSystem(sim_plant(0.9, 0.001), bank_pd())}};
}

/// Least-squares fit of a + b sin(w t) + c cos(w t) over samples [first, end).
/// Returns b + jc, which is A e^{j theta} for y = A sin(w t + theta).
inline std::complex<double> sine_fit(std::span<const double> y, double omega, double Ts, std::size_t first) {
    const auto n = static_cast<Eigen::Index>(y.size() - first);
    Eigen::MatrixXd M(n, 3);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(first + static_cast<std::size_t>(i)) * Ts;
        M(i, 0) = 1.0;
        M(i, 1) = std::sin(omega * t);
        M(i, 2) = std::cos(omega * t);
        v(i) = y[first + static_cast<std::size_t>(i)];
    }
    const Eigen::Vector3d c = M.colPivHouseholderQr().solve(v);
    return {c(1), c(2)};
}

inline double wrap(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

} // namespace nugap::testing

#endif // NUGAP_TESTS_SUPPORT_HPP
