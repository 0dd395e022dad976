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
#include "nugap/similarity.hpp"

#include <cmath>

#include <fmt/core.h>

#include "nugap/errors.hpp"

namespace nugap {

double SpherePoint::distance(const SpherePoint& other) const {
    return std::hypot(x - other.x, y - other.y, h - other.h);
}

SpherePoint riemann_project(const ComplexResponse& z) {
    const double r2 = z.re * z.re + z.im * z.im;
    const double scale = 1.0 / (1.0 + r2);
    // Keep h accurate when |z| is huge: r2 / (1 + r2) = 1 - scale.
    return {z.re * scale, z.im * scale, r2 > 1.0 ? 1.0 - scale : r2 * scale};
}

double chordal_distance(const ComplexResponse& z1, const ComplexResponse& z2) {
    const double diff = std::abs(z1.value() - z2.value());
    const double n1 = std::sqrt(1.0 + z1.re * z1.re + z1.im * z1.im);
    const double n2 = std::sqrt(1.0 + z2.re * z2.re + z2.im * z2.im);
    const double psi = diff / (n1 * n2);
    return psi > 1.0 ? 1.0 : psi;
}

GapSweep gap_sweep(const StateSpaceModel& sys1, const StateSpaceModel& sys2, const FrequencyRange& range,
                   std::size_t grid_size) {
    if (grid_size < 100) {
        throw ConfigError(fmt::format("gap sweep needs at least 100 grid points, got {}", grid_size));
    }
    GapSweep out;
    out.omega = range.grid(grid_size);
    out.psi.resize(grid_size);
    out.psi_max = -1.0;
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double w = out.omega[i];
        out.psi[i] = chordal_distance(frequency_response(sys1, w), frequency_response(sys2, w));
        if (out.psi[i] > out.psi_max) {
            out.psi_max = out.psi[i];
            out.omega_at_max = w;
        }
    }
    return out;
}

bool check_gap_condition(const StateSpaceModel& sys1, const StateSpaceModel& sys2, std::size_t grid_size) {
    if (sys1.Ts != sys2.Ts) {
        throw ConfigError("gap condition check needs a common sampling time");
    }
    if (grid_size < 2) {
        throw ConfigError("gap condition check needs at least two grid points");
    }
    const double nyquist = sys1.nyquist();
    double worst = 0.0;
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double w = nyquist * static_cast<double>(i) / static_cast<double>(grid_size);
        const auto z1 = frequency_response(sys1, w).value();
        const auto z2 = frequency_response(sys2, w).value();
        worst = std::max(worst, std::abs(std::conj(z1) * z2));
    }
    return worst < 1.0;
}

} // namespace nugap
