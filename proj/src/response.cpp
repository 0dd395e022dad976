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
#include "nugap/response.hpp"

#include <cmath>
#include <numbers>

#include "nugap/errors.hpp"

namespace nugap {

double ComplexResponse::phase() const {
    const double theta = std::atan2(im, re);
    return theta <= -std::numbers::pi ? std::numbers::pi : theta;
}

bool ComplexResponse::finite() const { return std::isfinite(re) && std::isfinite(im); }

FrequencyRange::FrequencyRange(double omega_min, double omega_max) : min_(omega_min), max_(omega_max) {
    if (!(omega_min >= 0.0) || !(omega_max > omega_min) || !std::isfinite(omega_max)) {
        throw ConfigError("frequency range requires 0 <= omega_min < omega_max");
    }
}

double FrequencyRange::grid_point(std::size_t i, std::size_t n) const {
    if (i + 1 == n) {
        return max_;
    }
    return min_ + width() * static_cast<double>(i) / static_cast<double>(n - 1);
}

std::vector<double> FrequencyRange::grid(std::size_t n) const {
    if (n < 2) {
        throw ConfigError("frequency grid needs at least two points");
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = grid_point(i, n);
    }
    return out;
}

} // namespace nugap
