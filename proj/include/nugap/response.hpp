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
#ifndef NUGAP_RESPONSE_HPP
#define NUGAP_RESPONSE_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace nugap {

/// Complex gain z(w) = A e^{j theta} of a linear system at one frequency.
struct ComplexResponse {
    double re = 0.0;
    double im = 0.0;

    static ComplexResponse from(std::complex<double> z) { return {z.real(), z.imag()}; }
    static ComplexResponse polar(double magnitude, double phase) {
        return from(std::polar(magnitude, phase));
    }

    std::complex<double> value() const { return {re, im}; }
    double magnitude() const { return std::abs(value()); }
    /// Phase in (-pi, pi].
    double phase() const;
    bool finite() const;
};

/// Closed operating band [omega_min, omega_max] in rad/s.
class FrequencyRange {
public:
    FrequencyRange(double omega_min, double omega_max);

    double min() const { return min_; }
    double max() const { return max_; }
    double width() const { return max_ - min_; }
    bool contains(double omega) const { return omega >= min_ && omega <= max_; }

    /// Uniform grid of n >= 2 points including both endpoints.
    std::vector<double> grid(std::size_t n) const;
    double grid_point(std::size_t i, std::size_t n) const;

private:
    double min_;
    double max_;
};

} // namespace nugap

#endif // NUGAP_RESPONSE_HPP
