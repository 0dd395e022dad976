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
#ifndef NUGAP_SIMILARITY_HPP
#define NUGAP_SIMILARITY_HPP

#include <cstddef>
#include <vector>

#include "nugap/lti.hpp"
#include "nugap/response.hpp"

namespace nugap {

/// Point on the radius-0.5 Riemann sphere tangent to the complex plane at the origin.
struct SpherePoint {
    double x = 0.0;
    double y = 0.0;
    double h = 0.0;

    double distance(const SpherePoint& other) const;
};

/// Stereographic projection from the north pole (0, 0, 1).
SpherePoint riemann_project(const ComplexResponse& z);

/// |z1 - z2| / (sqrt(1 + |z1|^2) sqrt(1 + |z2|^2)), always in [0, 1].
double chordal_distance(const ComplexResponse& z1, const ComplexResponse& z2);

struct GapSweep {
    double psi_max = 0.0;
    double omega_at_max = 0.0;
    std::vector<double> omega;
    std::vector<double> psi;
};

/// Chordal distance between the analytic responses of two models on a uniform grid.
/// The maximum is the worst-case distance over the band; ties go to the smaller frequency.
GapSweep gap_sweep(const StateSpaceModel& sys1, const StateSpaceModel& sys2, const FrequencyRange& range,
                   std::size_t grid_size);

/// Advisory check of max_w |conj(z1(w)) z2(w)| < 1 on a grid from 0 up to (excluding) Nyquist.
bool check_gap_condition(const StateSpaceModel& sys1, const StateSpaceModel& sys2, std::size_t grid_size);

} // namespace nugap

#endif // NUGAP_SIMILARITY_HPP
