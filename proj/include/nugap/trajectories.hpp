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
#ifndef NUGAP_TRAJECTORIES_HPP
#define NUGAP_TRAJECTORIES_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nugap/lti.hpp"
#include "nugap/response.hpp"

namespace nugap {

enum class TrajectoryKind { sum_of_sines, lissajous, waypoint_csv };

struct TrajectoryParams {
    double Ts = kSimSamplingTime;
    double duration_s = 18.0;
    /// Peak bound; component amplitudes sum to this value.
    double amplitude = 1.0;
    int n_components = 5;
    /// Raised-cosine fade-in length, 0 for none.
    double ramp_s = 0.0;
    /// waypoint_csv only.
    std::string csv_path;
};

/// amplitude * sin(omega t + phase)
struct Tone {
    double omega = 0.0;
    double amplitude = 0.0;
    double phase = 0.0;

    bool operator==(const Tone&) const = default;
};

struct Trajectory {
    std::string id;
    double Ts = kSimSamplingTime;
    std::vector<double> samples;
    /// Generating tones before the ramp; empty for waypoint files.
    std::vector<Tone> tones;

    bool operator==(const Trajectory&) const = default;
};

/**
 * Desired output sequences with content confined to `range`.
 *
 * Tone frequencies are snapped to whole cycles over the duration, so without a ramp the
 * spectrum has no leakage. waypoint_csv reads `t, y` rows, resamples with a natural cubic
 * spline and returns a single trajectory (count must be 1).
 */
std::vector<Trajectory> make_test_trajectories(TrajectoryKind kind, const TrajectoryParams& params,
                                               const FrequencyRange& range, std::size_t count, std::uint64_t seed);

/// 3 sum-of-sines and 2 Lissajous shapes, each at amplitudes 0.5, 1.0 and 1.5.
std::vector<Trajectory> default_trajectory_suite(const FrequencyRange& band, std::uint64_t seed,
                                                 double Ts = kSimSamplingTime, double duration_s = 18.0,
                                                 double ramp_s = 3.0);

/// Share of the signal energy in one-sided DFT bins strictly above omega.
double spectral_fraction_above(std::span<const double> samples, double Ts, double omega);

TrajectoryKind parse_trajectory_kind(const std::string& name);

} // namespace nugap

#endif // NUGAP_TRAJECTORIES_HPP
