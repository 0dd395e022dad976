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
#ifndef NUGAP_FREQ_PROBE_HPP
#define NUGAP_FREQ_PROBE_HPP

#include <cstdint>
#include <vector>

#include "nugap/lti.hpp"
#include "nugap/response.hpp"

namespace nugap {

struct ProbeSettings {
    double amplitude = 1.0;
    int n_periods = 20;
    double settle_fraction = 0.5;
    double noise_std = 0.0;
};

/// Input/output record of one sinusoidal experiment.
struct ProbeRecord {
    double omega = 0.0;
    double amplitude = 1.0;
    double Ts = kSimSamplingTime;
    std::vector<double> input;
    std::vector<double> output;
    double settle_fraction = 0.5;

    bool operator==(const ProbeRecord&) const = default;
};

/// Drives y_r(k) = amplitude sin(w k Ts) through a fresh copy of the system for
/// ceil(n_periods 2 pi / (w Ts)) steps and adds seeded Gaussian output noise.
ProbeRecord run_probe(const ClosedLoopSystem& system, double omega, const ProbeSettings& settings,
                      std::uint64_t seed);

/**
 * Single-bin DFT estimate of z(w). After discarding the settling fraction, the
 * trailing whole number of periods is correlated with e^{-j w k Ts} for both
 * signals and the ratio output/input is returned.
 */
ComplexResponse estimate_response(const ProbeRecord& record);

} // namespace nugap

#endif // NUGAP_FREQ_PROBE_HPP
