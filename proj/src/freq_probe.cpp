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
#include "nugap/freq_probe.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <fmt/core.h>

#include "nugap/errors.hpp"

namespace nugap {

ProbeRecord run_probe(const ClosedLoopSystem& system, double omega, const ProbeSettings& settings,
                      std::uint64_t seed) {
    const double Ts = system.Ts();
    if (!(omega > 0.0) || !(omega * Ts < std::numbers::pi)) {
        throw ConfigError(fmt::format("probe frequency {} rad/s outside (0, pi/Ts)", omega));
    }
    if (settings.n_periods < 8) {
        throw ConfigError(fmt::format("probe needs at least 8 periods, got {}", settings.n_periods));
    }
    if (!(settings.amplitude > 0.0)) {
        throw ConfigError("probe amplitude must be positive");
    }
    if (!(settings.settle_fraction >= 0.0 && settings.settle_fraction < 1.0)) {
        throw ConfigError("settle_fraction must lie in [0, 1)");
    }
    if (!(settings.noise_std >= 0.0)) {
        throw ConfigError("noise_std must be non-negative");
    }

    const double period_samples = 2.0 * std::numbers::pi / (omega * Ts);
    const auto steps = static_cast<std::size_t>(std::ceil(settings.n_periods * period_samples));

    ProbeRecord record;
    record.omega = omega;
    record.amplitude = settings.amplitude;
    record.Ts = Ts;
    record.settle_fraction = settings.settle_fraction;
    record.input.resize(steps);
    record.output.resize(steps);

    ClosedLoopSystem experiment = system;
    experiment.reset();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t k = 0; k < steps; ++k) {
        const double r = settings.amplitude * std::sin(omega * static_cast<double>(k) * Ts);
        record.input[k] = r;
        record.output[k] = experiment.step(r);
        if (settings.noise_std > 0.0) {
            record.output[k] += settings.noise_std * noise(rng);
        }
    }
    return record;
}

ComplexResponse estimate_response(const ProbeRecord& record) {
    const std::size_t n = record.input.size();
    if (record.output.size() != n) {
        throw EstimationError("probe input and output lengths differ");
    }
    if (!(record.omega > 0.0) || !(record.omega * record.Ts < std::numbers::pi)) {
        throw EstimationError(fmt::format("probe frequency {} rad/s outside (0, pi/Ts)", record.omega));
    }
    const double period = 2.0 * std::numbers::pi / (record.omega * record.Ts);
    if (period < 4.0) {
        throw EstimationError("fewer than 4 samples per period");
    }
    const auto start = static_cast<std::size_t>(std::floor(record.settle_fraction * static_cast<double>(n)));
    const std::size_t available = n - std::min(start, n);
    // Small slack so that ceil() in run_probe does not cost a whole period.
    const auto periods = static_cast<std::size_t>(std::floor(static_cast<double>(available) / period + 1e-9));
    if (periods < 4) {
        throw EstimationError(fmt::format("settled window spans {} periods, need at least 4", periods));
    }
    const auto length =
        std::min(available, static_cast<std::size_t>(std::llround(static_cast<double>(periods) * period)));
    const std::size_t first = n - length;

    std::complex<double> cin{0.0, 0.0};
    std::complex<double> cout{0.0, 0.0};
    for (std::size_t k = first; k < n; ++k) {
        const std::complex<double> basis = std::polar(1.0, -record.omega * record.Ts * static_cast<double>(k));
        cin += record.input[k] * basis;
        cout += record.output[k] * basis;
    }
    if (std::abs(cin) / static_cast<double>(length) < 1e-12) {
        throw EstimationError(fmt::format("no excitation at {} rad/s", record.omega));
    }
    // Conjugate form keeps out == in exactly 1 + 0j.
    return ComplexResponse::from(cout * std::conj(cin) / std::norm(cin));
}

} // namespace nugap
