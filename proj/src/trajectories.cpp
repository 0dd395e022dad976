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
#include "nugap/trajectories.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "nugap/errors.hpp"
#include "seeding.hpp"

namespace nugap {

namespace {

std::size_t sample_count(const TrajectoryParams& p) {
    if (!(p.Ts > 0.0) || !std::isfinite(p.Ts)) throw ConfigError("trajectory Ts must be positive");
    if (!(p.duration_s > 0.0) || !std::isfinite(p.duration_s)) throw ConfigError("trajectory duration must be positive");
    if (!(p.amplitude > 0.0) || !std::isfinite(p.amplitude)) throw ConfigError("trajectory amplitude must be positive");
    if (!(p.ramp_s >= 0.0) || p.ramp_s > p.duration_s) throw ConfigError("ramp must lie within the duration");
    const auto n = static_cast<std::size_t>(std::llround(p.duration_s / p.Ts));
    if (n < 4) throw ConfigError("trajectory shorter than four samples");
    return n;
}

struct ToneGrid {
    double spacing;
    long lo;
    long hi;
};

// Whole-cycle frequencies available inside the band.
ToneGrid tone_grid(const FrequencyRange& range, std::size_t n, double Ts) {
    const double spacing = 2.0 * std::numbers::pi / (static_cast<double>(n) * Ts);
    const long lo = std::max(1L, static_cast<long>(std::ceil(range.min() / spacing - 1e-9)));
    const long hi = std::min(static_cast<long>(std::floor(range.max() / spacing + 1e-9)),
                             static_cast<long>((n - 1) / 2));
    if (hi < lo) throw ConfigError(fmt::format("no whole-cycle tone fits in [{}, {}] rad/s", range.min(), range.max()));
    return {spacing, lo, hi};
}

double snap(const ToneGrid& g, double omega) {
    const long m = std::clamp(std::lround(omega / g.spacing), g.lo, g.hi);
    return static_cast<double>(m) * g.spacing;
}

double ramp_weight(double t, double ramp_s) {
    if (ramp_s <= 0.0 || t >= ramp_s) return 1.0;
    return 0.5 - 0.5 * std::cos(std::numbers::pi * t / ramp_s);
}

Trajectory render(std::string id, const TrajectoryParams& p, std::size_t n, std::vector<Tone> tones) {
    Trajectory out{std::move(id), p.Ts, std::vector<double>(n, 0.0), std::move(tones)};
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * p.Ts;
        double y = 0.0;
        for (const auto& tone : out.tones) y += tone.amplitude * std::sin(tone.omega * t + tone.phase);
        out.samples[k] = ramp_weight(t, p.ramp_s) * y;
    }
    return out;
}

Trajectory sum_of_sines(const TrajectoryParams& p, const FrequencyRange& range, std::size_t n, std::uint64_t seed,
                        std::size_t index) {
    if (p.n_components < 1) throw ConfigError("sum_of_sines needs at least one component");
    const auto grid = tone_grid(range, n, p.Ts);
    std::mt19937_64 rng(detail::derive_seed(seed, 0, index));
    std::vector<Tone> tones(static_cast<std::size_t>(p.n_components));
    double weight_sum = 0.0;
    for (auto& tone : tones) {
        tone.omega = snap(grid, range.min() + detail::uniform01(rng()) * range.width());
        tone.phase = 2.0 * std::numbers::pi * detail::uniform01(rng());
        tone.amplitude = tones.size() == 1 ? 1.0 : 0.2 + 0.8 * detail::uniform01(rng());
        weight_sum += tone.amplitude;
    }
    for (auto& tone : tones) tone.amplitude *= p.amplitude / weight_sum;
    return render(fmt::format("sines{}", index), p, n, std::move(tones));
}

Trajectory lissajous(const TrajectoryParams& p, const FrequencyRange& range, std::size_t n, std::uint64_t seed,
                     std::size_t index) {
    static constexpr std::array<std::array<int, 2>, 6> ratios{{{1, 2}, {2, 3}, {3, 4}, {1, 3}, {3, 5}, {2, 5}}};
    const auto grid = tone_grid(range, n, p.Ts);
    std::mt19937_64 rng(detail::derive_seed(seed, 1, index));
    const auto& ab = ratios[static_cast<std::size_t>(rng() % ratios.size())];
    const double base_lo = range.min() / ab[0];
    const double base_hi = range.max() / ab[1];
    if (!(base_hi > base_lo)) throw ConfigError("band too narrow for a Lissajous pair");
    const double base = base_lo + detail::uniform01(rng()) * (base_hi - base_lo);
    const double delta = 2.0 * std::numbers::pi * detail::uniform01(rng());
    std::vector<Tone> tones{{snap(grid, ab[0] * base), 0.5 * p.amplitude, delta},
                            {snap(grid, ab[1] * base), 0.5 * p.amplitude, 0.0}};
    return render(fmt::format("lissajous{}", index), p, n, std::move(tones));
}

std::vector<std::pair<double, double>> read_waypoints(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open waypoint file '{}'", path));
    std::vector<std::pair<double, double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        double t = 0.0;
        double y = 0.0;
        std::string rest;
        if (!(fields >> t >> y)) {
            if (rows.empty() && line_no == 1) continue; // header
            throw ConfigError(fmt::format("{}:{}: expected 't, y'", path, line_no));
        }
        if (fields >> rest) throw ConfigError(fmt::format("{}:{}: extra field '{}'", path, line_no, rest));
        if (!std::isfinite(t) || !std::isfinite(y)) throw ConfigError(fmt::format("{}:{}: non-finite value", path, line_no));
        if (!rows.empty() && !(t > rows.back().first))
            throw ConfigError(fmt::format("{}:{}: time must increase", path, line_no));
        rows.emplace_back(t, y);
    }
    if (rows.size() < 4) throw ConfigError(fmt::format("{}: need at least four waypoints", path));
    return rows;
}

// Natural cubic spline through the waypoints, sampled every Ts from the first time stamp.
std::vector<double> spline_resample(const std::vector<std::pair<double, double>>& pts, double Ts) {
    const std::size_t n = pts.size();
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = pts[i + 1].first - pts[i].first;
    // Second derivatives m[i], m[0] = m[n-1] = 0, Thomas algorithm on the interior.
    std::vector<double> m(n, 0.0), c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double a = h[i - 1];
        const double b = 2.0 * (h[i - 1] + h[i]);
        const double cc = h[i];
        const double rhs = 6.0 * ((pts[i + 1].second - pts[i].second) / h[i] -
                                  (pts[i].second - pts[i - 1].second) / h[i - 1]);
        const double denom = b - a * c[i - 1];
        c[i] = cc / denom;
        d[i] = (rhs - a * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) m[i] = d[i] - c[i] * m[i + 1];

    const double t0 = pts.front().first;
    const auto count = static_cast<std::size_t>(std::floor((pts.back().first - t0) / Ts + 1e-9)) + 1;
    std::vector<double> out(count);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double t = t0 + static_cast<double>(k) * Ts;
        while (seg + 2 < n && t > pts[seg + 1].first) ++seg;
        const double hs = h[seg];
        const double u = pts[seg + 1].first - t;
        const double v = t - pts[seg].first;
        out[k] = m[seg] * u * u * u / (6.0 * hs) + m[seg + 1] * v * v * v / (6.0 * hs) +
                 (pts[seg].second / hs - m[seg] * hs / 6.0) * u + (pts[seg + 1].second / hs - m[seg + 1] * hs / 6.0) * v;
    }
    return out;
}

} // namespace

double spectral_fraction_above(std::span<const double> samples, double Ts, double omega) {
    const std::size_t n = samples.size();
    if (n == 0) return 0.0;
    std::vector<std::complex<double>> twiddle(n);
    for (std::size_t k = 0; k < n; ++k)
        twiddle[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    double total = 0.0;
    double above = 0.0;
    for (std::size_t m = 0; m <= n / 2; ++m) {
        std::complex<double> x = 0.0;
        for (std::size_t k = 0; k < n; ++k) x += samples[k] * twiddle[(m * k) % n];
        const bool edge = m == 0 || 2 * m == n;
        const double energy = (edge ? 1.0 : 2.0) * std::norm(x);
        total += energy;
        if (2.0 * std::numbers::pi * static_cast<double>(m) / (static_cast<double>(n) * Ts) > omega) above += energy;
    }
    return total > 0.0 ? above / total : 0.0;
}

std::vector<Trajectory> make_test_trajectories(TrajectoryKind kind, const TrajectoryParams& params,
                                               const FrequencyRange& range, std::size_t count, std::uint64_t seed) {
    if (count == 0) throw ConfigError("trajectory count must be positive");
    if (kind == TrajectoryKind::waypoint_csv) {
        if (count != 1) throw ConfigError("a waypoint file yields exactly one trajectory");
        if (!(params.Ts > 0.0)) throw ConfigError("trajectory Ts must be positive");
        Trajectory out;
        out.id = std::filesystem::path(params.csv_path).stem().string();
        out.Ts = params.Ts;
        out.samples = spline_resample(read_waypoints(params.csv_path), params.Ts);
        const double frac = spectral_fraction_above(out.samples, params.Ts, range.max());
        if (frac >= 0.05)
            throw ConfigError(fmt::format("{}: {:.1f}% of the energy lies above {} rad/s", params.csv_path,
                                          100.0 * frac, range.max()));
        return {std::move(out)};
    }
    if (range.max() >= std::numbers::pi / params.Ts) throw ConfigError("tone band reaches the Nyquist frequency");
    const std::size_t n = sample_count(params);
    std::vector<Trajectory> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(kind == TrajectoryKind::sum_of_sines ? sum_of_sines(params, range, n, seed, i)
                                                           : lissajous(params, range, n, seed, i));
    return out;
}

std::vector<Trajectory> default_trajectory_suite(const FrequencyRange& band, std::uint64_t seed, double Ts,
                                                 double duration_s, double ramp_s) {
    static constexpr std::array<double, 3> scales{0.5, 1.0, 1.5};
    TrajectoryParams p;
    p.Ts = Ts;
    p.duration_s = duration_s;
    p.ramp_s = ramp_s;
    std::vector<Trajectory> shapes = make_test_trajectories(TrajectoryKind::sum_of_sines, p, band, 3, seed);
    for (auto& t : make_test_trajectories(TrajectoryKind::lissajous, p, band, 2, seed)) shapes.push_back(std::move(t));

    std::vector<Trajectory> out;
    for (const auto& shape : shapes) {
        for (double s : scales) {
            Trajectory t = shape;
            t.id = fmt::format("{}_x{:.1f}", shape.id, s);
            for (auto& y : t.samples) y *= s;
            for (auto& tone : t.tones) tone.amplitude *= s;
            out.push_back(std::move(t));
        }
    }
    return out;
}

TrajectoryKind parse_trajectory_kind(const std::string& name) {
    if (name == "sum_of_sines") return TrajectoryKind::sum_of_sines;
    if (name == "lissajous") return TrajectoryKind::lissajous;
    if (name == "waypoint_csv") return TrajectoryKind::waypoint_csv;
    throw ConfigError(fmt::format("unknown trajectory kind '{}'", name));
}

} // namespace nugap
