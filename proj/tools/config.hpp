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
#ifndef NUGAP_APP_CONFIG_HPP
#define NUGAP_APP_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nugap/bo_select.hpp"
#include "nugap/transfer.hpp"

namespace nugap::app {

inline constexpr const char* kVersion = "0.1.0";

struct TrajectorySpec {
    /// suite | sum_of_sines | lissajous | waypoint_csv
    std::string kind = "suite";
    FrequencyRange band{0.5, 8.0};
    std::size_t count = 5;
    double duration_s = 18.0;
    double ramp_s = 3.0;
    double amplitude = 1.0;
    int n_components = 5;
    /// Waypoint files, relative paths resolved against the config directory.
    std::vector<std::filesystem::path> files;
};

struct TransferSettings {
    TrackingConfig tracking;
    TrajectorySpec trajectories;
};

struct ExperimentConfig {
    std::vector<NamedSystem> bank;
    std::size_t target = 0;
    std::vector<std::size_t> sources;
    SelectionConfig selection;
    std::optional<std::uint64_t> seed;
    std::size_t sweep_grid = 2000;
    TransferSettings transfer;
    std::filesystem::path output_dir = "out";
    /// Parsed document, for hashing.
    nlohmann::json document;

    const NamedSystem& target_system() const { return bank.at(target); }
    std::vector<NamedSystem> source_systems() const;
    /// Covers the bank entries and the target/source roles.
    std::uint64_t bank_hash() const;
    /// Covers the whole document and the effective seed.
    std::uint64_t config_hash(std::uint64_t seed) const;
};

/// Throws ConfigError with `line:col` for syntax errors and a JSON pointer for schema errors.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a(std::string_view bytes);
std::string hex_hash(std::uint64_t h);

std::vector<Trajectory> build_trajectories(const TrajectorySpec& spec, double Ts, std::uint64_t seed);

} // namespace nugap::app

#endif // NUGAP_APP_CONFIG_HPP
