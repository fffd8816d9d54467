// Copyright 2026 The qdec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qdec/cascade.hpp"

namespace qdec {

inline constexpr const char *kVersion = "0.1.0";

enum class Preset { fig2_qfi_scan, fig2_mle, fig2_mismatch, fig3_heisenberg, fig4_imperfections, custom };

/// Pipeline run by a custom config.
enum class Pipeline { qfi_scan, mle, mismatch, imperfections };

struct ModelConfig {
    std::string kind = "two_level";  // two_level | three_level
    double omega = 1.0;
    double delta = 0.0;
    double gamma = 1.0;
    std::string theta = "Delta";
    double plateau_tau = 2.0;
    double pulse_sigma = 0.05;
    double pulse_delay = 1.0;
    double tail = 5.0;
};

struct GridConfig {
    double dt = 1e-3;
    std::vector<double> T{20.0};
};

struct EstimationConfig {
    double qfi_delta = 1e-3;
    std::string fd_method = "central";  // central | richardson
    double eps = 1e-3;
    int n_traj = 1000;
    int K = 1000;
    int theta_grid_points = 41;
    double theta_grid_halfwidth = 0.0;  // 0 selects width_factor / sqrt(F)
    double width_factor = 5.0;
    double decoder_offset = 1.0;        // design offset of the decoder in MLE studies
    double singular_offset = 0.25;      // working offset near the matched point
    std::vector<double> delta_mis;
};

struct ImperfectionConfig {
    double gamma = 0.0;
    std::optional<double> gamma_dep;
    double eta = 1.0;
    std::vector<double> eta_grid;
    std::vector<double> gamma_grid;
};

struct ExperimentConfig {
    Preset preset = Preset::custom;
    Pipeline pipeline = Pipeline::qfi_scan;
    ModelConfig model;
    GridConfig grid;
    EstimationConfig estimation;
    ImperfectionConfig imperfections;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string output = "qdec_out";
    int export_trajectories = 20;  // records written to trajectories.csv
};

std::string to_string(Preset p);
std::string to_string(Pipeline p);
std::vector<Preset> all_presets();
std::string describe(Preset p);

ExperimentConfig preset_config(Preset p);

/// Preset defaults overlaid with the given document. Throws ConfigInvalid
/// naming the offending field path.
ExperimentConfig config_from_json(const nlohmann::json &doc);
ExperimentConfig load_config(const std::string &path);
nlohmann::json config_to_json(const ExperimentConfig &cfg);

struct Diagnostic {
    std::string severity;  // error | warning
    std::string code;
    std::string path;
    std::string message;
};

/// Schema and physics lints; an empty list means runnable as is.
std::vector<Diagnostic> validate(const nlohmann::json &doc);
std::vector<Diagnostic> validate(const ExperimentConfig &cfg);

struct ResultBundle {
    nlohmann::json config;
    std::vector<std::pair<std::string, std::string>> tables;  // file name, CSV payload
    nlohmann::json provenance;

    const std::string *table(const std::string &name) const;
};

SensorModel make_sensor(const ModelConfig &m, double T);
TimeGrid make_grid(const ModelConfig &m, double T, double dt);

ResultBundle run(const ExperimentConfig &cfg);
void write_bundle(const ResultBundle &bundle, const std::string &dir);

}  // namespace qdec
