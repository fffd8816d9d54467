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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qdec/errors.hpp"
#include "qdec/experiment.hpp"

namespace {

nlohmann::json read_document(const std::string &config, const std::string &preset) {
    nlohmann::json doc = nlohmann::json::object();
    if (!config.empty()) {
        std::ifstream in(config);
        if (!in) {
            qdec::fail(qdec::ErrorCode::ConfigInvalid, "cannot open config file " + config);
        }
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error &e) {
            qdec::fail(qdec::ErrorCode::ConfigInvalid, std::string("$: ") + e.what());
        }
    }
    if (!preset.empty()) {
        doc["preset"] = preset;
    }
    return doc;
}

void print_diagnostics(const std::vector<qdec::Diagnostic> &diags) {
    for (const auto &d : diags) {
        std::cout << d.severity << " " << d.code << " " << d.path << ": " << d.message << "\n";
    }
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"qdec: emission-field Fisher information, quantum decoders and photon-counting estimation"};
    app.require_subcommand(1);

    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string out_dir;

    auto *run = app.add_subcommand("run", "run an experiment and write CSV tables plus provenance.json");
    run->add_option("--config", config, "JSON configuration file")->check(CLI::ExistingFile);
    run->add_option("--preset", preset, "preset name, overrides the config's preset");
    run->add_option("--seed", seed, "RNG seed, overrides the config");
    run->add_option("--threads", threads, "worker threads (0 = hardware concurrency)");
    run->add_option("--out", out_dir, "output directory, overrides the config");

    auto *val = app.add_subcommand("validate", "check a configuration and print diagnostics");
    val->add_option("--config", config, "JSON configuration file")->check(CLI::ExistingFile);
    val->add_option("--preset", preset, "preset name, overrides the config's preset");

    auto *pre = app.add_subcommand("presets", "list presets; with --out, write their default configs");
    pre->add_option("--out", out_dir, "directory receiving <preset>.json files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*pre) {
            for (qdec::Preset p : qdec::all_presets()) {
                std::cout << qdec::to_string(p) << "  " << qdec::describe(p) << "\n";
                if (!out_dir.empty()) {
                    std::filesystem::create_directories(out_dir);
                    std::ofstream f(std::filesystem::path(out_dir) / (qdec::to_string(p) + ".json"));
                    f << qdec::config_to_json(qdec::preset_config(p)).dump(2) << "\n";
                }
            }
            return 0;
        }
        nlohmann::json doc = read_document(config, preset);
        if (*val) {
            auto diags = qdec::validate(doc);
            print_diagnostics(diags);
            bool errors = false;
            for (const auto &d : diags) {
                errors |= d.severity == "error";
            }
            if (diags.empty()) {
                std::cout << "ok\n";
            }
            return errors ? 1 : 0;
        }
        qdec::ExperimentConfig cfg = qdec::config_from_json(doc);
        if (seed) {
            cfg.seed = *seed;
        }
        if (threads) {
            cfg.threads = *threads;
        }
        if (!out_dir.empty()) {
            cfg.output = out_dir;
        }
        auto diags = qdec::validate(cfg);
        print_diagnostics(diags);
        qdec::ResultBundle bundle = qdec::run(cfg);
        qdec::write_bundle(bundle, cfg.output);
        for (const auto &[name, csv] : bundle.tables) {
            std::cout << "wrote " << (std::filesystem::path(cfg.output) / name).string() << "\n";
        }
        std::cout << "wrote " << (std::filesystem::path(cfg.output) / "provenance.json").string() << "\n";
        return 0;
    } catch (const qdec::Error &e) {
        std::cerr << "error " << e.what() << "\n";
        return 2;
    }
}
