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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qdec/errors.hpp"
#include "qdec/experiment.hpp"

namespace qdec {
namespace {

using nlohmann::json;

bool has_code(const std::vector<Diagnostic> &d, const std::string &code, const std::string &severity) {
    return std::any_of(d.begin(), d.end(), [&](const Diagnostic &x) { return x.code == code && x.severity == severity; });
}

json small_scan() {
    return json{{"preset", "custom"},
                {"pipeline", "qfi_scan"},
                {"grid", {{"T", {5.0, 10.0}}}},
                {"estimation", {{"n_traj", 100}}},
                {"export_trajectories", 3}};
}

TEST(Config, PresetDefaultsValidateCleanly) {
    for (Preset p : all_presets()) {
        json doc{{"preset", to_string(p)}};
        std::vector<Diagnostic> d = validate(doc);
        EXPECT_TRUE(d.empty()) << to_string(p) << ": " << (d.empty() ? "" : d.front().message);
        EXPECT_FALSE(describe(p).empty());
    }
}

TEST(Config, StepTooLargeIsReported) {
    json doc{{"preset", "custom"}, {"model", {{"omega", 5.0}}}, {"grid", {{"dt", 1.0}, {"T", {10.0}}}}};
    std::vector<Diagnostic> d = validate(doc);
    ASSERT_TRUE(has_code(d, "StepTooLarge", "error"));
    EXPECT_EQ(std::find_if(d.begin(), d.end(), [](const Diagnostic &x) { return x.code == "StepTooLarge"; })->path,
              "grid.dt");
}

TEST(Config, ZeroEfficiencyWarns) {
    json doc{{"preset", "custom"}, {"imperfections", {{"eta", 0.0}}}};
    std::vector<Diagnostic> d = validate(doc);
    EXPECT_TRUE(has_code(d, "ZeroEfficiency", "warning"));
    EXPECT_FALSE(has_code(d, "ZeroEfficiency", "error"));
}

TEST(Config, FieldErrorsNameThePath) {
    json doc{{"preset", "custom"}, {"model", {{"omegaa", 1.0}}}};
    std::vector<Diagnostic> d = validate(doc);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].code, "ConfigInvalid");
    EXPECT_EQ(d[0].path, "model.omegaa");
    try {
        config_from_json(json{{"grid", {{"T", {1.0, "x"}}}}});
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
        EXPECT_NE(std::string(e.what()).find("grid.T[1]"), std::string::npos);
    }
    EXPECT_TRUE(has_code(validate(json{{"preset", "nope"}}), "ConfigInvalid", "error"));
    EXPECT_TRUE(has_code(validate(json{{"grid", {{"dt", 3e-3}, {"T", {10.0}}}}}), "ConfigInvalid", "error"));
    EXPECT_TRUE(has_code(validate(json{{"model", {{"gamma", 0.0}}}}), "NonpositiveRate", "error"));
    EXPECT_TRUE(has_code(validate(json{{"model", {{"kind", "three_level"}, {"pulse_sigma", 0.5}}}}),
                         "GaussianTooWide", "error"));
}

TEST(Config, EchoRoundTrips) {
    for (Preset p : all_presets()) {
        ExperimentConfig c = preset_config(p);
        json echo = config_to_json(c);
        ExperimentConfig back = config_from_json(echo);
        EXPECT_EQ(config_to_json(back), echo) << to_string(p);
        EXPECT_TRUE(validate(echo).empty());
    }
}

TEST(Config, OverlayKeepsPresetDefaults) {
    ExperimentConfig c = config_from_json(json{{"preset", "fig2_mismatch"}, {"seed", 7}});
    EXPECT_EQ(c.pipeline, Pipeline::mismatch);
    EXPECT_EQ(c.estimation.delta_mis.size(), 11u);
    EXPECT_EQ(c.seed, 7u);
}

TEST(Run, TablesHaveHeadersAndDotDecimals) {
    ResultBundle b = run(config_from_json(small_scan()));
    const std::string *scan = b.table("qfi_scan.csv");
    ASSERT_NE(scan, nullptr);
    std::istringstream in(*scan);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header.rfind("T,I_E,I_G,F_decoder", 0), 0u);
    int rows = 0;
    for (std::string line; std::getline(in, line);) {
        ++rows;
        EXPECT_EQ(line.find(';'), std::string::npos);
    }
    EXPECT_EQ(rows, 2);
    ASSERT_NE(b.table("trajectories.csv"), nullptr);
    ASSERT_NE(b.table("decoder.csv"), nullptr);
    EXPECT_EQ(b.provenance["seed"], 1);
    EXPECT_EQ(b.provenance["tables"].size(), b.tables.size());
    EXPECT_EQ(b.provenance["config"], b.config);
}

TEST(Run, ReRunsAreByteIdenticalAcrossThreadCounts) {
    ExperimentConfig c = config_from_json(small_scan());
    ResultBundle a = run(c);
    ResultBundle again = run(c);
    c.threads = 3;
    ResultBundle threaded = run(c);
    ASSERT_EQ(a.tables.size(), again.tables.size());
    ASSERT_EQ(a.tables.size(), threaded.tables.size());
    for (std::size_t k = 0; k < a.tables.size(); ++k) {
        EXPECT_EQ(a.tables[k], again.tables[k]);
        EXPECT_EQ(a.tables[k], threaded.tables[k]);
    }
    EXPECT_EQ(a.provenance["tables"], threaded.provenance["tables"]);
    c.seed = 2;
    EXPECT_NE(*run(c).table("qfi_scan.csv"), *a.table("qfi_scan.csv"));
}

TEST(Run, ZeroTrajectoriesGivesQuantumBoundsOnly) {
    json doc = small_scan();
    doc["estimation"]["n_traj"] = 0;
    ResultBundle b = run(config_from_json(doc));
    std::istringstream in(*b.table("qfi_scan.csv"));
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "T,I_E,I_G,n_traj,dt,seed");
    EXPECT_EQ(b.table("fi_sweep_direct.csv"), nullptr);
}

TEST(Run, InvalidConfigRefusesToRun) {
    ExperimentConfig c = config_from_json(small_scan());
    c.grid.dt = -1.0;
    try {
        run(c);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
    }
}

TEST(Run, PipelinesProduceTheirTables) {
    json mis{{"preset", "fig2_mismatch"},
             {"grid", {{"T", {5.0}}}},
             {"estimation", {{"n_traj", 100}, {"delta_mis", {-2.0, 0.0, 2.0}}}}};
    ResultBundle m = run(config_from_json(mis));
    EXPECT_NE(m.table("mismatch.csv"), nullptr);
    EXPECT_NE(m.table("mismatch_summary.csv"), nullptr);

    json imp{{"preset", "fig4_imperfections"},
             {"grid", {{"T", {5.0}}}},
             {"estimation", {{"n_traj", 100}}},
             {"imperfections", {{"eta_grid", {0.5, 1.0}}, {"gamma_grid", {0.0, 0.1}}}}};
    ResultBundle i = run(config_from_json(imp));
    ASSERT_NE(i.table("imperfections.csv"), nullptr);
    EXPECT_EQ(std::count(i.table("imperfections.csv")->begin(), i.table("imperfections.csv")->end(), '\n'), 5);

    json mle{{"preset", "fig2_mle"}, {"grid", {{"T", {20.0}}}}, {"estimation", {{"n_traj", 200}, {"K", 50}}}};
    ResultBundle e = run(config_from_json(mle));
    EXPECT_NE(e.table("mle_study.csv"), nullptr);
    EXPECT_NE(e.table("likelihood_curves.csv"), nullptr);
}

TEST(Run, WriteBundleCreatesFiles) {
    ResultBundle b = run(config_from_json(small_scan()));
    auto dir = std::filesystem::temp_directory_path() / "qdec_test_bundle";
    std::filesystem::remove_all(dir);
    write_bundle(b, dir.string());
    for (const auto &[name, csv] : b.tables) {
        std::ifstream f(dir / name, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        EXPECT_EQ(ss.str(), csv);
    }
    std::ifstream prov(dir / "provenance.json");
    json p = json::parse(prov);
    EXPECT_EQ(p["program"], "qdec");
    std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace qdec
