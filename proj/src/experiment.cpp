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

#include "qdec/experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "qdec/csv.hpp"
#include "qdec/decoder.hpp"
#include "qdec/errors.hpp"
#include "qdec/estimate.hpp"
#include "qdec/parallel.hpp"
#include "qdec/qfi.hpp"
#include "qdec/verify.hpp"

namespace qdec {

using nlohmann::json;

std::string to_string(Preset p) {
    switch (p) {
        case Preset::fig2_qfi_scan: return "fig2_qfi_scan";
        case Preset::fig2_mle: return "fig2_mle";
        case Preset::fig2_mismatch: return "fig2_mismatch";
        case Preset::fig3_heisenberg: return "fig3_heisenberg";
        case Preset::fig4_imperfections: return "fig4_imperfections";
        case Preset::custom: return "custom";
    }
    return "custom";
}

std::string to_string(Pipeline p) {
    switch (p) {
        case Pipeline::qfi_scan: return "qfi_scan";
        case Pipeline::mle: return "mle";
        case Pipeline::mismatch: return "mismatch";
        case Pipeline::imperfections: return "imperfections";
    }
    return "qfi_scan";
}

std::vector<Preset> all_presets() {
    return {Preset::fig2_qfi_scan,   Preset::fig2_mle,           Preset::fig2_mismatch,
            Preset::fig3_heisenberg, Preset::fig4_imperfections, Preset::custom};
}

std::string describe(Preset p) {
    switch (p) {
        case Preset::fig2_qfi_scan:
            return "two-level emitter: I_E, I_G, decoder and direct-counting FI versus T";
        case Preset::fig2_mle:
            return "two-level emitter: maximum-likelihood interrogations, inverse variance versus T";
        case Preset::fig2_mismatch:
            return "two-level emitter: decoder FI versus decoder detuning mismatch, FWHM";
        case Preset::fig3_heisenberg:
            return "three-level emitter with pulsed drive: I_E, I_G and direct counting versus plateau length";
        case Preset::fig4_imperfections:
            return "two-level emitter: decoder FI under loss, dephasing and detector efficiency";
        case Preset::custom:
            return "explicit configuration; pipeline chosen by the 'pipeline' field";
    }
    return "";
}

ExperimentConfig preset_config(Preset p) {
    ExperimentConfig c;
    c.preset = p;
    switch (p) {
        case Preset::fig2_qfi_scan:
            c.pipeline = Pipeline::qfi_scan;
            c.grid.T = {10.0, 20.0, 40.0, 80.0};
            c.estimation.n_traj = 1000;
            break;
        case Preset::fig2_mle:
            c.pipeline = Pipeline::mle;
            c.grid.T = {150.0, 400.0, 850.0};
            c.estimation.K = 5000;
            c.estimation.n_traj = 1000;
            break;
        case Preset::fig2_mismatch:
            c.pipeline = Pipeline::mismatch;
            c.grid.T = {20.0};
            c.estimation.n_traj = 3000;
            c.estimation.delta_mis = linspace(-10.0, 10.0, 11);
            break;
        case Preset::fig3_heisenberg:
            c.pipeline = Pipeline::qfi_scan;
            c.model.kind = "three_level";
            c.model.omega = 5.0;
            c.grid.T = {50.0, 120.0, 170.0};
            c.estimation.n_traj = 200;
            break;
        case Preset::fig4_imperfections:
            c.pipeline = Pipeline::imperfections;
            c.model.delta = 1.0;
            c.grid.T = {20.0};
            c.estimation.n_traj = 2000;
            c.imperfections.eta_grid = {0.35, 0.675, 1.0};
            c.imperfections.gamma_grid = {0.0, 0.1, 0.2};
            break;
        case Preset::custom:
            c.pipeline = Pipeline::qfi_scan;
            c.estimation.n_traj = 200;
            break;
    }
    return c;
}

// ---------------------------------------------------------------------------
// JSON reading with field paths in error messages.

namespace {

[[noreturn]] void invalid(const std::string &path, const std::string &msg) {
    fail(ErrorCode::ConfigInvalid, path + ": " + msg);
}

class Fields {
   public:
    Fields(const json &obj, std::string path, std::set<std::string> allowed) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) {
            invalid(path_.empty() ? "$" : path_, "expected an object");
        }
        for (const auto &[k, v] : obj_.items()) {
            if (!allowed.count(k)) {
                invalid(at(k), "unknown field");
            }
        }
    }

    std::string at(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string &key) const { return obj_.contains(key); }
    const json &raw(const std::string &key) const { return obj_.at(key); }

    void number(const std::string &key, double &out) const {
        if (!has(key)) {
            return;
        }
        const json &v = obj_.at(key);
        if (!v.is_number()) {
            invalid(at(key), "expected a number");
        }
        out = v.get<double>();
    }
    void integer(const std::string &key, int &out) const {
        if (!has(key)) {
            return;
        }
        const json &v = obj_.at(key);
        if (!v.is_number_integer()) {
            invalid(at(key), "expected an integer");
        }
        out = v.get<int>();
    }
    void unsigned64(const std::string &key, std::uint64_t &out) const {
        if (!has(key)) {
            return;
        }
        const json &v = obj_.at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            invalid(at(key), "expected a non-negative integer");
        }
        out = v.get<std::uint64_t>();
    }
    void text(const std::string &key, std::string &out) const {
        if (!has(key)) {
            return;
        }
        const json &v = obj_.at(key);
        if (!v.is_string()) {
            invalid(at(key), "expected a string");
        }
        out = v.get<std::string>();
    }
    void numbers(const std::string &key, std::vector<double> &out) const {
        if (!has(key)) {
            return;
        }
        const json &v = obj_.at(key);
        if (v.is_number()) {
            out = {v.get<double>()};
            return;
        }
        if (!v.is_array()) {
            invalid(at(key), "expected a number or an array of numbers");
        }
        out.clear();
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (!v[k].is_number()) {
                invalid(at(key) + "[" + std::to_string(k) + "]", "expected a number");
            }
            out.push_back(v[k].get<double>());
        }
    }

   private:
    const json &obj_;
    std::string path_;
};

Preset parse_preset(const std::string &s, const std::string &path) {
    for (Preset p : all_presets()) {
        if (to_string(p) == s) {
            return p;
        }
    }
    invalid(path, "unknown preset '" + s + "'");
}

Pipeline parse_pipeline(const std::string &s, const std::string &path) {
    for (Pipeline p : {Pipeline::qfi_scan, Pipeline::mle, Pipeline::mismatch, Pipeline::imperfections}) {
        if (to_string(p) == s) {
            return p;
        }
    }
    invalid(path, "unknown pipeline '" + s + "'");
}

}  // namespace

ExperimentConfig config_from_json(const json &doc) {
    Fields top(doc, "", {"preset", "pipeline", "model", "grid", "estimation", "imperfections", "seed", "threads",
                         "output", "export_trajectories"});
    std::string preset = "custom";
    top.text("preset", preset);
    ExperimentConfig c = preset_config(parse_preset(preset, "preset"));
    if (top.has("pipeline")) {
        std::string p;
        top.text("pipeline", p);
        Pipeline given = parse_pipeline(p, "pipeline");
        if (c.preset != Preset::custom && given != c.pipeline) {
            invalid("pipeline", "preset " + preset + " runs pipeline " + to_string(c.pipeline));
        }
        c.pipeline = given;
    }
    if (top.has("model")) {
        Fields f(top.raw("model"), "model",
                 {"kind", "omega", "delta", "gamma", "theta", "plateau_tau", "pulse_sigma", "pulse_delay", "tail"});
        f.text("kind", c.model.kind);
        f.number("omega", c.model.omega);
        f.number("delta", c.model.delta);
        f.number("gamma", c.model.gamma);
        f.text("theta", c.model.theta);
        f.number("plateau_tau", c.model.plateau_tau);
        f.number("pulse_sigma", c.model.pulse_sigma);
        f.number("pulse_delay", c.model.pulse_delay);
        f.number("tail", c.model.tail);
    }
    if (top.has("grid")) {
        Fields f(top.raw("grid"), "grid", {"dt", "T"});
        f.number("dt", c.grid.dt);
        f.numbers("T", c.grid.T);
    }
    if (top.has("estimation")) {
        Fields f(top.raw("estimation"), "estimation",
                 {"qfi_delta", "fd_method", "eps", "n_traj", "K", "theta_grid_points", "theta_grid_halfwidth",
                  "width_factor", "decoder_offset", "singular_offset", "delta_mis"});
        auto &e = c.estimation;
        f.number("qfi_delta", e.qfi_delta);
        f.text("fd_method", e.fd_method);
        f.number("eps", e.eps);
        f.integer("n_traj", e.n_traj);
        f.integer("K", e.K);
        f.integer("theta_grid_points", e.theta_grid_points);
        f.number("theta_grid_halfwidth", e.theta_grid_halfwidth);
        f.number("width_factor", e.width_factor);
        f.number("decoder_offset", e.decoder_offset);
        f.number("singular_offset", e.singular_offset);
        f.numbers("delta_mis", e.delta_mis);
    }
    if (top.has("imperfections")) {
        Fields f(top.raw("imperfections"), "imperfections", {"gamma", "gamma_dep", "eta", "eta_grid", "gamma_grid"});
        auto &im = c.imperfections;
        f.number("gamma", im.gamma);
        if (f.has("gamma_dep")) {
            if (f.raw("gamma_dep").is_null()) {
                im.gamma_dep.reset();
            } else {
                double g = 0.0;
                f.number("gamma_dep", g);
                im.gamma_dep = g;
            }
        }
        f.number("eta", im.eta);
        f.numbers("eta_grid", im.eta_grid);
        f.numbers("gamma_grid", im.gamma_grid);
    }
    top.unsigned64("seed", c.seed);
    top.integer("threads", c.threads);
    top.text("output", c.output);
    top.integer("export_trajectories", c.export_trajectories);
    return c;
}

ExperimentConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::ConfigInvalid, "cannot open config file " + path);
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        fail(ErrorCode::ConfigInvalid, "$: " + std::string(e.what()));
    }
    return config_from_json(doc);
}

json config_to_json(const ExperimentConfig &c) {
    json j;
    j["preset"] = to_string(c.preset);
    j["pipeline"] = to_string(c.pipeline);
    j["model"] = {{"kind", c.model.kind},
                  {"omega", c.model.omega},
                  {"delta", c.model.delta},
                  {"gamma", c.model.gamma},
                  {"theta", c.model.theta},
                  {"plateau_tau", c.model.plateau_tau},
                  {"pulse_sigma", c.model.pulse_sigma},
                  {"pulse_delay", c.model.pulse_delay},
                  {"tail", c.model.tail}};
    j["grid"] = {{"dt", c.grid.dt}, {"T", c.grid.T}};
    const auto &e = c.estimation;
    j["estimation"] = {{"qfi_delta", e.qfi_delta},
                       {"fd_method", e.fd_method},
                       {"eps", e.eps},
                       {"n_traj", e.n_traj},
                       {"K", e.K},
                       {"theta_grid_points", e.theta_grid_points},
                       {"theta_grid_halfwidth", e.theta_grid_halfwidth},
                       {"width_factor", e.width_factor},
                       {"decoder_offset", e.decoder_offset},
                       {"singular_offset", e.singular_offset},
                       {"delta_mis", e.delta_mis}};
    const auto &im = c.imperfections;
    j["imperfections"] = {{"gamma", im.gamma},
                          {"gamma_dep", im.gamma_dep ? json(*im.gamma_dep) : json(nullptr)},
                          {"eta", im.eta},
                          {"eta_grid", im.eta_grid},
                          {"gamma_grid", im.gamma_grid}};
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["output"] = c.output;
    j["export_trajectories"] = c.export_trajectories;
    return j;
}

// ---------------------------------------------------------------------------

SensorModel make_sensor(const ModelConfig &m, double T) {
    if (m.kind == "two_level") {
        return two_level_model(m.omega, m.delta, m.gamma, m.theta);
    }
    if (m.kind == "three_level") {
        ThreeLevelSchedule s;
        s.plateau_T = T;
        s.tau = m.plateau_tau;
        s.sigma = m.pulse_sigma;
        s.pulse_delay = m.pulse_delay;
        s.tail = m.tail;
        return three_level_model(m.delta, m.omega, m.gamma, s.p1(m.omega), s.p2(), m.theta);
    }
    fail(ErrorCode::ConfigInvalid, "model.kind: unknown model '" + m.kind + "'");
}

TimeGrid make_grid(const ModelConfig &m, double T, double dt) {
    double end = T;
    if (m.kind == "three_level") {
        end = T + m.pulse_delay + m.tail;
    }
    return TimeGrid::make(0.0, end, dt);
}

namespace {

void add(std::vector<Diagnostic> &out, const std::string &sev, const std::string &code, const std::string &path,
         const std::string &msg) {
    out.push_back(Diagnostic{sev, code, path, msg});
}

bool multiple_of(double span, double dt) {
    double n = std::round(span / dt);
    return std::abs(n * dt - span) <= 1e-12 * std::max(1.0, span);
}

}  // namespace

std::vector<Diagnostic> validate(const ExperimentConfig &c) {
    std::vector<Diagnostic> d;
    const auto &m = c.model;
    if (m.kind != "two_level" && m.kind != "three_level") {
        add(d, "error", "ConfigInvalid", "model.kind", "expected two_level or three_level");
        return d;
    }
    if (m.theta != "Delta" && m.theta != "Omega" && m.theta != "Gamma") {
        add(d, "error", "ConfigInvalid", "model.theta", "expected Delta, Omega or Gamma");
    }
    if (!(m.gamma > 0.0)) {
        add(d, "error", "NonpositiveRate", "model.gamma", "emission rate must be positive");
    }
    const auto &im = c.imperfections;
    if (im.gamma < 0.0) {
        add(d, "error", "NonpositiveRate", "imperfections.gamma", "loss rate must be non-negative");
    }
    if (im.gamma_dep && *im.gamma_dep < 0.0) {
        add(d, "error", "NonpositiveRate", "imperfections.gamma_dep", "dephasing rate must be non-negative");
    }
    auto check_eta = [&](double eta, const std::string &path) {
        if (eta == 0.0) {
            add(d, "warning", "ZeroEfficiency", path, "zero-information detector");
        } else if (!(eta > 0.0 && eta <= 1.0)) {
            add(d, "error", "ConfigInvalid", path, "detector efficiency must lie in (0, 1]");
        }
    };
    check_eta(im.eta, "imperfections.eta");
    for (std::size_t k = 0; k < im.eta_grid.size(); ++k) {
        check_eta(im.eta_grid[k], "imperfections.eta_grid[" + std::to_string(k) + "]");
    }
    for (std::size_t k = 0; k < im.gamma_grid.size(); ++k) {
        if (im.gamma_grid[k] < 0.0) {
            add(d, "error", "NonpositiveRate", "imperfections.gamma_grid[" + std::to_string(k) + "]",
                "loss rate must be non-negative");
        }
    }
    const auto &g = c.grid;
    bool grid_ok = g.dt > 0.0;
    if (!grid_ok) {
        add(d, "error", "ConfigInvalid", "grid.dt", "time step must be positive");
    }
    if (g.T.empty()) {
        add(d, "error", "ConfigInvalid", "grid.T", "at least one interrogation time is required");
    }
    for (std::size_t k = 0; k < g.T.size(); ++k) {
        std::string path = "grid.T[" + std::to_string(k) + "]";
        if (!(g.T[k] > 0.0)) {
            add(d, "error", "ConfigInvalid", path, "interrogation time must be positive");
            grid_ok = false;
        } else if (grid_ok) {
            double span = m.kind == "three_level" ? g.T[k] + m.pulse_delay + m.tail : g.T[k];
            if (!multiple_of(span, g.dt)) {
                add(d, "error", "ConfigInvalid", path, "evolution span is not a multiple of grid.dt");
            }
        }
    }
    if (m.kind == "three_level") {
        if (!(m.pulse_sigma > 0.0) || m.pulse_sigma > 0.2 / m.gamma) {
            add(d, "error", "GaussianTooWide", "model.pulse_sigma", "pulse width must satisfy 0 < sigma <= 0.2/Gamma");
        }
        if (!(m.plateau_tau > 0.0)) {
            add(d, "error", "ConfigInvalid", "model.plateau_tau", "ramp time must be positive");
        }
    }
    const auto &e = c.estimation;
    if (!(e.qfi_delta > 0.0)) {
        add(d, "error", "ConfigInvalid", "estimation.qfi_delta", "finite-difference step must be positive");
    } else if (e.qfi_delta < 1e-6 || e.qfi_delta > 0.1) {
        add(d, "warning", "DeltaWindow", "estimation.qfi_delta", "step outside the adaptive window [1e-6, 0.1]");
    }
    if (e.fd_method != "central" && e.fd_method != "richardson") {
        add(d, "error", "ConfigInvalid", "estimation.fd_method", "expected central or richardson");
    }
    if (!(e.eps > 0.0)) {
        add(d, "error", "ConfigInvalid", "estimation.eps", "score step must be positive");
    }
    if (e.n_traj < 0) {
        add(d, "error", "ConfigInvalid", "estimation.n_traj", "trajectory count must be non-negative");
    } else if (e.n_traj > 0 && e.n_traj < 100) {
        add(d, "warning", "FewTrajectories", "estimation.n_traj", "fewer than 100 trajectories per estimate");
    }
    if (c.pipeline != Pipeline::qfi_scan && e.n_traj == 0) {
        add(d, "error", "ConfigInvalid", "estimation.n_traj", to_string(c.pipeline) + " needs sampled trajectories");
    }
    if (c.pipeline == Pipeline::mle) {
        if (e.K < 2) {
            add(d, "error", "ConfigInvalid", "estimation.K", "interrogation count must be at least 2");
        } else if (e.K < 1000) {
            add(d, "warning", "FewInterrogations", "estimation.K", "fewer than 1000 interrogations per T");
        }
        if (e.theta_grid_points < 3) {
            add(d, "error", "ConfigInvalid", "estimation.theta_grid_points", "need at least three grid points");
        }
        if (e.theta_grid_halfwidth < 0.0 || !(e.width_factor > 0.0)) {
            add(d, "error", "ConfigInvalid", "estimation.width_factor", "grid widths must be positive");
        }
    }
    if (c.pipeline == Pipeline::mismatch && e.delta_mis.empty()) {
        add(d, "error", "ConfigInvalid", "estimation.delta_mis", "mismatch list is empty");
    }
    if (c.pipeline == Pipeline::imperfections && (im.eta_grid.empty() || im.gamma_grid.empty())) {
        add(d, "error", "ConfigInvalid", "imperfections", "eta_grid and gamma_grid must be non-empty");
    }
    if (c.pipeline != Pipeline::qfi_scan && m.kind != "two_level") {
        add(d, "error", "ConfigInvalid", "model.kind", to_string(c.pipeline) + " is defined for the two-level emitter");
    }
    if (e.singular_offset < 0.0) {
        add(d, "error", "ConfigInvalid", "estimation.singular_offset", "offset must be non-negative");
    }
    if (c.threads < 0) {
        add(d, "error", "ConfigInvalid", "threads", "thread count must be non-negative");
    }
    if (c.export_trajectories < 0) {
        add(d, "error", "ConfigInvalid", "export_trajectories", "count must be non-negative");
    }

    // Kraus step guard on the sensor generators across the longest evolution.
    bool has_error = false;
    for (const auto &x : d) {
        has_error |= x.severity == "error";
    }
    if (!has_error && grid_ok && !g.T.empty()) {
        try {
            double T = *std::max_element(g.T.begin(), g.T.end());
            SensorModel s = make_sensor(m, T);
            TimeGrid tg = make_grid(m, T, g.dt);
            std::vector<double> probe{0.0};
            if (!s.time_independent) {
                ThreeLevelSchedule sch;
                sch.plateau_T = T;
                sch.pulse_delay = m.pulse_delay;
                probe = {0.0, 0.5 * T, sch.t_c()};
            }
            double worst = 0.0;
            for (double t : probe) {
                CMatrix h = s.hamiltonian(t, s.theta0);
                CMatrix j = s.jump(t, s.theta0);
                worst = std::max(worst, g.dt * std::max(op_norm(h), op_norm(j.adjoint() * j)));
            }
            if (worst > StepGuard{}.limit) {
                add(d, "error", "StepTooLarge", "grid.dt",
                    "dt*max(|H|,|J^dag J|) = " + format_number(worst) + " exceeds 0.05");
            }
            (void)tg;
        } catch (const Error &err) {
            add(d, "error", to_string(err.code()), "model", err.detail());
        }
    }
    return d;
}

std::vector<Diagnostic> validate(const json &doc) {
    try {
        return validate(config_from_json(doc));
    } catch (const Error &err) {
        std::string msg = err.detail();
        std::string path = "$";
        auto colon = msg.find(": ");
        if (colon != std::string::npos) {
            path = msg.substr(0, colon);
            msg = msg.substr(colon + 2);
        }
        return {Diagnostic{"error", to_string(err.code()), path, msg}};
    }
}

// ---------------------------------------------------------------------------

const std::string *ResultBundle::table(const std::string &name) const {
    for (const auto &[k, v] : tables) {
        if (k == name) {
            return &v;
        }
    }
    return nullptr;
}

namespace {

std::string utc_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::uint64_t fnv1a(const std::string &s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

FisherOptions fisher_options(const ExperimentConfig &c) {
    FisherOptions f;
    f.eps = c.estimation.eps;
    f.n_traj = c.estimation.n_traj;
    f.seed = c.seed;
    f.threads = c.threads;
    return f;
}

QfiOptions qfi_options(const ExperimentConfig &c) {
    QfiOptions q;
    q.delta = c.estimation.qfi_delta;
    q.method = c.estimation.fd_method == "richardson" ? FdMethod::richardson : FdMethod::central_3pt;
    return q;
}

Imperfections imperfections_of(const ExperimentConfig &c) {
    Imperfections im;
    im.gamma = c.imperfections.gamma;
    im.gamma_dep = c.imperfections.gamma_dep;
    im.eta = c.imperfections.eta;
    return im;
}

CsvTable sweep_table() { return CsvTable({"parameter", "value", "std_error", "n_traj", "dt", "seed"}); }

void sweep_row(CsvTable &t, double parameter, const FisherEstimate &f) {
    t.row().cell(parameter).cell(f.value).cell(f.std_error).cell(f.n_traj).cell(f.dt).cell(f.seed);
}

std::string trajectory_csv(const CountingEngine &engine, std::uint64_t seed, std::uint64_t stream, int count) {
    CsvTable t({"index", "seed", "theta_true", "n_steps", "n_clicks", "log_likelihood", "bits"});
    for (int i = 0; i < count; ++i) {
        CountingRecord r = sample_trajectory(engine, seed, stream | static_cast<std::uint64_t>(i));
        t.row()
            .cell(static_cast<std::uint64_t>(i))
            .cell(seed)
            .cell(r.theta_true)
            .cell(r.n_steps)
            .cell(static_cast<int>(r.clicks.size()))
            .cell(r.log_likelihood)
            .text(r.bitstring());
    }
    return t.str();
}

std::string decoder_csv(const DecoderModel &dec) {
    std::ostringstream os;
    int stride = std::max<int>(1, static_cast<int>(dec.h.size() / 5000));
    write_decoder_csv(dec, os, stride);
    return os.str();
}

void run_qfi_scan(const ExperimentConfig &c, ResultBundle &b, json &summary) {
    const bool sample = c.estimation.n_traj > 0;
    const bool stationary = c.model.kind == "two_level";
    std::vector<std::string> header{"T", "I_E", "I_G"};
    if (sample && stationary) {
        header.insert(header.end(), {"F_decoder", "F_decoder_err", "F_decoder_matched"});
    }
    if (sample) {
        header.insert(header.end(), {"F_direct", "F_direct_err"});
    }
    header.insert(header.end(), {"n_traj", "dt", "seed"});
    CsvTable scan(header);
    CsvTable fd = sweep_table();
    CsvTable fdir = sweep_table();
    const Imperfections imp = imperfections_of(c);
    const FisherOptions fo = fisher_options(c);
    json adjustments = json::array();
    for (std::size_t k = 0; k < c.grid.T.size(); ++k) {
        const double T = c.grid.T[k];
        SensorModel s = make_sensor(c.model, T);
        TimeGrid grid = make_grid(c.model, T, c.grid.dt);
        QfiResult ie = env_qfi(s, s.theta0, grid, qfi_options(c));
        QfiResult ig = global_qfi(s, s.theta0, grid, qfi_options(c));
        adjustments.push_back({{"T", T},
                               {"env_delta", ie.delta},
                               {"env_window_reached", ie.window_reached},
                               {"global_delta", ig.delta},
                               {"global_window_reached", ig.window_reached}});
        scan.row().cell(T).cell(ie.value).cell(ig.value);
        if (sample && stationary) {
            DecoderModel matched = sweep_decoder(s, s.theta0, grid.dt);
            DecoderModel working = sweep_decoder(s, s.theta0 - c.estimation.singular_offset, grid.dt);
            CascadeGenerators gen = cascade_generators(s, &working, imp);
            FisherEstimate f = fisher_from_trajectories(gen, s.theta0, grid, fo);
            double fm = matched_point_fisher(s, matched, s.theta0, grid);
            scan.cell(f.value).cell(f.std_error).cell(fm);
            sweep_row(fd, T, f);
            if (k == 0) {
                b.tables.emplace_back("decoder.csv", decoder_csv(matched));
                CountingEngine eng(gen, s.theta0, grid);
                b.tables.emplace_back("trajectories.csv", trajectory_csv(eng, c.seed, 0, c.export_trajectories));
            }
        }
        if (sample) {
            CascadeGenerators direct = cascade_generators(s, nullptr, imp);
            FisherEstimate f = fisher_from_trajectories(direct, s.theta0, grid, fo);
            scan.cell(f.value).cell(f.std_error);
            sweep_row(fdir, T, f);
            if (k == 0 && !stationary) {
                CountingEngine eng(direct, s.theta0, grid);
                b.tables.emplace_back("trajectories.csv", trajectory_csv(eng, c.seed, 0, c.export_trajectories));
            }
        }
        scan.cell(c.estimation.n_traj).cell(c.grid.dt).cell(c.seed);
    }
    b.tables.emplace_back("qfi_scan.csv", scan.str());
    if (sample && stationary) {
        b.tables.emplace_back("fi_sweep_decoder.csv", fd.str());
    }
    if (sample) {
        b.tables.emplace_back("fi_sweep_direct.csv", fdir.str());
    }
    summary["qfi_steps"] = adjustments;
}

void run_mle(const ExperimentConfig &c, ResultBundle &b, json &summary) {
    const Imperfections imp = imperfections_of(c);
    const ModelConfig mc = c.model;
    const double dt = c.grid.dt;
    const double offset = c.estimation.decoder_offset;
    StudyFactory factory = [&](double T) {
        SensorModel s = make_sensor(mc, T);
        DecoderModel dec = sweep_decoder(s, s.theta0 - offset, dt);
        return StudySetup{cascade_generators(s, &dec, imp), make_grid(mc, T, dt)};
    };
    StudyOptions so;
    so.K = c.estimation.K;
    so.seed = c.seed;
    so.threads = c.threads;
    so.grid_points = c.estimation.theta_grid_points;
    so.width_factor = c.estimation.width_factor;
    so.half_width = c.estimation.theta_grid_halfwidth;
    so.fisher = fisher_options(c);
    SensorModel s0 = make_sensor(mc, c.grid.T.front());
    std::vector<StudyRow> rows = interrogation_study(factory, s0.theta0, c.grid.T, so);

    CsvTable study({"T", "inv_var_per_K", "fisher", "fisher_err", "K", "seed"});
    CsvTable diag({"T", "mean", "bias", "bias_bound", "var", "half_width", "widened", "grid_points"});
    CsvTable curves({"T", "theta", "log_likelihood"});
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const StudyRow &r = rows[j];
        study.row().cell(r.T).cell(r.inv_var_per_K).cell(r.fisher.value).cell(r.fisher.std_error).cell(r.K).cell(r.seed);
        diag.row()
            .cell(r.T)
            .cell(r.mean)
            .cell(r.bias)
            .cell(r.bias_bound)
            .cell(r.var)
            .cell(r.half_width)
            .cell(r.widened)
            .cell(so.grid_points);
        // The first interrogation of each T, replayed as a likelihood curve.
        StudySetup setup = factory(r.T);
        CountingEngine truth(setup.gen, s0.theta0, setup.grid);
        const std::uint64_t stream = static_cast<std::uint64_t>(j + 1) << 32;
        CountingRecord rec = sample_trajectory(truth, c.seed, stream);
        std::vector<double> thetas = linspace(s0.theta0 - r.half_width, s0.theta0 + r.half_width, so.grid_points);
        auto ll = likelihood_table(setup.gen, {rec}, thetas, setup.grid, 1).front();
        for (std::size_t k = 0; k < thetas.size(); ++k) {
            curves.row().cell(r.T).cell(thetas[k]).cell(ll[k]);
        }
        if (j == 0) {
            b.tables.emplace_back("trajectories.csv", trajectory_csv(truth, c.seed, stream, c.export_trajectories));
        }
    }
    b.tables.emplace_back("mle_study.csv", study.str());
    b.tables.emplace_back("mle_diagnostics.csv", diag.str());
    b.tables.emplace_back("likelihood_curves.csv", curves.str());
    summary["mle_method"] = "grid of " + std::to_string(so.grid_points) +
                            " points, half width width_factor/sqrt(F), parabola through the top three points";
}

void run_mismatch(const ExperimentConfig &c, ResultBundle &b, json &summary) {
    const double T = c.grid.T.front();
    SensorModel s = make_sensor(c.model, T);
    TimeGrid grid = make_grid(c.model, T, c.grid.dt);
    const Imperfections imp = imperfections_of(c);
    FisherOptions fo = fisher_options(c);
    MismatchSweep sw = mismatch_sweep(s, s.theta0, c.estimation.delta_mis, grid, fo, c.estimation.singular_offset, imp);
    CascadeGenerators direct = cascade_generators(s, nullptr, imp);
    FisherEstimate fdir = fisher_from_trajectories(direct, s.theta0, grid, fo);
    QfiResult ie = env_qfi(s, s.theta0, grid, qfi_options(c));

    CsvTable t({"parameter", "value", "std_error", "n_traj", "dt", "seed", "delta_mis_used"});
    for (const MismatchPoint &p : sw.points) {
        t.row()
            .cell(p.delta_mis)
            .cell(p.fisher.value)
            .cell(p.fisher.std_error)
            .cell(p.fisher.n_traj)
            .cell(p.fisher.dt)
            .cell(p.fisher.seed)
            .cell(p.delta_mis_used);
    }
    CsvTable sum({"T", "fwhm", "peak", "F_direct", "F_direct_err", "I_E"});
    sum.row().cell(T).cell(sw.fwhm).cell(sw.peak).cell(fdir.value).cell(fdir.std_error).cell(ie.value);
    b.tables.emplace_back("mismatch.csv", t.str());
    b.tables.emplace_back("mismatch_summary.csv", sum.str());
    summary["fwhm"] = sw.fwhm;
}

void run_imperfections(const ExperimentConfig &c, ResultBundle &b, json &summary) {
    const double T = c.grid.T.front();
    SensorModel s = make_sensor(c.model, T);
    TimeGrid grid = make_grid(c.model, T, c.grid.dt);
    FisherOptions fo = fisher_options(c);
    // Near the matched point the leak signal sits below the loss background,
    // so the grid uses the estimation offset of the decoder.
    DecoderModel dec = sweep_decoder(s, s.theta0 - c.estimation.decoder_offset, grid.dt);
    CascadeGenerators ideal_gen = cascade_generators(s, &dec);
    FisherEstimate ideal = fisher_from_trajectories(ideal_gen, s.theta0, grid, fo);
    CsvTable t({"eta", "gamma", "gamma_dep", "value", "std_error", "n_traj", "dt", "seed", "ratio_to_ideal"});
    for (double eta : c.imperfections.eta_grid) {
        for (double gamma : c.imperfections.gamma_grid) {
            Imperfections im;
            im.gamma = gamma;
            im.gamma_dep = c.imperfections.gamma_dep;
            im.eta = eta;
            CascadeGenerators gen = cascade_generators(s, &dec, im);
            FisherEstimate f = fisher_from_trajectories(gen, s.theta0, grid, fo);
            t.row()
                .cell(eta)
                .cell(gamma)
                .cell(im.dephasing())
                .cell(f.value)
                .cell(f.std_error)
                .cell(f.n_traj)
                .cell(f.dt)
                .cell(f.seed)
                .cell(ideal.value > 0.0 ? f.value / ideal.value : 0.0);
        }
    }
    b.tables.emplace_back("imperfections.csv", t.str());
    summary["ideal_fisher"] = ideal.value;
    summary["ideal_fisher_err"] = ideal.std_error;
}

}  // namespace

ResultBundle run(const ExperimentConfig &cfg) {
    std::vector<Diagnostic> diags = validate(cfg);
    for (const Diagnostic &d : diags) {
        if (d.severity == "error") {
            fail(ErrorCode::ConfigInvalid, d.path + ": " + d.message);
        }
    }
    ResultBundle b;
    b.config = config_to_json(cfg);
    json summary = json::object();
    const std::string started = utc_now();
    auto t0 = std::chrono::steady_clock::now();
    switch (cfg.pipeline) {
        case Pipeline::qfi_scan: run_qfi_scan(cfg, b, summary); break;
        case Pipeline::mle: run_mle(cfg, b, summary); break;
        case Pipeline::mismatch: run_mismatch(cfg, b, summary); break;
        case Pipeline::imperfections: run_imperfections(cfg, b, summary); break;
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json tables = json::array();
    for (const auto &[name, csv] : b.tables) {
        std::size_t rows = std::count(csv.begin(), csv.end(), '\n');
        char hash[17];
        std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(fnv1a(csv)));
        tables.push_back({{"file", name}, {"rows", rows > 0 ? rows - 1 : 0}, {"bytes", csv.size()}, {"fnv1a64", hash}});
    }
    b.provenance = {
        {"program", "qdec"},
        {"version", kVersion},
        {"started_utc", started},
        {"finished_utc", utc_now()},
        {"elapsed_seconds", elapsed},
        {"seed", cfg.seed},
        {"threads", resolve_threads(cfg.threads)},
        {"preset", to_string(cfg.preset)},
        {"pipeline", to_string(cfg.pipeline)},
        {"config", b.config},
        {"tolerances",
         {{"hermitian", LinalgTolerances::hermitian},
          {"psd_clip", LinalgTolerances::psd_clip},
          {"pinv", LinalgTolerances::pinv},
          {"step_guard", StepGuard{}.limit},
          {"click_probability_bound", 0.1},
          {"trace_drift", 1e-4},
          {"qfi_window", {1e-6, 1e-2}}}},
        {"methods",
         {{"kraus", "no-click and click maps right-multiplied by S^{-1/2}, S the completeness sum"},
          {"score", "central difference of the record log-likelihood at theta +- eps"},
          {"rng", "mt19937_64 per trajectory, seeded by seed_seq(seed, index)"},
          {"decoder_gauge", "stationary decoder in the gauge conjugating by s_ee - s_gg"},
          {"working_offset", cfg.estimation.singular_offset},
          {"decoder_offset", cfg.estimation.decoder_offset}}},
        {"summary", summary},
        {"tables", tables},
    };
    return b;
}

void write_bundle(const ResultBundle &bundle, const std::string &dir) {
    std::filesystem::create_directories(dir);
    for (const auto &[name, csv] : bundle.tables) {
        std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
        out << csv;
        if (!out) {
            fail(ErrorCode::InvalidArgument, "cannot write " + name + " in " + dir);
        }
    }
    std::ofstream prov(std::filesystem::path(dir) / "provenance.json", std::ios::binary);
    prov << bundle.provenance.dump(2) << '\n';
}

}  // namespace qdec
