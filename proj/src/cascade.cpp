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

#include "qdec/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qdec/errors.hpp"
#include "qdec/parallel.hpp"

namespace qdec {

namespace {

// Per-bin tables above this size are rebuilt on demand instead.
constexpr double kTableBytesLimit = 256.0 * 1024 * 1024;

CMatrix sigma_z(int d) {
    CMatrix z = CMatrix::Zero(d, d);
    z(basis::e, basis::e) = 1.0;
    z(basis::g, basis::g) = -1.0;
    return z;
}

CMatrix superop(const CMatrix &a) { return kron(a.conjugate(), a); }

}  // namespace

CascadeGenerators::CascadeGenerators(SensorModel sensor, std::shared_ptr<const DecoderModel> dec, Imperfections imp,
                                     CascadeStart start)
    : sensor_(std::move(sensor)), dec_(std::move(dec)), imp_(imp), dim_s_(sensor_.dim) {
    if (imp_.gamma < 0.0 || imp_.dephasing() < 0.0) {
        fail(ErrorCode::NonpositiveRate, "imperfection rates must be non-negative");
    }
    if (!(imp_.eta >= 0.0 && imp_.eta <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "detector efficiency must lie in [0, 1]");
    }
    if (dec_) {
        if (dec_->dim != dim_s_) {
            fail(ErrorCode::DimensionMismatch, "decoder dimension " + std::to_string(dec_->dim) +
                                                   " differs from sensor dimension " + std::to_string(dim_s_));
        }
        dim_d_ = dec_->dim;
    }
    const CMatrix id_s = CMatrix::Identity(dim_s_, dim_s_);
    const CMatrix id_d = CMatrix::Identity(dim_d_, dim_d_);

    if (!dec_) {
        psi0_ = sensor_.initial_state;
    } else if (start == CascadeStart::purified) {
        psi0_ = row_major_vec(dec_->joint_choi);
    } else {
        psi0_ = kron(sensor_.initial_state, dec_->initial_state_d.normalized());
    }
    psi0_.normalize();

    // Unmonitored channels on each factor, in the computational basis.
    auto add_pair = [&](const CMatrix &op, double rate) {
        if (rate <= 0.0) {
            return;
        }
        extra_.push_back(std::sqrt(rate) * kron(op, id_d));
        if (dec_) {
            extra_.push_back(std::sqrt(rate) * kron(id_s, op));
        }
    };
    add_pair(ketbra(dim_s_, basis::g, basis::e), imp_.gamma);
    add_pair(sigma_z(dim_s_), imp_.dephasing());
}

bool CascadeGenerators::time_independent() const {
    return sensor_.time_independent && (!dec_ || dec_->stationary || dec_->h.size() <= 1);
}

CMatrix CascadeGenerators::h_casc(double t, double theta) const {
    if (!dec_) {
        return CMatrix::Zero(dim(), dim());
    }
    CMatrix js = kron(sensor_.jump(t, theta), CMatrix::Identity(dim_d_, dim_d_));
    CMatrix jd = kron(CMatrix::Identity(dim_s_, dim_s_), dec_->jump_d(t));
    return 0.5 * kI * (jd * js.adjoint() - js * jd.adjoint());
}

CMatrix CascadeGenerators::h_total(double t, double theta) const {
    CMatrix hs = sensor_.hamiltonian(t, theta);
    if (!dec_) {
        return hs;
    }
    return kron(hs, CMatrix::Identity(dim_d_, dim_d_)) +
           kron(CMatrix::Identity(dim_s_, dim_s_), dec_->hamiltonian_d(t)) + h_casc(t, theta);
}

CMatrix CascadeGenerators::j_total(double t, double theta) const {
    CMatrix js = sensor_.jump(t, theta);
    if (!dec_) {
        return js;
    }
    return kron(js, CMatrix::Identity(dim_d_, dim_d_)) + kron(CMatrix::Identity(dim_s_, dim_s_), dec_->jump_d(t));
}

CascadeGenerators cascade_generators(const SensorModel &sensor, const DecoderModel *dec, const Imperfections &imp,
                                     CascadeStart start) {
    std::shared_ptr<const DecoderModel> d;
    if (dec) {
        d = std::make_shared<const DecoderModel>(*dec);
    }
    return CascadeGenerators(sensor, std::move(d), imp, start);
}

// ---------------------------------------------------------------------------

CountingEngine::CountingEngine(const CascadeGenerators &gen, double theta, const TimeGrid &grid, StepGuard guard)
    : gen_(&gen), theta_(theta), grid_(grid), guard_(guard) {
    const Imperfections &imp = gen.imperfections();
    pure_ = gen.extra_lindblad().empty() && imp.eta == 1.0;
    homogeneous_ = gen.time_independent();
    const int d = gen.dim();
    state_dim_ = pure_ ? d : d * d;

    if (homogeneous_) {
        table_.push_back(build(0));
        powers_.push_back(table_[0].no_click);
        for (std::int64_t span = 2; span <= grid_.n_steps; span *= 2) {
            powers_.push_back(powers_.back() * powers_.back());
        }
        return;
    }
    double bytes = 2.0 * grid_.n_steps * static_cast<double>(state_dim_) * state_dim_ * sizeof(cplx);
    if (bytes <= kTableBytesLimit) {
        table_.reserve(grid_.n_steps);
        for (int n = 0; n < grid_.n_steps; ++n) {
            table_.push_back(build(n));
        }
    } else {
        // Validate every bin once so guard failures surface at construction.
        for (int n = 0; n < grid_.n_steps; ++n) {
            build(n);
        }
    }
}

BinInstrument CountingEngine::build(int n) const {
    const double t = grid_.t(n);
    const double dt = grid_.dt;
    const int d = gen_->dim();
    const double eta = gen_->detector_eta();
    CMatrix h = gen_->h_total(t, theta_);
    CMatrix j = gen_->j_total(t, theta_);
    CMatrix jj = j.adjoint() * j;
    if (guard_.enabled) {
        double size = dt * std::max(op_norm(h), op_norm(jj));
        if (size > guard_.limit) {
            fail(ErrorCode::StepTooLarge, "cascade step size " + std::to_string(size) + " at t=" + std::to_string(t) +
                                              " exceeds " + std::to_string(guard_.limit));
        }
        double p1_bound = eta * dt * op_norm(jj);
        if (p1_bound > 0.1) {
            fail(ErrorCode::ClickProbabilityOverflow,
                 "click probability bound " + std::to_string(p1_bound) + " per bin exceeds 0.1");
        }
    }
    CMatrix ll = CMatrix::Zero(d, d);
    for (const CMatrix &l : gen_->extra_lindblad()) {
        ll += l.adjoint() * l;
    }
    const CMatrix id = CMatrix::Identity(d, d);
    CMatrix m0 = id - kI * dt * h - 0.5 * dt * (jj + ll);
    CMatrix s = m0.adjoint() * m0 + dt * (jj + ll);
    CMatrix w = pd_inv_sqrt(s);
    CMatrix a0 = m0 * w;
    CMatrix a1 = std::sqrt(dt) * j * w;

    BinInstrument out;
    if (pure_) {
        out.no_click = a0;
        out.click = a1;
        return out;
    }
    CMatrix s1 = superop(a1);
    out.no_click = superop(a0) + (1.0 - eta) * s1;
    for (const CMatrix &l : gen_->extra_lindblad()) {
        out.no_click += superop(std::sqrt(dt) * l * w);
    }
    out.click = eta * s1;
    return out;
}

BinInstrument CountingEngine::instrument(int n) const {
    if (homogeneous_) {
        return table_.front();
    }
    if (!table_.empty()) {
        return table_[n];
    }
    return build(n);
}

const BinInstrument &CountingEngine::instrument(int n, BinInstrument &scratch) const {
    if (homogeneous_) {
        return table_.front();
    }
    if (!table_.empty()) {
        return table_[n];
    }
    scratch = build(n);
    return scratch;
}

CVector CountingEngine::initial() const {
    const CVector &psi = gen_->initial_state();
    if (pure_) {
        return psi;
    }
    CMatrix rho = psi * psi.adjoint();
    return Eigen::Map<const CVector>(rho.data(), rho.size());
}

double CountingEngine::prob(const CVector &v) const {
    if (pure_) {
        return v.squaredNorm();
    }
    const int d = gen_->dim();
    double tr = 0.0;
    for (int k = 0; k < d; ++k) {
        tr += v(k * (d + 1)).real();
    }
    return tr;
}

void CountingEngine::normalize(CVector &v) const { v /= pure_ ? std::sqrt(prob(v)) : prob(v); }

CVector CountingEngine::advance(const CVector &v, std::int64_t m) const {
    CVector w = v;
    for (int b = static_cast<int>(powers_.size()) - 1; b >= 0; --b) {
        if (m & (std::int64_t{1} << b)) {
            w = powers_[b] * w;
        }
    }
    return w;
}

CMatrix CountingEngine::density(const CVector &v) const {
    if (pure_) {
        return v * v.adjoint() / v.squaredNorm();
    }
    const int d = gen_->dim();
    CMatrix rho = Eigen::Map<const CMatrix>(v.data(), d, d);
    return rho / prob(v);
}

// ---------------------------------------------------------------------------

std::vector<bool> CountingRecord::bits() const {
    std::vector<bool> b(n_steps, false);
    for (int c : clicks) {
        b[c] = true;
    }
    return b;
}

std::string CountingRecord::bitstring() const {
    std::string s(n_steps, '0');
    for (int c : clicks) {
        s[c] = '1';
    }
    return s;
}

namespace {

// Largest m <= rem with prob(L0^m v) >= target, built from the highest power
// down; returns L0^m v and leaves m in `m`.
CVector survive(const CountingEngine &e, const CVector &v, double target, std::int64_t rem, std::int64_t &m) {
    const auto &pw = e.powers();
    CVector w = v;
    m = 0;
    for (int b = static_cast<int>(pw.size()) - 1; b >= 0; --b) {
        std::int64_t step = std::int64_t{1} << b;
        if (m + step > rem) {
            continue;
        }
        CVector trial = pw[b] * w;
        if (e.prob(trial) >= target) {
            w = std::move(trial);
            m += step;
        }
    }
    return w;
}

CountingRecord lifted_sample(const CountingEngine &e, std::uint64_t seed, std::uint64_t index) {
    StreamRng rng(seed, index);
    CountingRecord rec;
    rec.n_steps = e.n_steps();
    rec.theta_true = e.theta();
    rec.seed = seed;
    rec.index = index;
    BinInstrument scratch;
    const BinInstrument &ins = e.instrument(0, scratch);
    CVector v = e.initial();
    e.normalize(v);
    std::int64_t pos = 0;
    const std::int64_t n = e.n_steps();
    while (pos < n) {
        double u = rng.uniform();
        std::int64_t m = 0;
        CVector w = survive(e, v, u * e.prob(v), n - pos, m);
        pos += m;
        if (pos == n) {
            rec.log_likelihood += std::log(e.prob(w));
            break;
        }
        v = ins.click * w;
        rec.log_likelihood += std::log(e.prob(v));
        e.normalize(v);
        rec.clicks.push_back(static_cast<int>(pos));
        ++pos;
    }
    return rec;
}

double lifted_replay(const CountingEngine &e, const CountingRecord &rec) {
    BinInstrument scratch;
    const BinInstrument &ins = e.instrument(0, scratch);
    CVector v = e.initial();
    e.normalize(v);
    double ll = 0.0;
    std::int64_t pos = 0;
    for (int c : rec.clicks) {
        CVector w = e.advance(v, c - pos);
        v = ins.click * w;
        ll += std::log(e.prob(v));
        e.normalize(v);
        pos = c + 1;
    }
    if (pos < rec.n_steps) {
        CVector w = e.advance(v, rec.n_steps - pos);
        ll += std::log(e.prob(w));
    }
    return ll;
}

void check_length(const CountingEngine &e, const CountingRecord &rec) {
    if (rec.n_steps != e.n_steps()) {
        fail(ErrorCode::RecordLengthMismatch, "record has " + std::to_string(rec.n_steps) + " bins, grid has " +
                                                  std::to_string(e.n_steps()));
    }
    for (std::size_t k = 0; k < rec.clicks.size(); ++k) {
        if (rec.clicks[k] < 0 || rec.clicks[k] >= rec.n_steps || (k && rec.clicks[k] <= rec.clicks[k - 1])) {
            fail(ErrorCode::InvalidArgument, "record click indices must be ascending and inside the grid");
        }
    }
}

}  // namespace

CountingRecord sample_trajectory_stepwise(const CountingEngine &e, std::uint64_t seed, std::uint64_t index,
                                          const StateAudit &audit) {
    StreamRng rng(seed, index);
    CountingRecord rec;
    rec.n_steps = e.n_steps();
    rec.theta_true = e.theta();
    rec.seed = seed;
    rec.index = index;
    CVector v = e.initial();
    e.normalize(v);
    BinInstrument scratch;
    for (int n = 0; n < e.n_steps(); ++n) {
        const BinInstrument &ins = e.instrument(n, scratch);
        CVector dark = ins.no_click * v;
        CVector bright = ins.click * v;
        double p_dark = e.prob(dark);
        double p_bright = e.prob(bright);
        double u = rng.uniform();
        if (u * (p_dark + p_bright) < p_bright) {
            v = std::move(bright);
            rec.clicks.push_back(n);
        } else {
            v = std::move(dark);
        }
        rec.log_likelihood += std::log(e.prob(v));
        e.normalize(v);
        if (audit) {
            audit(n, e.density(v));
        }
    }
    return rec;
}

double record_log_likelihood_stepwise(const CountingEngine &e, const CountingRecord &rec) {
    check_length(e, rec);
    CVector v = e.initial();
    e.normalize(v);
    double ll = 0.0;
    std::size_t next = 0;
    BinInstrument scratch;
    for (int n = 0; n < e.n_steps(); ++n) {
        const BinInstrument &ins = e.instrument(n, scratch);
        bool click = next < rec.clicks.size() && rec.clicks[next] == n;
        if (click) {
            ++next;
        }
        v = (click ? ins.click : ins.no_click) * v;
        ll += std::log(e.prob(v));
        e.normalize(v);
    }
    return ll;
}

CountingRecord sample_trajectory(const CountingEngine &engine, std::uint64_t seed, std::uint64_t index,
                                 const StateAudit &audit) {
    if (engine.homogeneous() && !audit) {
        return lifted_sample(engine, seed, index);
    }
    return sample_trajectory_stepwise(engine, seed, index, audit);
}

CountingRecord sample_trajectory(const CascadeGenerators &gen, double theta_true, const TimeGrid &grid,
                                 std::uint64_t seed) {
    CountingEngine engine(gen, theta_true, grid);
    return sample_trajectory(engine, seed, 0);
}

double record_log_likelihood(const CountingEngine &engine, const CountingRecord &record) {
    check_length(engine, record);
    if (engine.homogeneous()) {
        return lifted_replay(engine, record);
    }
    return record_log_likelihood_stepwise(engine, record);
}

double record_log_likelihood(const CascadeGenerators &gen, double theta, const CountingRecord &record,
                             const TimeGrid &grid) {
    CountingEngine engine(gen, theta, grid);
    return record_log_likelihood(engine, record);
}

// ---------------------------------------------------------------------------

namespace {

struct MomentPair {
    double mean = 0.0;
    double se = 0.0;
};

MomentPair moments(const std::vector<double> &x) {
    MomentPair m;
    const double n = static_cast<double>(x.size());
    if (x.empty()) {
        return m;
    }
    for (double v : x) {
        m.mean += v;
    }
    m.mean /= n;
    if (x.size() > 1) {
        double ss = 0.0;
        for (double v : x) {
            ss += (v - m.mean) * (v - m.mean);
        }
        m.se = std::sqrt(ss / (n - 1.0) / n);
    }
    return m;
}

}  // namespace

FisherEstimate fisher_from_trajectories(const CascadeGenerators &gen, double theta, const TimeGrid &grid,
                                        const FisherOptions &opt) {
    if (opt.n_traj < 1) {
        fail(ErrorCode::InvalidArgument, "n_traj must be positive");
    }
    if (!(opt.eps > 0.0)) {
        fail(ErrorCode::InvalidArgument, "score step must be positive");
    }
    const double eps = opt.eps;
    CountingEngine e0(gen, theta, grid, opt.guard);
    CountingEngine ep(gen, theta + eps, grid, opt.guard);
    CountingEngine em(gen, theta - eps, grid, opt.guard);
    const int n = opt.n_traj;
    const int n_half = opt.halving_check ? std::max(1, n / 10) : 0;
    std::optional<CountingEngine> hp, hm;
    if (n_half > 0) {
        hp.emplace(gen, theta + 0.5 * eps, grid, opt.guard);
        hm.emplace(gen, theta - 0.5 * eps, grid, opt.guard);
    }

    std::vector<double> score(n), score_half(n_half), clicks(n);
    parallel_for(n, opt.threads, [&](std::int64_t i) {
        CountingRecord rec = sample_trajectory(e0, opt.seed, static_cast<std::uint64_t>(i));
        double lp = record_log_likelihood(ep, rec);
        double lm = record_log_likelihood(em, rec);
        score[i] = (lp - lm) / (2.0 * eps);
        clicks[i] = static_cast<double>(rec.clicks.size());
        if (i < n_half) {
            score_half[i] = (record_log_likelihood(*hp, rec) - record_log_likelihood(*hm, rec)) / eps;
        }
    });

    std::vector<double> sq(n);
    for (int i = 0; i < n; ++i) {
        sq[i] = score[i] * score[i];
    }
    MomentPair fi = moments(sq);
    MomentPair sc = moments(score);
    FisherEstimate out;
    out.value = fi.mean;
    out.std_error = fi.se;
    out.n_traj = n;
    out.eps = eps;
    out.T = grid.t_end - grid.t_start;
    out.dt = grid.dt;
    out.seed = opt.seed;
    out.mean_score = sc.mean;
    out.mean_score_se = sc.se;
    out.mean_clicks = moments(clicks).mean;
    if (n_half > 0) {
        double full = 0.0, half = 0.0;
        for (int i = 0; i < n_half; ++i) {
            full += sq[i];
            half += score_half[i] * score_half[i];
        }
        out.halving_ratio = full > 0.0 ? half / full : 1.0;
    }
    return out;
}

// ---------------------------------------------------------------------------

DecoderModel sweep_decoder(const SensorModel &sensor, double theta_design, std::optional<double> dt) {
    CMatrix u = CMatrix::Identity(sensor.dim, sensor.dim);
    u(basis::g, basis::g) = -1.0;
    CMatrix w = conjugating_gauge(sensor, theta_design, u);
    return stationary_decoder(sensor, theta_design, w, dt);
}

MismatchSweep mismatch_sweep(const SensorModel &sensor, double theta, const std::vector<double> &delta_mis,
                             const TimeGrid &grid, const FisherOptions &opt, double singular_offset,
                             const Imperfections &imp) {
    MismatchSweep sweep;
    std::vector<double> x, y;
    for (double dm : delta_mis) {
        MismatchPoint p;
        p.delta_mis = dm;
        p.delta_mis_used = dm;
        if (std::abs(dm) < singular_offset) {
            p.delta_mis_used = dm < 0.0 ? -singular_offset : singular_offset;
        }
        DecoderModel dec = sweep_decoder(sensor, theta - p.delta_mis_used, grid.dt);
        CascadeGenerators gen = cascade_generators(sensor, &dec, imp);
        p.fisher = fisher_from_trajectories(gen, theta, grid, opt);
        x.push_back(p.delta_mis);
        y.push_back(p.fisher.value);
        sweep.points.push_back(p);
    }
    if (!y.empty()) {
        sweep.peak = *std::max_element(y.begin(), y.end());
    }
    sweep.fwhm = fwhm(x, y);
    return sweep;
}

double fwhm(const std::vector<double> &x, const std::vector<double> &y) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (x.size() != y.size() || x.size() < 3) {
        return nan;
    }
    std::size_t k = std::max_element(y.begin(), y.end()) - y.begin();
    const double half = 0.5 * y[k];
    auto cross = [&](std::size_t a, std::size_t b) {
        return x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
    };
    double left = nan, right = nan;
    for (std::size_t i = k; i-- > 0;) {
        if (y[i] < half) {
            left = cross(i, i + 1);
            break;
        }
    }
    for (std::size_t i = k + 1; i < y.size(); ++i) {
        if (y[i] < half) {
            right = cross(i - 1, i);
            break;
        }
    }
    return right - left;
}

}  // namespace qdec
