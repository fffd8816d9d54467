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

#include "qdec/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qdec/errors.hpp"
#include "qdec/parallel.hpp"

namespace qdec {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> x(n);
    for (int k = 0; k < n; ++k) {
        x[k] = n == 1 ? a : a + (b - a) * k / (n - 1);
    }
    return x;
}

double refine_argmax(const std::vector<double> &x, const std::vector<double> &y, bool *flat) {
    if (x.size() != y.size() || x.size() < 3) {
        fail(ErrorCode::InvalidArgument, "likelihood curve needs at least three points");
    }
    auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    bool is_flat = std::isfinite(*hi) && *hi - *lo <= 1e-9;
    if (flat) {
        *flat = is_flat;
    }
    if (is_flat) {
        return 0.5 * (x.front() + x.back());
    }
    std::size_t k = hi - y.begin();
    if (k == 0 || k + 1 == y.size()) {
        fail(ErrorCode::GridTooNarrow, "likelihood maximum at grid boundary " + std::to_string(x[k]));
    }
    double y0 = y[k - 1], y1 = y[k], y2 = y[k + 1];
    double curv = y0 - 2.0 * y1 + y2;
    if (!(curv < 0.0)) {
        return x[k];
    }
    double h = 0.5 * (x[k + 1] - x[k - 1]);
    double shift = 0.5 * h * (y0 - y2) / curv;
    return std::clamp(x[k] + shift, x[k - 1], x[k + 1]);
}

std::vector<std::vector<double>> likelihood_table(const CascadeGenerators &gen,
                                                  const std::vector<CountingRecord> &records,
                                                  const std::vector<double> &theta_grid, const TimeGrid &grid,
                                                  int threads, StepGuard guard) {
    std::vector<std::vector<double>> out(records.size(), std::vector<double>(theta_grid.size()));
    for (std::size_t k = 0; k < theta_grid.size(); ++k) {
        CountingEngine engine(gen, theta_grid[k], grid, guard);
        parallel_for(static_cast<std::int64_t>(records.size()), threads,
                     [&](std::int64_t i) { out[i][k] = record_log_likelihood(engine, records[i]); });
    }
    return out;
}

LikelihoodCurve likelihood_curve(const CascadeGenerators &gen, const CountingRecord &record,
                                 const std::vector<double> &theta_grid, const TimeGrid &grid, StepGuard guard) {
    if (!std::is_sorted(theta_grid.begin(), theta_grid.end())) {
        fail(ErrorCode::InvalidArgument, "theta grid must be sorted");
    }
    LikelihoodCurve c;
    c.theta_grid = theta_grid;
    c.log_likelihoods = likelihood_table(gen, {record}, theta_grid, grid, 1, guard).front();
    c.record_seed = record.seed;
    c.record_index = record.index;
    c.argmax = refine_argmax(c.theta_grid, c.log_likelihoods, &c.flat);
    return c;
}

std::vector<StudyRow> interrogation_study(const StudyFactory &factory, double theta_true,
                                          const std::vector<double> &T_list, const StudyOptions &opt) {
    if (opt.K < 2) {
        fail(ErrorCode::InvalidArgument, "interrogation study needs K >= 2");
    }
    std::vector<StudyRow> rows;
    for (std::size_t j = 0; j < T_list.size(); ++j) {
        const double T = T_list[j];
        StudySetup setup = factory(T);
        StudyRow row;
        row.T = T;
        row.K = opt.K;
        row.seed = opt.seed;
        row.fisher = fisher_from_trajectories(setup.gen, theta_true, setup.grid, opt.fisher);
        double hw = opt.half_width;
        if (!(hw > 0.0)) {
            if (!(row.fisher.value > 0.0)) {
                fail(ErrorCode::InvalidArgument, "zero Fisher information leaves the estimate grid undefined");
            }
            hw = opt.width_factor / std::sqrt(row.fisher.value);
        }
        row.half_width = hw;

        CountingEngine truth(setup.gen, theta_true, setup.grid, opt.fisher.guard);
        std::vector<CountingRecord> records(opt.K);
        const std::uint64_t stream = static_cast<std::uint64_t>(j + 1) << 32;
        parallel_for(opt.K, opt.threads, [&](std::int64_t i) {
            records[i] = sample_trajectory(truth, opt.seed, stream | static_cast<std::uint64_t>(i));
        });

        std::vector<double> est(opt.K, 0.0);
        std::vector<std::size_t> pending(opt.K);
        for (int i = 0; i < opt.K; ++i) {
            pending[i] = i;
        }
        double width = hw;
        for (int attempt = 0; attempt <= opt.max_widenings && !pending.empty(); ++attempt) {
            std::vector<double> thetas = linspace(theta_true - width, theta_true + width, opt.grid_points);
            std::vector<CountingRecord> batch;
            batch.reserve(pending.size());
            for (std::size_t i : pending) {
                batch.push_back(records[i]);
            }
            auto table = likelihood_table(setup.gen, batch, thetas, setup.grid, opt.threads, opt.fisher.guard);
            std::vector<std::size_t> still;
            for (std::size_t b = 0; b < batch.size(); ++b) {
                try {
                    est[pending[b]] = refine_argmax(thetas, table[b]);
                } catch (const Error &e) {
                    if (e.code() != ErrorCode::GridTooNarrow) {
                        throw;
                    }
                    still.push_back(pending[b]);
                }
            }
            if (attempt > 0) {
                row.widened += static_cast<int>(pending.size() - still.size());
            }
            pending = std::move(still);
            width *= 2.0;
        }
        if (!pending.empty()) {
            fail(ErrorCode::GridTooNarrow, std::to_string(pending.size()) + " records at T=" + std::to_string(T) +
                                               " peak outside the widened grid");
        }
        double mean = 0.0;
        for (double v : est) {
            mean += v;
        }
        mean /= opt.K;
        double ss = 0.0;
        for (double v : est) {
            ss += (v - mean) * (v - mean);
        }
        row.var = ss / (opt.K - 1);
        row.mean = mean;
        row.bias = mean - theta_true;
        row.bias_bound = 3.0 * std::sqrt(row.var / opt.K);
        row.inv_var_per_K = row.var > 0.0 ? 1.0 / row.var : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace qdec
