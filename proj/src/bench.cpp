#include "modrec/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace modrec::bench {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;

}  // namespace

std::string to_string(Method m) { return m == Method::B2R2 ? "b2r2" : "hod"; }

Method parse_method(const std::string& name) {
    if (name == "b2r2") return Method::B2R2;
    if (name == "hod") return Method::HOD;
    throw InvalidArgument("unknown method '" + name + "'");
}

std::vector<std::string> ExperimentConfig::validate() const {
    std::vector<std::string> errs;
    if (lambda.empty()) errs.emplace_back("lambda: list must not be empty");
    for (double l : lambda)
        if (!(l > 0) || !std::isfinite(l)) errs.emplace_back("lambda: values must be positive and finite");
    if (of.empty()) errs.emplace_back("of: list must not be empty");
    for (double o : of)
        if (!(o > 1) || !std::isfinite(o)) errs.emplace_back("of: values must exceed 1");
    if (snr_db.empty()) errs.emplace_back("snr_db: list must not be empty");
    for (double s : snr_db)
        if (std::isnan(s) || s == -kNoNoise) errs.emplace_back("snr_db: values must be finite or inf");
    if (trials < 1) errs.emplace_back("trials: must be at least 1");
    if (methods.empty()) errs.emplace_back("methods: list must not be empty");
    if (!(signal.band_edge > 0)) errs.emplace_back("band_edge: must be positive");
    if (signal.num_pulses < 1) errs.emplace_back("num_pulses: must be at least 1");
    if (!(signal.center_spread >= 0)) errs.emplace_back("center_spread: must be non-negative");
    if (signal.kernel_power < 1) errs.emplace_back("kernel_power: must be at least 1");
    if (!(signal.window_tolerance > 0 && signal.window_tolerance < 1))
        errs.emplace_back("window_tolerance: must lie in (0, 1)");
    if (support_margin < 0) errs.emplace_back("support_margin: must be non-negative");
    try {
        pgd.validate();
    } catch (const std::exception& e) {
        errs.emplace_back(std::string("b2r2: ") + e.what());
    }
    if (hod.order < 1) errs.emplace_back("hod.order: must be at least 1");
    if (hod.max_order < 1) errs.emplace_back("hod.max_order: must be at least 1");
    if (!(hod.amplitude_bound > 0)) errs.emplace_back("hod.amplitude_bound: must be positive");
    return errs;
}

void apply_preset(ExperimentConfig& cfg, const std::string& preset) {
    if (preset == "desk") {
        cfg.trials = std::min(cfg.trials, 50);
    } else if (preset != "full") {
        throw InvalidArgument("unknown preset '" + preset + "' (expected desk or full)");
    }
}

std::vector<Cell> cells(const ExperimentConfig& cfg) {
    std::vector<Cell> out;
    for (double l : cfg.lambda)
        for (double o : cfg.of)
            for (double s : cfg.snr_db)
                for (Method m : cfg.methods) out.push_back({l, o, s, m});
    return out;
}

std::uint64_t trial_seed(std::uint64_t base_seed, const Cell& cell, int trial_index) {
    std::uint64_t h = splitmix64(base_seed);
    h = mix(h, std::bit_cast<std::uint64_t>(cell.lambda));
    h = mix(h, std::bit_cast<std::uint64_t>(cell.of));
    h = mix(h, std::bit_cast<std::uint64_t>(cell.snr_db));
    return mix(h, static_cast<std::uint64_t>(trial_index));
}

TrialData make_trial_data(const ExperimentConfig& cfg, const Cell& cell, std::uint64_t seed) {
    const auto& sp = cfg.signal;
    const auto model = generate_bandlimited<double>(seed, sp.band_edge, sp.num_pulses, sp.center_spread, sp.kernel_power);
    const double ts = std::numbers::pi / (sp.band_edge * cell.of);
    const auto half = window_half_length(model, ts, cell.lambda, sp.window_tolerance);

    TrialData d;
    d.clean = sample(model, ts, half);
    d.observed = add_noise(fold_signal(d.clean, cell.lambda), cell.snr_db, mix(seed, kNoiseStream));
    d.n_lambda = std::min<Eigen::Index>(compute_support_bound(d.clean, cell.lambda) + cfg.support_margin, half - 1);
    return d;
}

TrialReport run_trial(const ExperimentConfig& cfg, const Cell& cell, int trial_index) {
    const auto start = std::chrono::steady_clock::now();
    TrialReport r;
    r.cell = cell;
    r.trial = trial_index;
    r.seed = trial_seed(cfg.base_seed, cell, trial_index);

    const TrialData d = make_trial_data(cfg, cell, r.seed);
    r.n_lambda = static_cast<long>(d.n_lambda);
    r.window_half_length = static_cast<long>(d.clean.half_length());

    if (cell.method == Method::B2R2) {
        const auto band = band_rho(d.clean.band_edge, d.clean.sampling_interval, grid_size_for(d.clean.samples.size()));
        try {
            const auto rec = b2r2_recover(d.observed, d.n_lambda, band, cfg.pgd);
            r.mse_db = mse_db(rec.recovered, d.clean.samples);
            r.converged = rec.trace.converged();
        } catch (const DivergenceError&) {
            r.mse_db = mse_db(d.observed.samples, d.clean.samples);
            r.converged = false;
        }
    } else {
        const auto rec = hod_recover(d.observed, cfg.hod);
        r.mse_db = mse_db(rec.recovered, d.clean.samples);
        r.converged = rec.consistent && hod_condition_holds(d.clean, d.observed, rec.order);
    }
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

SweepTable aggregate(const std::vector<Cell>& order, std::vector<TrialReport> reports) {
    std::stable_sort(reports.begin(), reports.end(), [&](const TrialReport& a, const TrialReport& b) {
        auto rank = [&](const Cell& c) {
            return static_cast<std::size_t>(std::find(order.begin(), order.end(), c) - order.begin());
        };
        const auto ra = rank(a.cell), rb = rank(b.cell);
        return ra != rb ? ra < rb : a.trial < b.trial;
    });
    SweepTable t;
    for (const Cell& c : order) {
        SweepRow row{c, 0, 0, 0.0};
        double sum = 0;
        for (const auto& r : reports) {
            if (!(r.cell == c)) continue;
            ++row.trials;
            row.failures += r.converged ? 0 : 1;
            sum += r.mse_db;
        }
        if (row.trials > 0) {
            row.mean_mse_db = sum / row.trials;
            t.rows.push_back(row);
        }
    }
    t.reports = std::move(reports);
    return t;
}

SweepTable run_sweep(const ExperimentConfig& cfg, int parallelism) {
    if (const auto errs = cfg.validate(); !errs.empty()) throw InvalidArgument(errs.front());
    const auto order = cells(cfg);
    const std::size_t total = order.size() * static_cast<std::size_t>(cfg.trials);
    std::vector<TrialReport> reports(total);

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            const auto& cell = order[i / static_cast<std::size_t>(cfg.trials)];
            try {
                reports[i] = run_trial(cfg, cell, static_cast<int>(i % static_cast<std::size_t>(cfg.trials)));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = total;
            }
        }
    };
    const int threads = std::max(1, std::min<int>(parallelism, static_cast<int>(total)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
    return aggregate(order, std::move(reports));
}

}  // namespace modrec::bench
