#pragma once

// Seeded Monte-Carlo sweeps over (lambda, OF, SNR, method) cells.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "modrec/b2r2.hpp"
#include "modrec/hod.hpp"

namespace modrec::bench {

enum class Method { B2R2, HOD };

std::string to_string(Method m);
Method parse_method(const std::string& name);

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct SignalParams {
    double band_edge{std::numbers::pi};
    int num_pulses{4};
    double center_spread{4.0};
    int kernel_power{4};
    // Window edges satisfy |f| < window_tolerance * lambda.
    double window_tolerance{1e-6};
};

struct ExperimentConfig {
    std::vector<double> lambda;
    std::vector<double> of;
    std::vector<double> snr_db;  // kNoNoise for noiseless cells
    int trials{250};
    std::uint64_t base_seed{1};
    SignalParams signal;
    std::vector<Method> methods{Method::B2R2, Method::HOD};
    PgdOptions<double> pgd;
    HodOptions<double> hod;
    int support_margin{0};

    /// Every problem with the configuration, empty when valid.
    std::vector<std::string> validate() const;
};

/// Parses a JSON config; unknown keys and invalid values are reported together.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// "desk" caps trials per cell at 50, "full" leaves the config unchanged.
void apply_preset(ExperimentConfig& cfg, const std::string& preset);

struct Cell {
    double lambda{0};
    double of{0};
    double snr_db{kNoNoise};
    Method method{Method::B2R2};

    bool operator==(const Cell&) const = default;
};

struct TrialReport {
    Cell cell;
    int trial{0};
    std::uint64_t seed{0};
    double mse_db{0};
    bool converged{false};
    long n_lambda{0};
    long window_half_length{0};
    double wall_time_s{0};
};

struct SweepRow {
    Cell cell;
    int trials{0};
    int failures{0};
    double mean_mse_db{0};

    bool operator==(const SweepRow&) const = default;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    std::vector<TrialReport> reports;  // per-trial detail; not part of the CSV table
};

/// Cells in config order: lambda, then OF, then SNR, then method.
std::vector<Cell> cells(const ExperimentConfig& cfg);

/// Seed of a trial, a hash of (base seed, lambda, OF, SNR, trial index). The
/// method is left out so every method sees the same signal and noise.
std::uint64_t trial_seed(std::uint64_t base_seed, const Cell& cell, int trial_index);

/// The ground-truth pieces of one trial, before any recovery runs.
struct TrialData {
    SampledSignal<double> clean;
    FoldedSignal<double> observed;
    Eigen::Index n_lambda{0};
};

TrialData make_trial_data(const ExperimentConfig& cfg, const Cell& cell, std::uint64_t seed);

TrialReport run_trial(const ExperimentConfig& cfg, const Cell& cell, int trial_index);

/// Runs all cells x trials on up to `parallelism` threads; the result does not
/// depend on the thread count.
SweepTable run_sweep(const ExperimentConfig& cfg, int parallelism);

/// Groups reports by cell (in `order`) and averages their mse_db.
SweepTable aggregate(const std::vector<Cell>& order, std::vector<TrialReport> reports);

// CSV: lambda,of,snr_db,method,trials,failures,mean_mse_db
void write_table(std::ostream& out, const SweepTable& table);
SweepTable read_table(std::istream& in);
void save_table(const std::string& path, const SweepTable& table);
SweepTable load_table(const std::string& path);

// CSV: lambda,of,snr_db,method,trial,seed,converged,mse_db,n_lambda,wall_time_s
void write_reports(std::ostream& out, const std::vector<TrialReport>& reports);

/// Fixed-width text rendering of a table.
void print_table(std::ostream& out, const SweepTable& table);

/// Shortest decimal that round-trips the double ("inf" for infinity).
std::string format_number(double v);
double parse_number(const std::string& text);

}  // namespace modrec::bench
