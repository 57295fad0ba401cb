// modrec: simulate modulo sampling, recover true samples, run and report sweeps.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 recovery flagged as not converged.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>

#include <CLI11.hpp>

#include "modrec/bench.hpp"
#include "modrec/signal_io.hpp"

namespace {

using namespace modrec;
using bench::format_number;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;

struct SimulateArgs {
    double lambda{0};
    double of{0};
    std::string snr_db{"inf"};
    std::uint64_t seed{1};
    std::string out;
    bench::SignalParams signal;
};

struct RecoverArgs {
    std::string method{"b2r2"};
    std::string in;
    std::string out;
    long n_lambda{-1};
    int max_iters{2000};
    double rel_cost_tol{1e-12};
    int order{0};
};

struct SweepArgs {
    std::string config;
    std::string out;
    std::string raw;
    std::string preset{"full"};
    int parallelism{0};
};

int default_parallelism() {
    if (const char* env = std::getenv("MODREC_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

int run_simulate(const SimulateArgs& a) {
    bench::ExperimentConfig cfg;
    cfg.signal = a.signal;
    const bench::Cell cell{a.lambda, a.of, bench::parse_number(a.snr_db), bench::Method::B2R2};
    if (!(cell.lambda > 0) || !(cell.of > 1)) throw InvalidArgument("--lambda must be positive and --of above 1");
    const auto d = bench::make_trial_data(cfg, cell, a.seed);

    io::SignalFile file;
    file.metadata = {
        {"band_edge", format_number(d.clean.band_edge)},
        {"kernel_power", std::to_string(a.signal.kernel_power)},
        {"lambda", format_number(a.lambda)},
        {"n_lambda", std::to_string(d.n_lambda)},
        {"noise_variance", format_number(d.observed.noise_variance)},
        {"of", format_number(a.of)},
        {"seed", std::to_string(a.seed)},
        {"snr_db", format_number(cell.snr_db)},
        {"ts", format_number(d.clean.sampling_interval)},
    };
    const long half = static_cast<long>(d.clean.half_length());
    for (long n = -half; n <= half; ++n) file.n.push_back(n);
    file.truth.emplace(d.clean.samples.begin(), d.clean.samples.end());
    file.folded.assign(d.observed.samples.begin(), d.observed.samples.end());

    auto out = open_output(a.out);
    io::write_signal(out, file);
    return kExitOk;
}

int run_recover(const RecoverArgs& a) {
    std::ifstream in(a.in, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + a.in + "'");
    const io::SignalFile file = io::read_signal(in);

    const auto lambda = file.number("lambda");
    if (!lambda) throw InvalidArgument("input lacks lambda metadata");
    const double band_edge = file.number("band_edge").value_or(std::numbers::pi);
    double ts = 0;
    if (auto v = file.number("ts")) ts = *v;
    else if (auto of = file.number("of")) ts = std::numbers::pi / (band_edge * *of);
    else throw InvalidArgument("input lacks ts or of metadata");

    FoldedSignal<double> folded;
    folded.samples = Eigen::Map<const Eigen::VectorXd>(file.folded.data(), static_cast<Eigen::Index>(file.folded.size()));
    folded.threshold = *lambda;
    folded.sampling_interval = ts;
    folded.band_edge = band_edge;
    const auto snr = file.number("snr_db");
    folded.noisy = snr && std::isfinite(*snr);

    std::optional<SampledSignal<double>> truth;
    if (file.truth) {
        truth.emplace();
        truth->samples = Eigen::Map<const Eigen::VectorXd>(file.truth->data(), static_cast<Eigen::Index>(file.truth->size()));
        truth->sampling_interval = ts;
        truth->band_edge = band_edge;
    }

    Eigen::VectorXd recovered;
    bool converged = false;
    if (a.method == "b2r2") {
        long n_lambda = a.n_lambda;
        if (n_lambda < 0) {
            if (auto v = file.number("n_lambda")) n_lambda = static_cast<long>(*v);
            else if (truth) n_lambda = static_cast<long>(compute_support_bound(*truth, *lambda));
            else throw InvalidArgument("support bound unknown: pass --n-lambda");
        }
        PgdOptions<double> opts;
        opts.max_iters = a.max_iters;
        opts.rel_cost_tol = a.rel_cost_tol;
        const auto band = band_rho(band_edge, ts, grid_size_for(folded.samples.size()));
        const auto rec = b2r2_recover(folded, n_lambda, band, opts);
        recovered = rec.recovered;
        converged = rec.trace.converged();
    } else if (a.method == "hod") {
        HodOptions<double> opts;
        opts.auto_order = a.order == 0;
        opts.order = std::max(1, a.order);
        const auto rec = hod_recover(folded, opts);
        recovered = rec.recovered;
        converged = rec.consistent && (!truth || hod_condition_holds(*truth, folded, rec.order));
    } else {
        throw InvalidArgument("unknown method '" + a.method + "'");
    }

    {
        auto out = open_output(a.out);
        out << "n,f_hat\n";
        for (std::size_t i = 0; i < file.n.size(); ++i)
            out << file.n[i] << ',' << format_number(recovered[static_cast<Eigen::Index>(i)]) << '\n';
    }
    if (truth) std::cout << "mse_db=" << format_number(mse_db(recovered, truth->samples)) << '\n';
    std::cout << "converged=" << (converged ? 1 : 0) << '\n';
    return converged ? kExitOk : kExitNotConverged;
}

int run_sweep(const SweepArgs& a) {
    auto cfg = bench::load_config(a.config);
    bench::apply_preset(cfg, a.preset);
    const int threads = a.parallelism > 0 ? a.parallelism : default_parallelism();
    const auto table = bench::run_sweep(cfg, threads);
    bench::save_table(a.out, table);
    if (!a.raw.empty()) {
        auto raw = open_output(a.raw);
        bench::write_reports(raw, table.reports);
    }
    return kExitOk;
}

int run_report(const std::string& path) {
    bench::print_table(std::cout, bench::load_table(path));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Modulo sampling simulation and recovery"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Sample, fold and optionally add noise to a random bandlimited signal");
    simulate->add_option("--lambda", sim.lambda, "Fold threshold")->required();
    simulate->add_option("--of", sim.of, "Oversampling factor ws / (2 wm)")->required();
    simulate->add_option("--snr-db", sim.snr_db, "SNR in dB, or inf for no noise");
    simulate->add_option("--seed", sim.seed, "Signal and noise seed");
    simulate->add_option("--out", sim.out, "Output signal CSV")->required();
    simulate->add_option("--num-pulses", sim.signal.num_pulses);
    simulate->add_option("--center-spread", sim.signal.center_spread, "Pulse centers spread, seconds");
    simulate->add_option("--kernel-power", sim.signal.kernel_power);
    simulate->add_option("--band-edge", sim.signal.band_edge, "wm in rad/s");
    simulate->add_option("--window-tolerance", sim.signal.window_tolerance, "Edge samples below this times lambda");

    RecoverArgs rec;
    auto* recover = app.add_subcommand("recover", "Recover true samples from a signal CSV");
    recover->add_option("--method", rec.method)->check(CLI::IsMember({"b2r2", "hod"}));
    recover->add_option("--in", rec.in)->required();
    recover->add_option("--out", rec.out)->required();
    recover->add_option("--n-lambda", rec.n_lambda, "Support bound of the residual");
    recover->add_option("--max-iters", rec.max_iters);
    recover->add_option("--rel-cost-tol", rec.rel_cost_tol);
    recover->add_option("--order", rec.order, "HOD difference order, 0 selects automatically");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Run a Monte-Carlo sweep from a JSON config");
    sweep->add_option("--config", sw.config)->required();
    sweep->add_option("--out", sw.out, "Aggregated table CSV")->required();
    sweep->add_option("--raw", sw.raw, "Optional per-trial CSV");
    sweep->add_option("--preset", sw.preset)->check(CLI::IsMember({"desk", "full"}));
    sweep->add_option("--parallelism", sw.parallelism, "Worker threads (default MODREC_THREADS or 1)");

    std::string report_in;
    auto* report = app.add_subcommand("report", "Pretty-print a sweep table");
    report->add_option("--in,table", report_in)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*simulate) return run_simulate(sim);
        if (*recover) return run_recover(rec);
        if (*sweep) return run_sweep(sw);
        if (*report) return run_report(report_in);
    } catch (const std::exception& e) {
        std::cerr << "modrec: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
