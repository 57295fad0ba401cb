#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "modrec/bench.hpp"

namespace modrec::bench {

namespace {

constexpr const char* kTableHeader = "lambda,of,snr_db,method,trials,failures,mean_mse_db";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

int parse_int(const std::string& text) {
    int v = 0;
    const auto* end = text.data() + text.size();
    auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || p != end) throw InvalidArgument("not an integer: '" + text + "'");
    return v;
}

}  // namespace

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

double parse_number(const std::string& text) {
    if (text == "inf" || text == "+inf") return kNoNoise;
    if (text == "-inf") return -kNoNoise;
    double v = 0;
    const auto* end = text.data() + text.size();
    auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || p != end || text.empty()) throw InvalidArgument("not a number: '" + text + "'");
    return v;
}

void write_table(std::ostream& out, const SweepTable& table) {
    out << kTableHeader << '\n';
    for (const auto& r : table.rows) {
        out << format_number(r.cell.lambda) << ',' << format_number(r.cell.of) << ','
            << format_number(r.cell.snr_db) << ',' << to_string(r.cell.method) << ',' << r.trials << ','
            << r.failures << ',' << format_number(r.mean_mse_db) << '\n';
    }
}

SweepTable read_table(std::istream& in) {
    SweepTable t;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("missing header row", 1);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTableHeader) throw ParseError("unexpected header '" + line + "'", lineno);
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 7) throw ParseError("expected 7 fields, found " + std::to_string(f.size()), lineno);
        try {
            SweepRow r;
            r.cell = {parse_number(f[0]), parse_number(f[1]), parse_number(f[2]), parse_method(f[3])};
            r.trials = parse_int(f[4]);
            r.failures = parse_int(f[5]);
            r.mean_mse_db = parse_number(f[6]);
            t.rows.push_back(r);
        } catch (const InvalidArgument& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return t;
}

void save_table(const std::string& path, const SweepTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_table(out, table);
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

SweepTable load_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_table(in);
}

void write_reports(std::ostream& out, const std::vector<TrialReport>& reports) {
    out << "lambda,of,snr_db,method,trial,seed,converged,mse_db,n_lambda,wall_time_s\n";
    for (const auto& r : reports) {
        out << format_number(r.cell.lambda) << ',' << format_number(r.cell.of) << ','
            << format_number(r.cell.snr_db) << ',' << to_string(r.cell.method) << ',' << r.trial << ','
            << r.seed << ',' << (r.converged ? 1 : 0) << ',' << format_number(r.mse_db) << ','
            << r.n_lambda << ',' << format_number(r.wall_time_s) << '\n';
    }
}

void print_table(std::ostream& out, const SweepTable& table) {
    out << std::left << std::setw(8) << "lambda" << std::setw(6) << "OF" << std::setw(8) << "SNR"
        << std::setw(7) << "method" << std::right << std::setw(7) << "trials" << std::setw(9) << "failures"
        << std::setw(13) << "mean MSE dB" << '\n';
    for (const auto& r : table.rows) {
        const std::string snr = std::isinf(r.cell.snr_db) ? "inf" : format_number(r.cell.snr_db);
        out << std::left << std::setw(8) << format_number(r.cell.lambda) << std::setw(6)
            << format_number(r.cell.of) << std::setw(8) << snr << std::setw(7) << to_string(r.cell.method)
            << std::right << std::setw(7) << r.trials << std::setw(9) << r.failures << std::setw(13)
            << std::fixed << std::setprecision(2) << r.mean_mse_db << std::defaultfloat << '\n';
    }
}

}  // namespace modrec::bench
