#include "modrec/signal_io.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "modrec/bench.hpp"
#include "modrec/errors.hpp"

namespace modrec::io {

using bench::format_number;
using bench::parse_number;

std::optional<double> SignalFile::number(const std::string& key) const {
    const auto it = metadata.find(key);
    if (it == metadata.end()) return std::nullopt;
    return parse_number(it->second);
}

void write_signal(std::ostream& out, const SignalFile& file) {
    for (const auto& [k, v] : file.metadata) out << "# " << k << '=' << v << '\n';
    out << (file.truth ? "n,f,f_lambda\n" : "n,f_lambda\n");
    for (std::size_t i = 0; i < file.n.size(); ++i) {
        out << file.n[i] << ',';
        if (file.truth) out << format_number((*file.truth)[i]) << ',';
        out << format_number(file.folded[i]) << '\n';
    }
}

SignalFile read_signal(std::istream& in) {
    SignalFile file;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> columns;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto body = line.substr(line.find_first_not_of("# "));
            const auto eq = body.find('=');
            if (eq == std::string::npos) throw ParseError("metadata line without '='", lineno);
            file.metadata[body.substr(0, eq)] = body.substr(eq + 1);
            continue;
        }
        std::istringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) columns.push_back(col);
        break;
    }
    if (columns.empty()) throw ParseError("missing header row", lineno + 1);
    int idx_n = -1, idx_f = -1, idx_fl = -1;
    for (int i = 0; i < static_cast<int>(columns.size()); ++i) {
        if (columns[i] == "n") idx_n = i;
        else if (columns[i] == "f") idx_f = i;
        else if (columns[i] == "f_lambda") idx_fl = i;
        else throw ParseError("unknown column '" + columns[i] + "'", lineno);
    }
    if (idx_n < 0 || idx_fl < 0) throw ParseError("header must name columns n and f_lambda", lineno);
    if (idx_f >= 0) file.truth.emplace();

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != columns.size())
            throw ParseError("expected " + std::to_string(columns.size()) + " fields", lineno);
        try {
            const double n = parse_number(fields[static_cast<std::size_t>(idx_n)]);
            if (n != static_cast<double>(static_cast<long>(n))) throw InvalidArgument("index is not an integer");
            file.n.push_back(static_cast<long>(n));
            file.folded.push_back(parse_number(fields[static_cast<std::size_t>(idx_fl)]));
            if (idx_f >= 0) file.truth->push_back(parse_number(fields[static_cast<std::size_t>(idx_f)]));
        } catch (const InvalidArgument& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    if (file.n.empty()) throw ParseError("no samples", lineno);
    const long half = static_cast<long>(file.n.size() / 2);
    for (std::size_t i = 0; i < file.n.size(); ++i)
        if (file.n[i] != static_cast<long>(i) - half || file.n.size() % 2 == 0)
            throw ParseError("indices must run contiguously over -N..N", 0);
    return file;
}

}  // namespace modrec::io
