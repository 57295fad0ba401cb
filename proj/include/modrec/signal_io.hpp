#pragma once

// Signal CSV used by the CLI: "# key=value" metadata lines, then a header
// naming the columns (n, optionally f, f_lambda), then one row per sample.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace modrec::io {

struct SignalFile {
    std::map<std::string, std::string> metadata;
    std::vector<long> n;
    std::optional<std::vector<double>> truth;  // column f
    std::vector<double> folded;                // column f_lambda

    std::optional<double> number(const std::string& key) const;
};

void write_signal(std::ostream& out, const SignalFile& file);
SignalFile read_signal(std::istream& in);

}  // namespace modrec::io
