#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "modrec/bench.hpp"

namespace modrec::bench {

namespace {

using nlohmann::json;

class Reader {
public:
    explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

    void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
        for (const auto& [key, _] : obj.items())
            if (!known.count(key)) errors_.push_back(where + key + ": unknown key");
    }

    template <typename T>
    void get(const json& obj, const std::string& key, T& out, const std::string& where = "") {
        if (!obj.contains(key)) return;
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception&) {
            errors_.push_back(where + key + ": wrong type");
        }
    }

    // Numbers, with "inf" or null accepted as the no-noise sentinel.
    void get_snr_list(const json& obj, const std::string& key, std::vector<double>& out) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        if (!v.is_array()) {
            errors_.push_back(key + ": expected a list");
            return;
        }
        out.clear();
        for (const auto& item : v) {
            if (item.is_number()) {
                out.push_back(item.get<double>());
            } else if (item.is_null() || (item.is_string() && item.get<std::string>() == "inf")) {
                out.push_back(kNoNoise);
            } else {
                errors_.push_back(key + ": entries must be numbers or \"inf\"");
            }
        }
    }

private:
    std::vector<std::string>& errors_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
    }
    if (!doc.is_object()) throw ParseError("config must be a JSON object", 0);

    ExperimentConfig cfg;
    std::vector<std::string> errors;
    Reader rd(errors);
    rd.reject_unknown(doc,
                      {"lambda", "of", "snr_db", "trials", "base_seed", "num_pulses", "center_spread",
                       "kernel_power", "band_edge", "window_tolerance", "methods", "support_margin", "b2r2",
                       "hod"},
                      "");
    cfg.lambda.clear();
    cfg.of.clear();
    cfg.snr_db.clear();
    rd.get(doc, "lambda", cfg.lambda);
    rd.get(doc, "of", cfg.of);
    rd.get_snr_list(doc, "snr_db", cfg.snr_db);
    rd.get(doc, "trials", cfg.trials);
    rd.get(doc, "base_seed", cfg.base_seed);
    rd.get(doc, "num_pulses", cfg.signal.num_pulses);
    rd.get(doc, "center_spread", cfg.signal.center_spread);
    rd.get(doc, "kernel_power", cfg.signal.kernel_power);
    rd.get(doc, "band_edge", cfg.signal.band_edge);
    rd.get(doc, "window_tolerance", cfg.signal.window_tolerance);
    rd.get(doc, "support_margin", cfg.support_margin);

    if (doc.contains("methods")) {
        std::vector<std::string> names;
        rd.get(doc, "methods", names);
        cfg.methods.clear();
        for (const auto& n : names) {
            try {
                cfg.methods.push_back(parse_method(n));
            } catch (const InvalidArgument& e) {
                errors.push_back(std::string("methods: ") + e.what());
            }
        }
    }
    if (doc.contains("b2r2")) {
        const auto& o = doc.at("b2r2");
        if (!o.is_object()) {
            errors.emplace_back("b2r2: expected an object");
        } else {
            rd.reject_unknown(o, {"max_iters", "rel_cost_tol", "armijo_c", "shrink", "gamma_init", "max_backtracks"},
                              "b2r2.");
            rd.get(o, "max_iters", cfg.pgd.max_iters, "b2r2.");
            rd.get(o, "rel_cost_tol", cfg.pgd.rel_cost_tol, "b2r2.");
            rd.get(o, "armijo_c", cfg.pgd.armijo_c, "b2r2.");
            rd.get(o, "shrink", cfg.pgd.shrink, "b2r2.");
            rd.get(o, "gamma_init", cfg.pgd.gamma_init, "b2r2.");
            rd.get(o, "max_backtracks", cfg.pgd.max_backtracks, "b2r2.");
        }
    }
    if (doc.contains("hod")) {
        const auto& o = doc.at("hod");
        if (!o.is_object()) {
            errors.emplace_back("hod: expected an object");
        } else {
            rd.reject_unknown(o, {"order", "auto_order", "max_order", "amplitude_bound"}, "hod.");
            rd.get(o, "order", cfg.hod.order, "hod.");
            rd.get(o, "auto_order", cfg.hod.auto_order, "hod.");
            rd.get(o, "max_order", cfg.hod.max_order, "hod.");
            rd.get(o, "amplitude_bound", cfg.hod.amplitude_bound, "hod.");
        }
    }

    for (auto& e : cfg.validate()) errors.push_back(std::move(e));
    if (!errors.empty()) {
        std::ostringstream msg;
        msg << "invalid experiment config:";
        for (const auto& e : errors) msg << "\n  " << e;
        throw InvalidArgument(msg.str());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace modrec::bench
