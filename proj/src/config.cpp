#include "mfsmp/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "mfsmp/presets.hpp"

namespace mfsmp {

namespace {

struct Entry {
    std::string section;
    std::string key;
    std::string value;
    std::size_t line = 0;
};

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& what, std::size_t line) {
    throw std::invalid_argument(what + " at line " + std::to_string(line));
}

double parse_double(const Entry& e) {
    const std::string v = trim(e.value);
    if (v.empty()) fail("malformed number for '" + e.key + "'", e.line);
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size()) fail("malformed number for '" + e.key + "'", e.line);
    return out;
}

std::uint64_t parse_u64(const Entry& e) {
    const std::string v = trim(e.value);
    if (v.empty() || v[0] == '-' || v[0] == '+')
        fail("'" + e.key + "' must be a plain non-negative integer", e.line);
    char* end = nullptr;
    const unsigned long long out = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size()) fail("malformed number for '" + e.key + "'", e.line);
    return static_cast<std::uint64_t>(out);
}

std::size_t parse_count(const Entry& e) {
    const std::string v = trim(e.value);
    char* end = nullptr;
    const long long out = v.empty() ? 0 : std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size())
        fail("malformed number for '" + e.key + "'", e.line);
    if (out <= 0) fail("'" + e.key + "' must be positive", e.line);
    return static_cast<std::size_t>(out);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string item;
    std::stringstream ss(value);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

std::vector<double> parse_double_list(const Entry& e) {
    std::vector<double> out;
    for (const std::string& item : split_list(e.value)) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end != item.c_str() + item.size())
            fail("malformed number for '" + e.key + "'", e.line);
        out.push_back(v);
    }
    return out;
}

std::vector<std::size_t> parse_index_list(const Entry& e) {
    std::vector<std::size_t> out;
    for (const std::string& item : split_list(e.value)) {
        if (item[0] == '-') fail("'" + e.key + "' entries must be non-negative", e.line);
        char* end = nullptr;
        const unsigned long long v = std::strtoull(item.c_str(), &end, 10);
        if (end != item.c_str() + item.size())
            fail("malformed number for '" + e.key + "'", e.line);
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

FilterMode parse_mode(const Entry& e) {
    const std::string v = trim(e.value);
    if (v == "conditional-law") return FilterMode::ConditionalLaw;
    if (v == "state-functional") return FilterMode::StateFunctional;
    fail("'mode' must be conditional-law or state-functional", e.line);
}

const std::vector<std::string>& known_sections() {
    static const std::vector<std::string> s = {"experiment", "grid",       "ensemble",
                                              "spike",      "control",    "tolerances",
                                              "coefficients"};
    return s;
}

void apply_entry(ExperimentConfig& c, const Entry& e) {
    const std::string& s = e.section;
    const std::string& k = e.key;
    if (s == "experiment") {
        if (k == "id") {
            c.id = trim(e.value);
            return;
        }
        if (k == "preset") return;  // already applied before overrides
        if (k == "mode") {
            c.mode = parse_mode(e);
            return;
        }
        if (k == "output") {
            c.output = trim(e.value);
            return;
        }
    } else if (s == "grid") {
        if (k == "T") {
            c.grid.T = parse_double(e);
            if (!(c.grid.T > 0.0)) fail("'T' must be positive", e.line);
            return;
        }
        if (k == "K") {
            c.grid.K = parse_count(e);
            return;
        }
    } else if (s == "ensemble") {
        if (k == "M_outer") {
            c.M_outer = parse_count(e);
            return;
        }
        if (k == "N_inner") {
            c.N_inner = parse_count(e);
            return;
        }
        if (k == "seed") {
            c.seed = parse_u64(e);
            return;
        }
    } else if (s == "spike") {
        if (k == "t0") {
            c.spike_t0 = parse_double(e);
            return;
        }
        if (k == "alt") {
            c.spike_alt = parse_double(e);
            return;
        }
        if (k == "eps_ladder") {
            c.eps_ladder = parse_double_list(e);
            return;
        }
    } else if (s == "control") {
        if (k == "U_set") {
            c.U_set = parse_double_list(e);
            return;
        }
        if (k == "blocks") {
            c.blocks = parse_count(e);
            return;
        }
        if (k == "base_policy") {
            c.base_policy = parse_index_list(e);
            return;
        }
    } else if (s == "tolerances") {
        if (k == "picard_tol") {
            c.picard_tol = parse_double(e);
            return;
        }
        if (k == "picard_max_iter") {
            c.picard_max_iter = parse_count(e);
            return;
        }
        if (k == "tol_smp") {
            c.tol_smp = parse_double(e);
            return;
        }
        if (k == "ridge") {
            c.ridge = parse_double(e);
            return;
        }
    } else if (s == "coefficients") {
        InlineCoefficients& ic = c.coeffs;
        struct Slot {
            const char* name;
            double* target;
        };
        const Slot slots[] = {
            {"s0", &ic.s0},   {"su", &ic.su},       {"sm", &ic.sm},   {"sv", &ic.sv},
            {"hc", &ic.hc},   {"hx", &ic.hx},       {"hm", &ic.hm},   {"hv", &ic.hv},
            {"g0", &ic.g0},   {"gu", &ic.gu},       {"gm", &ic.gm},   {"fu", &ic.fu},
            {"ustar", &ic.ustar}, {"fx1", &ic.fx1}, {"fx2", &ic.fx2}, {"fxm", &ic.fxm},
            {"fm2", &ic.fm2}, {"fv", &ic.fv},       {"px", &ic.px},   {"px2", &ic.px2},
            {"pm2", &ic.pm2}, {"pv", &ic.pv},       {"x0", &ic.x0},
        };
        for (const Slot& slot : slots)
            if (k == slot.name) {
                *slot.target = parse_double(e);
                return;
            }
        if (k == "phi_kind") {
            ic.phi_kind = trim(e.value);
            return;
        }
    }
    fail("unknown key '" + k + "' in [" + s + "]", e.line);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt(v[i]);
    }
    return out;
}

std::string fmt_index_list(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace

void ExperimentConfig::validate() const {
    auto bad = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
    if (id.empty()) bad("'id' must not be empty");
    for (char ch : id)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_')
            bad("'id' must use letters, digits, dash, underscore");
    const auto& names = preset_names();
    if (preset != "inline" && std::find(names.begin(), names.end(), preset) == names.end())
        bad("unknown preset '" + preset + "'");
    if (!(grid.T > 0.0)) bad("'T' must be positive");
    if (grid.K < 1) bad("'K' must be positive");
    if (M_outer < 1) bad("'M_outer' must be positive");
    if (N_inner < 1) bad("'N_inner' must be positive");
    if (eps_ladder.empty()) bad("'eps_ladder' must not be empty");
    for (double e : eps_ladder)
        if (!(e > 0.0)) bad("'eps_ladder' entries must be positive");
    for (std::size_t i = 1; i < eps_ladder.size(); ++i)
        if (!(eps_ladder[i] < eps_ladder[i - 1]))
            bad("'eps_ladder' must be strictly decreasing");
    if (!(spike_t0 >= 0.0) || !(spike_t0 < grid.T))
        bad("'t0' must lie in [0, T)");
    if (U_set.empty()) bad("'U_set' must not be empty");
    if (blocks < 1) bad("'blocks' must be positive");
    if (!base_policy.empty()) {
        if (base_policy.size() != blocks)
            bad("'base_policy' must list one index per block");
        for (std::size_t idx : base_policy)
            if (idx >= U_set.size()) bad("'base_policy' index outside U_set");
    }
    if (!(picard_tol > 0.0)) bad("'picard_tol' must be positive");
    if (picard_max_iter < 1) bad("'picard_max_iter' must be positive");
    if (!(tol_smp >= 0.0)) bad("'tol_smp' must be non-negative");
    if (!(ridge >= 0.0)) bad("'ridge' must be non-negative");
    if (coeffs.phi_kind != "zero" && coeffs.phi_kind != "one" &&
        coeffs.phi_kind != "identity" && coeffs.phi_kind != "tanh")
        bad("'phi_kind' must be zero, one, identity or tanh");
}

ExperimentConfig parse_config(const std::string& text) {
    std::vector<Entry> entries;
    std::string section;
    std::size_t line_no = 0;
    std::stringstream ss(text);
    std::string raw;
    while (std::getline(ss, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("malformed section header", line_no);
            section = trim(line.substr(1, line.size() - 2));
            const auto& known = known_sections();
            if (std::find(known.begin(), known.end(), section) == known.end())
                fail("unknown section [" + section + "]", line_no);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value", line_no);
        if (section.empty()) fail("key outside any [section]", line_no);
        Entry e;
        e.section = section;
        e.key = trim(line.substr(0, eq));
        e.value = line.substr(eq + 1);
        e.line = line_no;
        if (e.key.empty()) fail("expected key = value", line_no);
        entries.push_back(std::move(e));
    }

    ExperimentConfig cfg;
    std::string preset = cfg.preset;
    for (const Entry& e : entries)
        if (e.section == "experiment" && e.key == "preset") preset = trim(e.value);
    apply_preset(cfg, preset);
    cfg.preset = preset;
    for (const Entry& e : entries) apply_entry(cfg, e);
    cfg.validate();
    return cfg;
}

std::string serialize_config(const ExperimentConfig& c) {
    std::string out;
    out += "[experiment]\n";
    out += "id = " + c.id + "\n";
    out += "preset = " + c.preset + "\n";
    out += std::string("mode = ") +
           (c.mode == FilterMode::ConditionalLaw ? "conditional-law" : "state-functional") +
           "\n";
    out += "output = " + c.output + "\n";
    out += "[grid]\n";
    out += "T = " + fmt(c.grid.T) + "\n";
    out += "K = " + std::to_string(c.grid.K) + "\n";
    out += "[ensemble]\n";
    out += "M_outer = " + std::to_string(c.M_outer) + "\n";
    out += "N_inner = " + std::to_string(c.N_inner) + "\n";
    out += "seed = " + std::to_string(c.seed) + "\n";
    out += "[spike]\n";
    out += "t0 = " + fmt(c.spike_t0) + "\n";
    out += "alt = " + fmt(c.spike_alt) + "\n";
    out += "eps_ladder = " + fmt_list(c.eps_ladder) + "\n";
    out += "[control]\n";
    out += "U_set = " + fmt_list(c.U_set) + "\n";
    out += "blocks = " + std::to_string(c.blocks) + "\n";
    out += "base_policy = " + fmt_index_list(c.base_policy) + "\n";
    out += "[tolerances]\n";
    out += "picard_tol = " + fmt(c.picard_tol) + "\n";
    out += "picard_max_iter = " + std::to_string(c.picard_max_iter) + "\n";
    out += "tol_smp = " + fmt(c.tol_smp) + "\n";
    out += "ridge = " + fmt(c.ridge) + "\n";
    out += "[coefficients]\n";
    const InlineCoefficients& ic = c.coeffs;
    out += "s0 = " + fmt(ic.s0) + "\n";
    out += "su = " + fmt(ic.su) + "\n";
    out += "sm = " + fmt(ic.sm) + "\n";
    out += "sv = " + fmt(ic.sv) + "\n";
    out += "hc = " + fmt(ic.hc) + "\n";
    out += "hx = " + fmt(ic.hx) + "\n";
    out += "hm = " + fmt(ic.hm) + "\n";
    out += "hv = " + fmt(ic.hv) + "\n";
    out += "phi_kind = " + ic.phi_kind + "\n";
    out += "g0 = " + fmt(ic.g0) + "\n";
    out += "gu = " + fmt(ic.gu) + "\n";
    out += "gm = " + fmt(ic.gm) + "\n";
    out += "fu = " + fmt(ic.fu) + "\n";
    out += "ustar = " + fmt(ic.ustar) + "\n";
    out += "fx1 = " + fmt(ic.fx1) + "\n";
    out += "fx2 = " + fmt(ic.fx2) + "\n";
    out += "fxm = " + fmt(ic.fxm) + "\n";
    out += "fm2 = " + fmt(ic.fm2) + "\n";
    out += "fv = " + fmt(ic.fv) + "\n";
    out += "px = " + fmt(ic.px) + "\n";
    out += "px2 = " + fmt(ic.px2) + "\n";
    out += "pm2 = " + fmt(ic.pm2) + "\n";
    out += "pv = " + fmt(ic.pv) + "\n";
    out += "x0 = " + fmt(ic.x0) + "\n";
    return out;
}

}  // namespace mfsmp
