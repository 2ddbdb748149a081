#include "thermal_ep/sweep.hpp"

#include "thermal_ep/fockspace.hpp"
#include "thermal_ep/liouvillian.hpp"
#include "thermal_ep/parallel.hpp"
#include "thermal_ep/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace tep {

using nlohmann::json;

namespace {

constexpr const char* kAxes[] = {"kappa", "gamma", "g", "eps", "n_th", "gamma_a", "gamma_b"};

std::string fmt(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string fmt_bool(bool b) { return b ? "1" : "0"; }

// ------------------------------------------------------------ JSON helpers

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
    throw ConfigError("config field '" + path + "': " + what);
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        field_error(path, "expected an object");
    }
    for (const auto& item : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; })) {
            field_error(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
        }
    }
}

double get_number(const json& obj, const char* key, const std::string& path, double fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
        field_error(path + key, "expected a number");
    }
    return v.get<double>();
}

template <typename Int>
Int get_unsigned(const json& obj, const char* key, const std::string& path, Int fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
        field_error(path + key, "expected a non-negative integer");
    }
    return v.get<Int>();
}

std::string get_string(const json& obj, const char* key, const std::string& path, const std::string& fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_string()) {
        field_error(path + key, "expected a string");
    }
    return v.get<std::string>();
}

bool get_bool(const json& obj, const char* key, const std::string& path, bool fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
        field_error(path + key, "expected true or false");
    }
    return v.get<bool>();
}

std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

bool is_thermal(const SystemParams& p) { return p.n_th > 0.0; }

}  // namespace

// ------------------------------------------------------------------ modes

std::string to_string(SweepMode mode) {
    switch (mode) {
        case SweepMode::HamiltonianSpectrum:
            return "hamiltonian-spectrum";
        case SweepMode::EpScan:
            return "ep-scan";
        case SweepMode::LepScan:
            return "lep-scan";
        case SweepMode::LiouvillianCheck:
            return "liouvillian-check";
        case SweepMode::Trajectories:
            return "trajectories";
    }
    return "unknown";
}

SweepMode parse_mode(const std::string& name) {
    static const std::map<std::string, SweepMode> names{
        {"hamiltonian-spectrum", SweepMode::HamiltonianSpectrum},
        {"spectrum", SweepMode::HamiltonianSpectrum},
        {"ep-scan", SweepMode::EpScan},
        {"lep-scan", SweepMode::LepScan},
        {"liouvillian-check", SweepMode::LiouvillianCheck},
        {"trajectories", SweepMode::Trajectories},
    };
    const auto it = names.find(name);
    if (it == names.end()) {
        throw ConfigError("unknown mode '" + name + "'");
    }
    return it->second;
}

// ----------------------------------------------------------------- config

void SweepConfig::validate() const {
    try {
        base.validate();
    } catch (const ConfigError& e) {
        field_error("params", e.what());
    }
    if (cutoff < 2) {
        field_error("cutoff", "need at least 2 levels");
    }
    if (sweep) {
        if (std::none_of(std::begin(kAxes), std::end(kAxes), [&](const char* a) { return sweep->axis == a; })) {
            field_error("sweep.axis", "unknown axis '" + sweep->axis + "'");
        }
        if (!(sweep->min < sweep->max) || !(sweep->step > 0.0)) {
            field_error("sweep", "need min < max and step > 0");
        }
        for (double v : grid()) {
            try {
                at(v).validate();
            } catch (const ConfigError& e) {
                field_error("sweep", "grid point " + fmt(v) + " violates the parameter constraints: " + e.what());
            }
        }
    }
    if (!(cluster_eps > 0.0)) {
        field_error("tolerances.cluster_eps", "must be > 0");
    }
    if (!(angle_eps > 0.0)) {
        field_error("tolerances.angle_eps", "must be > 0");
    }
    if (!(liouvillian_tol > 0.0)) {
        field_error("tolerances.liouvillian", "must be > 0");
    }
    if (hamiltonian != "h_nh" && hamiltonian != "drift") {
        field_error("ep_scan.hamiltonian", "expected 'h_nh' or 'drift'");
    }
    if (mode == SweepMode::EpScan) {
        if (sectors.empty()) {
            field_error("ep_scan.sectors", "need at least one excitation sector");
        }
        for (int s : sectors) {
            if (s < 1 || s + 2 > cutoff) {
                field_error("ep_scan.sectors", "sector " + std::to_string(s) + " needs 1 <= N <= cutoff - 2");
            }
        }
    }
    if (mode == SweepMode::LiouvillianCheck && cutoff * cutoff * cutoff * cutoff > 4096) {
        field_error("cutoff", "liouvillian-check needs cutoff <= 8");
    }
    const auto& t = trajectories;
    if (t.dt && !(*t.dt > 0.0)) {
        field_error("trajectories.dt", "must be > 0");
    }
    if (!(t.t_final > 0.0)) {
        field_error("trajectories.t_final", "must be > 0");
    }
    if (t.n_traj == 0) {
        field_error("trajectories.n_traj", "must be >= 1");
    }
    if (t.n_samples == 0) {
        field_error("trajectories.n_samples", "must be >= 1");
    }
    if (!(t.guard_threshold >= 0.0)) {
        field_error("trajectories.guard_threshold", "must be >= 0");
    }
}

std::vector<double> SweepConfig::grid() const {
    if (!sweep) {
        return {std::numeric_limits<double>::quiet_NaN()};
    }
    return make_grid(sweep->min, sweep->max, sweep->step);
}

SystemParams SweepConfig::at(double value) const {
    if (!sweep || std::isnan(value)) {
        return base;
    }
    SystemParams p = base;
    const std::string& axis = sweep->axis;
    if (axis == "kappa") {
        p = SystemParams::from_gamma_kappa(base.g, base.gamma(), value, base.eps, base.n_th);
    } else if (axis == "gamma") {
        p = SystemParams::from_gamma_kappa(base.g, value, base.kappa(), base.eps, base.n_th);
    } else if (axis == "g") {
        p.g = value;
    } else if (axis == "eps") {
        p.eps = value;
    } else if (axis == "n_th") {
        p.n_th = value;
    } else if (axis == "gamma_a") {
        p.gamma_a = value;
    } else if (axis == "gamma_b") {
        p.gamma_b = value;
    } else {
        throw ConfigError("unknown sweep axis '" + axis + "'");
    }
    return p;
}

SweepConfig default_config(SweepMode mode) {
    SweepConfig c;
    c.mode = mode;
    switch (mode) {
        case SweepMode::HamiltonianSpectrum:
            c.base = SystemParams::from_gamma_kappa(1.0, 2.0, 0.0, 1.0, 0.0);
            c.sweep = GridSpec{"kappa", 0.0, 2.0, 0.02};
            break;
        case SweepMode::EpScan:
        case SweepMode::LepScan:
            c.base = SystemParams::from_gamma_kappa(1.0, 2.0, 1.0, 1.0, 0.0);
            c.sweep = GridSpec{"g", 0.5, 1.6, 0.01};
            break;
        case SweepMode::LiouvillianCheck:
            c.base = SystemParams::from_gamma_kappa(1.0, 2.0, 0.5, 0.0, 0.0);
            c.cutoff = 4;
            c.sweep = GridSpec{"kappa", 0.0, 1.5, 0.25};
            break;
        case SweepMode::Trajectories:
            c.base = SystemParams::from_gamma_kappa(1.0, 2.0, 0.5, 1.0, 0.0);
            c.cutoff = 6;
            c.sweep.reset();
            break;
    }
    return c;
}

SweepConfig parse_config(const std::string& text, std::optional<SweepMode> mode) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: JSON syntax error at " + line_column(text, e.byte) + ": " + e.what());
    }
    reject_unknown(doc, "", {"mode", "params", "sweep", "cutoff", "output", "tolerances", "ep_scan",
                             "trajectories", "json"});

    std::optional<SweepMode> declared;
    if (doc.contains("mode")) {
        const std::string name = get_string(doc, "mode", "", "");
        try {
            declared = parse_mode(name);
        } catch (const ConfigError&) {
            field_error("mode", "unknown mode '" + name + "'");
        }
    }
    if (mode && declared && *mode != *declared) {
        field_error("mode", "config declares '" + to_string(*declared) + "' but the command is '" +
                                to_string(*mode) + "'");
    }
    if (!mode && !declared) {
        field_error("mode", "missing");
    }
    SweepConfig c = default_config(mode ? *mode : *declared);

    if (doc.contains("params")) {
        const json& p = doc.at("params");
        reject_unknown(p, "params", {"g", "gamma_a", "gamma_b", "gamma", "kappa", "eps", "n_th"});
        const bool rates = p.contains("gamma_a") || p.contains("gamma_b");
        const bool balanced = p.contains("gamma") || p.contains("kappa");
        if (rates && balanced) {
            field_error("params", "give either gamma_a/gamma_b or gamma/kappa, not both");
        }
        c.base.g = get_number(p, "g", "params.", c.base.g);
        c.base.eps = get_number(p, "eps", "params.", c.base.eps);
        c.base.n_th = get_number(p, "n_th", "params.", c.base.n_th);
        if (balanced) {
            const double gamma = get_number(p, "gamma", "params.", c.base.gamma());
            const double kappa = get_number(p, "kappa", "params.", c.base.kappa());
            c.base.gamma_a = gamma + kappa;
            c.base.gamma_b = gamma - kappa;
        } else {
            c.base.gamma_a = get_number(p, "gamma_a", "params.", c.base.gamma_a);
            c.base.gamma_b = get_number(p, "gamma_b", "params.", c.base.gamma_b);
        }
    }
    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        if (s.is_null()) {
            c.sweep.reset();
        } else {
            reject_unknown(s, "sweep", {"axis", "min", "max", "step"});
            for (const char* key : {"axis", "min", "max", "step"}) {
                if (!s.contains(key)) {
                    field_error(std::string("sweep.") + key, "missing");
                }
            }
            c.sweep = GridSpec{get_string(s, "axis", "sweep.", ""), get_number(s, "min", "sweep.", 0.0),
                               get_number(s, "max", "sweep.", 0.0), get_number(s, "step", "sweep.", 0.0)};
        }
    }
    if (doc.contains("cutoff")) {
        c.cutoff = get_unsigned<int>(doc, "cutoff", "", c.cutoff);
    }
    c.output = get_string(doc, "output", "", c.output);
    c.json = get_bool(doc, "json", "", c.json);
    if (doc.contains("tolerances")) {
        const json& t = doc.at("tolerances");
        reject_unknown(t, "tolerances", {"cluster_eps", "angle_eps", "liouvillian"});
        c.cluster_eps = get_number(t, "cluster_eps", "tolerances.", c.cluster_eps);
        c.angle_eps = get_number(t, "angle_eps", "tolerances.", c.angle_eps);
        c.liouvillian_tol = get_number(t, "liouvillian", "tolerances.", c.liouvillian_tol);
    }
    if (doc.contains("ep_scan")) {
        const json& e = doc.at("ep_scan");
        reject_unknown(e, "ep_scan", {"hamiltonian", "sectors"});
        c.hamiltonian = get_string(e, "hamiltonian", "ep_scan.", c.hamiltonian);
        if (e.contains("sectors")) {
            const json& s = e.at("sectors");
            if (!s.is_array()) {
                field_error("ep_scan.sectors", "expected an array of integers");
            }
            c.sectors.clear();
            for (const json& v : s) {
                if (!v.is_number_integer()) {
                    field_error("ep_scan.sectors", "expected an array of integers");
                }
                c.sectors.push_back(v.get<int>());
            }
        }
    }
    if (doc.contains("trajectories")) {
        const json& t = doc.at("trajectories");
        reject_unknown(t, "trajectories", {"dt", "t_final", "n_traj", "seed", "n_samples", "guard_threshold"});
        auto& s = c.trajectories;
        if (t.contains("dt")) {
            if (t.at("dt").is_null()) {
                s.dt.reset();
            } else {
                s.dt = get_number(t, "dt", "trajectories.", 0.0);
            }
        }
        s.t_final = get_number(t, "t_final", "trajectories.", s.t_final);
        s.n_traj = get_unsigned<std::size_t>(t, "n_traj", "trajectories.", s.n_traj);
        s.seed = get_unsigned<std::uint64_t>(t, "seed", "trajectories.", s.seed);
        s.n_samples = get_unsigned<std::size_t>(t, "n_samples", "trajectories.", s.n_samples);
        s.guard_threshold = get_number(t, "guard_threshold", "trajectories.", s.guard_threshold);
    }
    c.validate();
    return c;
}

SweepConfig load_config(const std::string& path, std::optional<SweepMode> mode) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config(buffer.str(), mode);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string config_to_json(const SweepConfig& c) {
    json doc;
    doc["mode"] = to_string(c.mode);
    doc["params"] = {{"g", c.base.g},
                     {"gamma_a", c.base.gamma_a},
                     {"gamma_b", c.base.gamma_b},
                     {"eps", c.base.eps},
                     {"n_th", c.base.n_th}};
    if (c.sweep) {
        doc["sweep"] = {{"axis", c.sweep->axis}, {"min", c.sweep->min}, {"max", c.sweep->max}, {"step", c.sweep->step}};
    } else {
        doc["sweep"] = nullptr;
    }
    doc["cutoff"] = c.cutoff;
    doc["output"] = c.output;
    doc["json"] = c.json;
    doc["tolerances"] = {{"cluster_eps", c.cluster_eps}, {"angle_eps", c.angle_eps}, {"liouvillian", c.liouvillian_tol}};
    doc["ep_scan"] = {{"hamiltonian", c.hamiltonian}, {"sectors", c.sectors}};
    const auto& t = c.trajectories;
    json traj = {{"t_final", t.t_final},
                 {"n_traj", t.n_traj},
                 {"seed", t.seed},
                 {"n_samples", t.n_samples},
                 {"guard_threshold", t.guard_threshold}};
    traj["dt"] = t.dt ? json(*t.dt) : json(nullptr);
    doc["trajectories"] = traj;
    return doc.dump();
}

// ----------------------------------------------------------------- output

TableWriter::TableWriter(std::ostream& out, bool json) : out_(out), json_(json) {}

void TableWriter::meta(const std::string& command, const std::string& schema, const SweepConfig& config,
                       const std::vector<std::pair<std::string, std::string>>& extra) {
    const bool absolute = config.sweep && config.sweep->axis == "g";
    const std::string units =
        absolute ? "absolute rate units (g is swept)" : "rates in units of g (g = " + fmt(config.base.g) + ")";
    if (json_) {
        json m = {{"tool", "tep"},
                  {"version", TEP_VERSION},
                  {"command", command},
                  {"schema", schema},
                  {"units", units},
                  {"config", json::parse(config_to_json(config))}};
        for (const auto& [k, v] : extra) {
            m[k] = v;
        }
        out_ << json{{"meta", m}}.dump() << '\n';
        return;
    }
    out_ << "# tep " << TEP_VERSION << ' ' << command << '\n';
    out_ << "# schema: " << schema << '\n';
    out_ << "# config: " << config_to_json(config) << '\n';
    out_ << "# units: " << units << '\n';
    for (const auto& [k, v] : extra) {
        out_ << "# " << k << ": " << v << '\n';
    }
}

void TableWriter::columns(std::vector<std::string> names) {
    names_ = std::move(names);
    if (!json_) {
        for (std::size_t i = 0; i < names_.size(); ++i) {
            out_ << (i ? "," : "") << names_[i];
        }
        out_ << '\n';
    }
}

void TableWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != names_.size()) {
        throw Error("TableWriter: row has " + std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(names_.size()));
    }
    if (json_) {
        json obj = json::object();
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const std::string& c = cells[i];
            if (c.empty()) {
                obj[names_[i]] = nullptr;
                continue;
            }
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            if (end && *end == '\0' && std::isfinite(v)) {
                obj[names_[i]] = v;
            } else {
                obj[names_[i]] = c;
            }
        }
        out_ << obj.dump() << '\n';
    } else {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out_ << (i ? "," : "") << cells[i];
        }
        out_ << '\n';
    }
    out_.flush();
}

void TableWriter::summary(const std::string& json_object) {
    if (json_) {
        out_ << json{{"summary", json::parse(json_object)}}.dump() << '\n';
    } else {
        out_ << "# summary: " << json_object << '\n';
    }
    out_.flush();
}

// ---------------------------------------------------------- tracked states

std::array<Complex, 4> tracked_eigenvalues(const ComplexMatrix& h, const SystemParams& params, FockCutoff cutoff,
                                           const std::array<Complex, 4>& reference) {
    const bool use_sectors = params.eps == 0.0;
    const SystemParams eff = effective_params(params);
    const double kappa_eff = std::abs(eff.kappa());
    const Complex omega = omega_of(eff.g, kappa_eff);
    const bool unbroken = kappa_eff < eff.g && omega.real() > 0.05 * eff.g;

    struct Block {
        std::vector<Eigen::Index> indices;
        Spectrum spectrum;
    };
    std::map<int, Block> blocks;
    auto block_for = [&](int n) -> const Block& {
        const int key = use_sectors ? n : -1;
        auto it = blocks.find(key);
        if (it != blocks.end()) {
            return it->second;
        }
        Block b;
        for (int i = 0; i < cutoff.dim(); ++i) {
            if (!use_sectors || cutoff.occupation_a(i) + cutoff.occupation_b(i) == n) {
                b.indices.push_back(i);
            }
        }
        const auto m = static_cast<Eigen::Index>(b.indices.size());
        ComplexMatrix sub(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) {
                sub(i, j) = h(b.indices[static_cast<std::size_t>(i)], b.indices[static_cast<std::size_t>(j)]);
            }
        }
        b.spectrum = eig(sub, unbroken);
        return blocks.emplace(key, std::move(b)).first->second;
    };

    std::array<Complex, 4> out{};
    for (std::size_t k = 0; k < kTrackedStates.size(); ++k) {
        const auto& state = kTrackedStates[k];
        const Block& b = block_for(state.n_e + state.n_f);
        std::size_t best = 0;
        if (unbroken) {
            const ComplexVector full = supermode_state(state.n_e, state.n_f, params, cutoff);
            ComplexVector target(static_cast<Eigen::Index>(b.indices.size()));
            for (std::size_t i = 0; i < b.indices.size(); ++i) {
                target(static_cast<Eigen::Index>(i)) = full(b.indices[i]);
            }
            double best_overlap = -1.0;
            for (std::size_t i = 0; i < b.spectrum.size(); ++i) {
                const double overlap = std::abs(b.spectrum.vector(i).dot(target));
                if (overlap > best_overlap) {
                    best_overlap = overlap;
                    best = i;
                }
            }
        } else {
            double best_distance = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < b.spectrum.size(); ++i) {
                const double distance = std::abs(b.spectrum.eigenvalues[i] - reference[k]);
                if (distance < best_distance) {
                    best_distance = distance;
                    best = i;
                }
            }
        }
        out[k] = b.spectrum.eigenvalues[best];
    }
    return out;
}

double auto_time_step(const SystemParams& params, FockCutoff cutoff, double t_final, std::size_t n_samples,
                      double max_rate_dt) {
    const double rate = max_jump_rate(params, cutoff);
    const double interval = t_final / static_cast<double>(n_samples);
    const double steps = rate > 0.0 ? std::ceil(interval * rate / max_rate_dt) : 1.0;
    return interval / std::max(1.0, steps);
}

// --------------------------------------------------------------- commands

namespace {

std::string sweep_cell(double v) { return std::isnan(v) ? std::string() : fmt(v); }

// Evaluates fn on every grid point concurrently and writes rows in grid
// order. Stops at the first failed point after flushing the rows before it.
template <typename Fn>
int write_rows_in_order(const std::vector<double>& grid, TableWriter& writer, Fn&& fn, std::ostream& out) {
    std::vector<std::vector<std::vector<std::string>>> rows(grid.size());
    std::vector<std::string> errors(grid.size());
    parallel_for(grid.size(), default_workers(), [&](std::size_t i) {
        try {
            rows[i] = fn(grid[i]);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!errors[i].empty()) {
            out.flush();
            throw NumericalError("at sweep value " + fmt(grid[i]) + ": " + errors[i]);
        }
        for (const auto& r : rows[i]) {
            writer.row(r);
        }
    }
    return 0;
}

}  // namespace

int cmd_spectrum(const SweepConfig& config, std::ostream& out) {
    config.validate();
    const FockCutoff cutoff(config.cutoff);
    TableWriter writer(out, config.json);
    writer.meta("spectrum", "spectrum/1", config,
                {{"sweep_axis", config.sweep ? config.sweep->axis : std::string("none")},
                 {"note", "IF values drop the constant real part of chi; EF columns are empty when n_th > 0"}});
    writer.columns({"sweep_value", "state", "n_e", "n_f", "re_if_analytic", "im_if_analytic", "re_if_numeric",
                    "im_if_numeric", "abs_err_if", "re_ef_analytic", "im_ef_analytic", "re_ef_numeric",
                    "im_ef_numeric", "abs_err_ef"});
    return write_rows_in_order(
        config.grid(), writer,
        [&](double v) {
            const SystemParams p = config.at(v);
            const DerivedParams d = derive(p);
            const bool thermal = is_thermal(p);
            std::array<Complex, 4> if_closed{};
            std::array<Complex, 4> if_full{};
            std::array<Complex, 4> ef{};
            for (std::size_t k = 0; k < 4; ++k) {
                const auto& s = kTrackedStates[k];
                if_closed[k] = analytic_lambda_nh(s.n_e, s.n_f, d, thermal, false);
                if_full[k] = analytic_lambda_nh(s.n_e, s.n_f, d, thermal, true);
                ef[k] = analytic_lambda_pt(s.n_e, s.n_f, d);
            }
            const std::array<Complex, 4> if_numeric = tracked_eigenvalues(build_h_nh(p, cutoff), p, cutoff, if_full);
            std::array<Complex, 4> ef_numeric{};
            if (!thermal) {
                ef_numeric = tracked_eigenvalues(build_h_pt_split(p, cutoff).h_pt, p, cutoff, ef);
            }
            std::vector<std::vector<std::string>> rows;
            for (std::size_t k = 0; k < 4; ++k) {
                const auto& s = kTrackedStates[k];
                // Same constant shift as the analytic column: drop Re(chi).
                const Complex numeric = if_numeric[k] + (if_closed[k] - if_full[k]);
                std::vector<std::string> r{sweep_cell(v),
                                           s.label,
                                           std::to_string(s.n_e),
                                           std::to_string(s.n_f),
                                           fmt(if_closed[k].real()),
                                           fmt(if_closed[k].imag()),
                                           fmt(numeric.real()),
                                           fmt(numeric.imag()),
                                           fmt(std::abs(if_closed[k] - numeric))};
                if (thermal) {
                    r.insert(r.end(), 5, std::string());
                } else {
                    r.insert(r.end(), {fmt(ef[k].real()), fmt(ef[k].imag()), fmt(ef_numeric[k].real()),
                                       fmt(ef_numeric[k].imag()), fmt(std::abs(ef[k] - ef_numeric[k]))});
                }
                rows.push_back(std::move(r));
            }
            return rows;
        },
        out);
}

int cmd_ep_scan(const SweepConfig& config, std::ostream& out, std::ostream* summary) {
    config.validate();
    if (config.mode != SweepMode::EpScan && config.mode != SweepMode::LepScan) {
        throw ConfigError("ep-scan: mode must be ep-scan or lep-scan");
    }
    if (!config.sweep) {
        field_error("sweep", "ep-scan and lep-scan need a sweep");
    }
    const bool lep = config.mode == SweepMode::LepScan;
    const FockCutoff cutoff(config.cutoff);
    const std::vector<int> sectors = fock::excitation_sectors(cutoff);

    ScanBuilder builder;
    if (lep) {
        builder = [&](double v) { return ScanMatrix{dynamical_matrix(config.at(v)).m, {}}; };
    } else {
        builder = [&](double v) {
            SystemParams p = config.at(v);
            // The drive only adds -chi to every eigenvalue; the undriven
            // operator keeps total excitation number as a good quantum number.
            p.eps = 0.0;
            ComplexMatrix h = config.hamiltonian == "drift" ? build_drift_h(p, cutoff) : build_h_nh(p, cutoff);
            return ScanMatrix{std::move(h), sectors};
        };
    }
    ScanOptions options;
    options.cluster_eps_rel = config.cluster_eps;
    options.angle_eps = config.angle_eps;
    if (!lep) {
        options.sectors = config.sectors;
    }

    const std::vector<double> grid = config.grid();
    const std::vector<CoalescenceReport> reports = coalescence_scan(builder, grid, options);

    TableWriter writer(out, config.json);
    const std::string target = lep ? "dynamical matrix M" : (config.hamiltonian == "drift" ? "drift H" : "H_nH");
    writer.meta(lep ? "lep-scan" : "ep-scan", "coalescence/1", config,
                {{"sweep_axis", config.sweep->axis}, {"target", target}});
    writer.columns({"sweep_value", "ok", "min_sector_angle", "n_clusters", "min_cluster_angle", "coalescence",
                    "error"});
    json failed = json::array();
    for (const auto& r : reports) {
        double min_cluster = std::numeric_limits<double>::quiet_NaN();
        for (const auto& c : r.clusters) {
            min_cluster = std::isnan(min_cluster) ? c.min_angle : std::min(min_cluster, c.min_angle);
        }
        if (!r.ok) {
            failed.push_back(r.parameter);
        }
        writer.row({fmt(r.parameter), fmt_bool(r.ok), r.ok ? fmt(r.min_sector_angle) : std::string(),
                    std::to_string(r.clusters.size()), r.clusters.empty() ? std::string() : fmt(min_cluster),
                    fmt_bool(r.coalescence), r.error});
    }

    json s = {{"command", lep ? "lep-scan" : "ep-scan"}, {"axis", config.sweep->axis}, {"failed_points", failed}};
    const auto estimate = locate_ep(reports);
    if (estimate) {
        s["located"] = estimate->parameter;
        s["uncertainty"] = estimate->uncertainty;
        s["angle"] = estimate->angle;
        s["flagged"] = estimate->flagged;
    } else {
        s["located"] = nullptr;
    }
    if (config.sweep->axis == "g") {
        const double kappa = std::abs(config.base.kappa());
        s["predicted_g_hep"] = hep_coupling(kappa, config.base.n_th);
        s["predicted_g_lep"] = lep_coupling(kappa);
    }
    writer.summary(s.dump());
    if (summary) {
        *summary << s.dump() << '\n';
    }
    return estimate ? 0 : 2;
}

int cmd_liouvillian_check(const SweepConfig& config, std::ostream& out) {
    config.validate();
    const FockCutoff cutoff(config.cutoff);
    ScanOptions options;
    options.cluster_eps_rel = config.cluster_eps;
    options.angle_eps = config.angle_eps;
    TableWriter writer(out, config.json);
    writer.meta("liouvillian-check", "liouvillian/1", config,
                {{"sweep_axis", config.sweep ? config.sweep->axis : std::string("none")},
                 {"note", "evaluated at eps = 0"}});
    writer.columns({"sweep_value", "re_target_plus", "im_target_plus", "dist_plus", "re_target_minus",
                    "im_target_minus", "dist_minus", "zero_distance", "contains_targets", "has_zero",
                    "single_excitation_angle", "single_excitation_coalescence"});
    return write_rows_in_order(
        config.grid(), writer,
        [&](double v) {
            const LiouvillianCheck c =
                liouvillian_spectrum_check(config.at(v), cutoff, config.liouvillian_tol, options);
            return std::vector<std::vector<std::string>>{
                {sweep_cell(v), fmt(c.targets[0].real()), fmt(c.targets[0].imag()), fmt(c.distances[0]),
                 fmt(c.targets[1].real()), fmt(c.targets[1].imag()), fmt(c.distances[1]), fmt(c.zero_distance),
                 fmt_bool(c.contains_targets), fmt_bool(c.has_zero), fmt(c.single_excitation.min_sector_angle),
                 fmt_bool(c.single_excitation.coalescence)}};
        },
        out);
}

int cmd_trajectories(const SweepConfig& config, std::ostream& out) {
    config.validate();
    const FockCutoff cutoff(config.cutoff);
    const auto& s = config.trajectories;
    const std::vector<double> grid = config.grid();

    // Resolve and check every point before any row is written.
    std::vector<TrajectoryConfig> configs;
    for (double v : grid) {
        const SystemParams p = config.at(v);
        TrajectoryConfig tc;
        tc.cutoff = cutoff;
        tc.t_final = s.t_final;
        tc.n_traj = s.n_traj;
        tc.seed = s.seed;
        tc.n_samples = s.n_samples;
        tc.guard_threshold = s.guard_threshold;
        tc.dt = s.dt ? *s.dt : auto_time_step(p, cutoff, s.t_final, s.n_samples, tc.max_rate_dt);
        tc.validate();
        if (tc.dt * max_jump_rate(p, cutoff) > tc.max_rate_dt) {
            field_error("trajectories.dt", "dt * max jump rate exceeds " + fmt(tc.max_rate_dt));
        }
        if (tc.n_traj < 1000) {
            field_error("trajectories.n_traj", "the master-equation comparison needs at least 1000 trajectories");
        }
        configs.push_back(tc);
    }

    TableWriter writer(out, config.json);
    writer.meta("trajectories", "trajectories/1", config,
                {{"sweep_axis", config.sweep ? config.sweep->axis : std::string("none")},
                 {"seed", std::to_string(s.seed)},
                 {"dt", fmt(configs.front().dt)},
                 {"initial_state", "two-mode vacuum"}});
    writer.columns({"sweep_value", "t", "trace_distance", "mean_jumps", "mean_survival"});
    const ComplexVector vacuum = fock::basis_state(0, 0, cutoff);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const EnsembleComparison cmp = ensemble_vs_master(config.at(grid[i]), configs[i], vacuum);
        for (std::size_t k = 0; k < cmp.trace_distance.size(); ++k) {
            writer.row({sweep_cell(grid[i]), fmt(cmp.ensemble.sample_times[k]), fmt(cmp.trace_distance[k]),
                        fmt(cmp.ensemble.mean_jumps[k]), fmt(cmp.ensemble.mean_survival[k])});
        }
    }
    return 0;
}

int run_command(const SweepConfig& config, std::ostream& out, std::ostream* summary) {
    switch (config.mode) {
        case SweepMode::HamiltonianSpectrum:
            return cmd_spectrum(config, out);
        case SweepMode::EpScan:
        case SweepMode::LepScan:
            return cmd_ep_scan(config, out, summary);
        case SweepMode::LiouvillianCheck:
            return cmd_liouvillian_check(config, out);
        case SweepMode::Trajectories:
            return cmd_trajectories(config, out);
    }
    return 1;
}

}  // namespace tep
