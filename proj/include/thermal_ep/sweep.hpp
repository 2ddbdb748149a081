// Parameter-sweep drivers behind the `tep` command-line tool: configuration
// parsing, the five commands and their tabular output.

#pragma once

#include "thermal_ep/model.hpp"
#include "thermal_ep/spectral.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tep {

enum class SweepMode { HamiltonianSpectrum, EpScan, LepScan, LiouvillianCheck, Trajectories };

std::string to_string(SweepMode mode);
// Accepts the mode names ("hamiltonian-spectrum", ...) and the subcommand
// names ("spectrum", ...).
SweepMode parse_mode(const std::string& name);

struct GridSpec {
    std::string axis;  // kappa, gamma, g, eps, n_th, gamma_a, gamma_b
    double min = 0.0;
    double max = 0.0;
    double step = 0.0;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct TrajectorySettings {
    std::optional<double> dt;  // chosen from the jump-rate bound when absent
    double t_final = 1.0;
    std::size_t n_traj = 1000;
    std::uint64_t seed = 20220901;
    std::size_t n_samples = 10;
    double guard_threshold = 1e-6;

    friend bool operator==(const TrajectorySettings&, const TrajectorySettings&) = default;
};

struct SweepConfig {
    SweepMode mode = SweepMode::HamiltonianSpectrum;
    SystemParams base;
    std::optional<GridSpec> sweep;
    int cutoff = FockCutoff::kDefault;
    std::string output;  // empty: stdout
    double cluster_eps = 1e-6;
    double angle_eps = 1e-3;
    double liouvillian_tol = 1e-6;
    std::string hamiltonian = "h_nh";  // ep-scan target: h_nh or drift
    std::vector<int> sectors{1, 2};    // excitation sectors analysed by ep-scan
    TrajectorySettings trajectories;
    bool json = false;

    // Throws ConfigError naming the offending field.
    void validate() const;
    [[nodiscard]] std::vector<double> grid() const;
    // Base parameters with the swept axis set to value.
    [[nodiscard]] SystemParams at(double value) const;

    friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

// Figure-style defaults for each mode.
SweepConfig default_config(SweepMode mode);

// Parse a JSON document. Unknown keys and type mismatches raise ConfigError
// with the field path; syntax errors report line and column.
SweepConfig parse_config(const std::string& text, std::optional<SweepMode> mode = std::nullopt);
SweepConfig load_config(const std::string& path, std::optional<SweepMode> mode = std::nullopt);
// Canonical single-line JSON; parse_config(config_to_json(c)) == c.
std::string config_to_json(const SweepConfig& config);

// Row-oriented writer for CSV (with '#' header lines) or JSON lines.
class TableWriter {
public:
    TableWriter(std::ostream& out, bool json);

    void meta(const std::string& command, const std::string& schema, const SweepConfig& config,
              const std::vector<std::pair<std::string, std::string>>& extra = {});
    void columns(std::vector<std::string> names);
    // Cells are pre-formatted; empty strings become empty CSV fields / null.
    void row(const std::vector<std::string>& cells);
    void summary(const std::string& json_object);

private:
    std::ostream& out_;
    bool json_;
    std::vector<std::string> names_;
};

// Each command writes its table to `out` and returns the process exit code
// (0 success, 2 numerical failure after flushing completed rows). Config
// errors are thrown as ConfigError before any row is written.
int cmd_spectrum(const SweepConfig& config, std::ostream& out);
int cmd_ep_scan(const SweepConfig& config, std::ostream& out, std::ostream* summary = nullptr);
int cmd_liouvillian_check(const SweepConfig& config, std::ostream& out);
int cmd_trajectories(const SweepConfig& config, std::ostream& out);

// Dispatch on config.mode.
int run_command(const SweepConfig& config, std::ostream& out, std::ostream* summary = nullptr);

// Numeric eigenvalues of the tracked states psi1..psi4 for one matrix.
// Labels come from eigenvector overlap with the supermode states when the
// parameters are clearly inside the unbroken region, else from the nearest
// eigenvalue to `reference`. With eps = 0 the search is restricted to the
// matching excitation sector.
std::array<Complex, 4> tracked_eigenvalues(const ComplexMatrix& h, const SystemParams& params, FockCutoff cutoff,
                                           const std::array<Complex, 4>& reference);

// Time step from the jump-rate bound, dividing the sample interval exactly.
double auto_time_step(const SystemParams& params, FockCutoff cutoff, double t_final, std::size_t n_samples,
                      double max_rate_dt = 0.05);

}  // namespace tep
