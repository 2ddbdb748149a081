// Monte Carlo wave-function (quantum-jump) unraveling of the master equation.
//
// Each trajectory draws from its own generator seeded by (seed, index), so
// ensembles are reproducible independent of how trajectories are scheduled.

#pragma once

#include "thermal_ep/liouvillian.hpp"
#include "thermal_ep/model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace tep {

struct TrajectoryConfig {
    double dt = 1e-3;
    double t_final = 1.0;
    std::size_t n_traj = 1000;
    std::uint64_t seed = 20220901;
    FockCutoff cutoff{6};
    std::size_t n_samples = 10;          // sample times t_final * k / n_samples, k = 1..n_samples
    double guard_threshold = 1e-6;       // top-level population allowed before a creation-type jump
    double max_rate_dt = 0.05;           // bound on dt * (largest total jump rate)
    bool postselect_no_jump = false;     // always take the no-jump branch
    std::size_t workers = 0;             // 0: default_workers()

    // Throws ConfigError on dt <= 0, n_traj == 0, n_samples == 0 or a step
    // count that does not divide into the sample interval.
    void validate() const;
    [[nodiscard]] std::size_t steps_per_sample() const;
};

struct JumpRecord {
    double time = 0.0;
    int channel = 0;
};

struct TrajectoryRecord {
    std::vector<JumpRecord> jumps;
    std::vector<ComplexVector> samples;     // normalised state at each sample time
    std::vector<double> survival_at_sample; // cumulative no-jump probability
    std::vector<std::size_t> jumps_at_sample;
    double survival = 1.0;                  // product of no-jump norms over the run
    ComplexVector final_state;
};

// Counter-style stream derivation: the generator for trajectory `index` of an
// ensemble seeded with `seed`.
std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index);
// Uniform double in [0, 1) from 53 random bits.
double uniform01(std::mt19937_64& rng);

// exp(-i H_nH dt).
ComplexMatrix no_jump_propagator(const SystemParams& params, FockCutoff cutoff, double dt);

// Largest eigenvalue of sum_i C_i^dag C_i, i.e. the largest total jump rate
// any state can have in the truncated space.
double max_jump_rate(const SystemParams& params, FockCutoff cutoff);

// Collapse operators together with the data the stepper needs.
class JumpModel {
public:
    JumpModel(const SystemParams& params, const TrajectoryConfig& config);

    [[nodiscard]] TrajectoryRecord run(const ComplexVector& initial, std::uint64_t index) const;

    [[nodiscard]] const std::vector<ComplexMatrix>& collapse_ops() const noexcept { return collapse_; }
    [[nodiscard]] const ComplexMatrix& propagator() const noexcept { return propagator_; }

private:
    TrajectoryConfig config_;
    std::vector<ComplexMatrix> collapse_;
    std::vector<Eigen::VectorXd> rates_;   // diagonal of C_i^dag C_i
    std::vector<int> creation_mode_;       // -1 for loss channels, else 0 (A) / 1 (B)
    ComplexMatrix propagator_;
};

TrajectoryRecord run_trajectory(const SystemParams& params, const TrajectoryConfig& config,
                                const ComplexVector& initial, std::uint64_t index = 0);

struct TrajectoryEnsemble {
    std::vector<double> sample_times;
    std::vector<ComplexMatrix> average_rho;  // one per sample time
    std::vector<double> mean_jumps;          // mean cumulative jump count
    std::vector<double> mean_survival;
    std::vector<std::vector<JumpRecord>> jumps;  // per trajectory
    std::vector<double> survival;                // per trajectory
};

TrajectoryEnsemble run_ensemble(const SystemParams& params, const TrajectoryConfig& config,
                                const ComplexVector& initial);

// Exact evolution exp(L t_k) vec(rho0) at the ensemble sample times.
std::vector<ComplexMatrix> master_evolution(const SystemParams& params, const TrajectoryConfig& config,
                                            const ComplexMatrix& rho0);

struct EnsembleComparison {
    TrajectoryEnsemble ensemble;
    std::vector<ComplexMatrix> master;
    std::vector<double> trace_distance;
};

// Throws ConfigError when n_traj < min_traj.
EnsembleComparison ensemble_vs_master(const SystemParams& params, const TrajectoryConfig& config,
                                      const ComplexVector& initial, std::size_t min_traj = 1000);

// (1/2) sum |eig(rho - sigma)| for Hermitian inputs.
double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& sigma);

// Normalised exp(-i H_nH t) psi0.
ComplexVector no_jump_evolution(const SystemParams& params, FockCutoff cutoff, const ComplexVector& psi0,
                                double t);

}  // namespace tep
