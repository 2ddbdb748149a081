#include "thermal_ep/trajectory.hpp"

#include "thermal_ep/fockspace.hpp"
#include "thermal_ep/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tep {

namespace {

// Trajectories are reduced in fixed-size blocks so the floating-point
// summation order does not depend on the worker count.
constexpr std::size_t kReduceBlock = 64;

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

void TrajectoryConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ConfigError("trajectories: dt must be > 0");
    }
    if (!(t_final > 0.0)) {
        throw ConfigError("trajectories: t_final must be > 0");
    }
    if (n_traj == 0) {
        throw ConfigError("trajectories: n_traj must be >= 1");
    }
    if (n_samples == 0) {
        throw ConfigError("trajectories: n_samples must be >= 1");
    }
    (void)steps_per_sample();  // throws when dt does not divide the sample interval
}

std::size_t TrajectoryConfig::steps_per_sample() const {
    const double interval = t_final / static_cast<double>(n_samples);
    const double steps = interval / dt;
    const double rounded = std::round(steps);
    if (rounded < 1.0 || std::abs(steps - rounded) > 1e-6 * std::max(1.0, steps)) {
        std::ostringstream msg;
        msg << "trajectories: sample interval " << interval << " is not a whole number of steps dt = " << dt;
        throw ConfigError(msg.str());
    }
    return static_cast<std::size_t>(rounded);
}

std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t state = seed;
    const std::uint64_t a = splitmix64(state);
    state = a ^ (index * 0xD1B54A32D192ED03ULL);
    const std::uint64_t b = splitmix64(state);
    std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

ComplexMatrix no_jump_propagator(const SystemParams& params, FockCutoff cutoff, double dt) {
    return mat_exp(-kI * dt * build_h_nh(params, cutoff));
}

double max_jump_rate(const SystemParams& params, FockCutoff cutoff) {
    ComplexMatrix total = ComplexMatrix::Zero(cutoff.dim(), cutoff.dim());
    for (const ComplexMatrix& c : build_collapse_ops(params, cutoff)) {
        total += c.adjoint() * c;
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(total, Eigen::EigenvaluesOnly);
    return std::max(0.0, solver.eigenvalues().maxCoeff());
}

JumpModel::JumpModel(const SystemParams& params, const TrajectoryConfig& config)
    : config_(config), collapse_(build_collapse_ops(params, config.cutoff)) {
    config_.validate();
    const double rate = max_jump_rate(params, config.cutoff);
    if (config_.dt * rate > config_.max_rate_dt) {
        std::ostringstream msg;
        msg << "trajectories: dt * max jump rate = " << config_.dt * rate << " exceeds " << config_.max_rate_dt
            << " (max rate " << rate << "); reduce dt";
        throw ConfigError(msg.str());
    }
    for (const ComplexMatrix& c : collapse_) {
        const ComplexMatrix cdc = c.adjoint() * c;
        // All channels here are a, a^dag, b, b^dag: C^dag C is diagonal.
        rates_.push_back(cdc.diagonal().real());
    }
    // Channel layout from build_collapse_ops: loss only at n = 0, otherwise
    // (loss A, gain A, loss B, gain B).
    if (collapse_.size() == 4) {
        creation_mode_ = {-1, 0, -1, 1};
    } else {
        creation_mode_.assign(collapse_.size(), -1);
    }
    propagator_ = no_jump_propagator(params, config.cutoff, config.dt);
}

TrajectoryRecord JumpModel::run(const ComplexVector& initial, std::uint64_t index) const {
    const FockCutoff cutoff = config_.cutoff;
    if (initial.size() != cutoff.dim()) {
        throw DimensionError("trajectory: initial state has the wrong dimension");
    }
    const double norm0 = initial.norm();
    if (std::abs(norm0 - 1.0) > 1e-9) {
        throw ConfigError("trajectory: initial state must be normalised");
    }
    const std::size_t per_sample = config_.steps_per_sample();
    const std::size_t total_steps = per_sample * config_.n_samples;
    const int top = cutoff.levels() - 1;

    std::mt19937_64 rng = trajectory_rng(config_.seed, index);
    TrajectoryRecord record;
    record.samples.reserve(config_.n_samples);
    ComplexVector psi = initial / norm0;
    ComplexVector next(psi.size());
    std::vector<double> probs(collapse_.size());

    for (std::size_t step = 0; step < total_steps; ++step) {
        const double t = static_cast<double>(step) * config_.dt;
        double total = 0.0;
        if (!config_.postselect_no_jump) {
            const Eigen::VectorXd population = psi.cwiseAbs2();
            for (std::size_t i = 0; i < collapse_.size(); ++i) {
                probs[i] = config_.dt * rates_[i].dot(population);
                total += probs[i];
            }
        }
        const double r = config_.postselect_no_jump ? 1.0 : uniform01(rng);
        if (r < total) {
            std::size_t channel = 0;
            double acc = probs[0];
            while (channel + 1 < probs.size() && r >= acc) {
                ++channel;
                acc += probs[channel];
            }
            if (const int mode = creation_mode_[channel]; mode >= 0) {
                double top_population = 0.0;
                for (int k = 0; k < cutoff.levels(); ++k) {
                    const int idx = mode == 0 ? cutoff.index(top, k) : cutoff.index(k, top);
                    top_population += std::norm(psi(idx));
                }
                if (top_population > config_.guard_threshold) {
                    std::ostringstream msg;
                    msg << "trajectory " << index << ": creation jump at t = " << t << " with top-level population "
                        << top_population << " > " << config_.guard_threshold << "; increase the cutoff";
                    throw TruncationGuardError(msg.str());
                }
            }
            next.noalias() = collapse_[channel] * psi;
            psi = next / next.norm();
            record.jumps.push_back({t + config_.dt, static_cast<int>(channel)});
        } else {
            next.noalias() = propagator_ * psi;
            const double n2 = next.squaredNorm();
            record.survival *= n2;
            psi = next / std::sqrt(n2);
        }
        if ((step + 1) % per_sample == 0) {
            record.samples.push_back(psi);
            record.survival_at_sample.push_back(record.survival);
            record.jumps_at_sample.push_back(record.jumps.size());
        }
    }
    record.final_state = psi;
    return record;
}

TrajectoryRecord run_trajectory(const SystemParams& params, const TrajectoryConfig& config,
                                const ComplexVector& initial, std::uint64_t index) {
    return JumpModel(params, config).run(initial, index);
}

TrajectoryEnsemble run_ensemble(const SystemParams& params, const TrajectoryConfig& config,
                                const ComplexVector& initial) {
    const JumpModel model(params, config);
    const std::size_t n_samples = config.n_samples;
    const Eigen::Index dim = config.cutoff.dim();

    struct Partial {
        std::vector<ComplexMatrix> rho;
        std::vector<double> jumps;
        std::vector<double> survival;
    };
    const std::size_t n_blocks = (config.n_traj + kReduceBlock - 1) / kReduceBlock;
    std::vector<Partial> partials(n_blocks);

    TrajectoryEnsemble out;
    out.jumps.resize(config.n_traj);
    out.survival.resize(config.n_traj);

    const std::size_t workers = config.workers == 0 ? default_workers() : config.workers;
    parallel_for(n_blocks, workers, [&](std::size_t block) {
        Partial p;
        p.rho.assign(n_samples, ComplexMatrix::Zero(dim, dim));
        p.jumps.assign(n_samples, 0.0);
        p.survival.assign(n_samples, 0.0);
        const std::size_t begin = block * kReduceBlock;
        const std::size_t end = std::min(config.n_traj, begin + kReduceBlock);
        for (std::size_t i = begin; i < end; ++i) {
            TrajectoryRecord rec = model.run(initial, i);
            for (std::size_t k = 0; k < n_samples; ++k) {
                p.rho[k].noalias() += rec.samples[k] * rec.samples[k].adjoint();
                p.jumps[k] += static_cast<double>(rec.jumps_at_sample[k]);
                p.survival[k] += rec.survival_at_sample[k];
            }
            out.jumps[i] = std::move(rec.jumps);
            out.survival[i] = rec.survival;
        }
        partials[block] = std::move(p);
    });

    const double inv = 1.0 / static_cast<double>(config.n_traj);
    out.average_rho.assign(n_samples, ComplexMatrix::Zero(dim, dim));
    out.mean_jumps.assign(n_samples, 0.0);
    out.mean_survival.assign(n_samples, 0.0);
    for (const Partial& p : partials) {
        for (std::size_t k = 0; k < n_samples; ++k) {
            out.average_rho[k] += p.rho[k];
            out.mean_jumps[k] += p.jumps[k];
            out.mean_survival[k] += p.survival[k];
        }
    }
    out.sample_times.resize(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
        out.average_rho[k] *= inv;
        out.mean_jumps[k] *= inv;
        out.mean_survival[k] *= inv;
        out.sample_times[k] = config.t_final * static_cast<double>(k + 1) / static_cast<double>(n_samples);
    }
    return out;
}

std::vector<ComplexMatrix> master_evolution(const SystemParams& params, const TrajectoryConfig& config,
                                            const ComplexMatrix& rho0) {
    config.validate();
    const Superoperator l = build_liouvillian(params, config.cutoff);
    const double interval = config.t_final / static_cast<double>(config.n_samples);
    const ComplexMatrix step = mat_exp(interval * l.matrix);
    std::vector<ComplexMatrix> out;
    out.reserve(config.n_samples);
    ComplexVector v = vec(rho0);
    for (std::size_t k = 0; k < config.n_samples; ++k) {
        v = step * v;
        out.push_back(unvec(v, l.hilbert_dim));
    }
    return out;
}

double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
    const ComplexMatrix diff = rho - sigma;
    const ComplexMatrix herm = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm, Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

EnsembleComparison ensemble_vs_master(const SystemParams& params, const TrajectoryConfig& config,
                                      const ComplexVector& initial, std::size_t min_traj) {
    if (config.n_traj < min_traj) {
        throw ConfigError("ensemble_vs_master: need at least " + std::to_string(min_traj) + " trajectories");
    }
    EnsembleComparison out;
    out.ensemble = run_ensemble(params, config, initial);
    const ComplexVector psi0 = initial.normalized();
    out.master = master_evolution(params, config, psi0 * psi0.adjoint());
    out.trace_distance.reserve(out.master.size());
    for (std::size_t k = 0; k < out.master.size(); ++k) {
        out.trace_distance.push_back(trace_distance(out.ensemble.average_rho[k], out.master[k]));
    }
    return out;
}

ComplexVector no_jump_evolution(const SystemParams& params, FockCutoff cutoff, const ComplexVector& psi0,
                                double t) {
    const ComplexVector psi = mat_exp(-kI * t * build_h_nh(params, cutoff)) * psi0;
    const double norm = psi.norm();
    if (!(norm > 0.0)) {
        throw NumericalError("no_jump_evolution: state decayed to zero norm");
    }
    return psi / norm;
}

}  // namespace tep
