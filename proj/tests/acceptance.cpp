// Acceptance run: one PASS/FAIL line per criterion.

#include "oracles.hpp"

#include "thermal_ep/fockspace.hpp"
#include "thermal_ep/liouvillian.hpp"
#include "thermal_ep/model.hpp"
#include "thermal_ep/spectral.hpp"
#include "thermal_ep/sweep.hpp"
#include "thermal_ep/trajectory.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace tep;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

ComplexMatrix sector_block(const ComplexMatrix& h, FockCutoff c, int n) {
    std::vector<Eigen::Index> idx;
    for (int i = 0; i < c.dim(); ++i) {
        if (c.occupation_a(i) + c.occupation_b(i) == n) {
            idx.push_back(i);
        }
    }
    return h(idx, idx);
}

std::vector<Eigen::Index> interior_support(FockCutoff c) {
    std::vector<Eigen::Index> out;
    for (int i = 0; i < c.dim(); ++i) {
        if (c.occupation_a(i) <= c.levels() - 2 && c.occupation_b(i) <= c.levels() - 2) {
            out.push_back(i);
        }
    }
    return out;
}

std::optional<EpEstimate> scan_g(const std::function<ScanMatrix(double)>& builder, std::vector<int> sectors) {
    ScanOptions options;
    options.sectors = std::move(sectors);
    return locate_ep(coalescence_scan(builder, make_grid(0.5, 1.6, 0.01), options));
}

// Optical or thermal H_nH at zero drive over g, kappa = 1, gamma = 2.
std::optional<EpEstimate> hep_scan(double n, FockCutoff c, bool drift = false) {
    const auto sectors = fock::excitation_sectors(c);
    return scan_g(
        [&](double g) {
            const SystemParams p = SystemParams::from_gamma_kappa(g, 2.0, 1.0, 0.0, n);
            return ScanMatrix{drift ? build_drift_h(p, c) : build_h_nh(p, c), sectors};
        },
        drift ? std::vector<int>{1} : std::vector<int>{1, 2});
}

std::optional<EpEstimate> lep_scan(double n) {
    return scan_g(
        [&](double g) {
            return ScanMatrix{dynamical_matrix(SystemParams::from_gamma_kappa(g, 2.0, 1.0, 0.0, n)).m, {}};
        },
        {});
}

void ac1(Outcome& o) {
    double worst_ef_im = 0.0;
    double worst_pair = 0.0;
    double worst_coalesce = 0.0;
    for (const double kappa : make_grid(0.0, 2.0, 0.02)) {
        const DerivedParams d = derive(SystemParams::from_gamma_kappa(1.0, 2.0, kappa, 1.0));
        std::array<Complex, 4> ef{}, nh{};
        for (std::size_t k = 0; k < 4; ++k) {
            ef[k] = analytic_lambda_pt(kTrackedStates[k].n_e, kTrackedStates[k].n_f, d);
            nh[k] = analytic_lambda_nh(kTrackedStates[k].n_e, kTrackedStates[k].n_f, d, false);
        }
        if (kappa < 1.0 - 1e-9) {
            for (const Complex& v : ef) {
                worst_ef_im = std::max(worst_ef_im, std::abs(v.imag()));
            }
            o.require(std::abs(nh[0] - nh[1]) > 1e-6, "IF pair split below the EP");
        } else if (kappa > 1.0 + 1e-9) {
            worst_pair = std::max(worst_pair, std::abs(ef[0] - std::conj(ef[1])));
            worst_pair = std::max(worst_pair, std::abs(ef[2] - std::conj(ef[3])));
            o.require(std::abs(ef[0].imag()) > 1e-6, "EF complex above the EP");
        } else {
            worst_coalesce = std::max(std::abs(nh[0] - nh[1]), std::abs(nh[2] - nh[3]));
        }
    }
    o.detail << "max|Im EF| below EP " << worst_ef_im << ", conj-pair defect " << worst_pair
             << ", IF split at kappa=g " << worst_coalesce;
    o.require(worst_ef_im <= 1e-12, "EF real");
    o.require(worst_pair <= 1e-12, "conjugate pairs");
    o.require(worst_coalesce <= 1e-12, "coalescence at kappa = g");
}

void ac2(Outcome& o) {
    double worst = 0.0;
    const FockCutoff c6(6);
    for (double kappa : {0.2, 0.5, 0.9, 1.5}) {
        const SystemParams p = SystemParams::from_gamma_kappa(1.0, 2.0, kappa);
        const DerivedParams d = derive(p);
        const ComplexMatrix h = build_h_nh(p, c6);
        for (int N = 1; N <= 2; ++N) {
            std::vector<Complex> expected;
            for (int ne = 0; ne <= N; ++ne) {
                expected.push_back(analytic_lambda_nh(ne, N - ne, d, false));
            }
            worst = std::max(worst, oracle::multiset_distance(eig(sector_block(h, c6, N), false).eigenvalues, expected));
        }
    }
    o.detail << "eps=0 sector error " << worst;
    o.require(worst <= 1e-8, "eps = 0 sectors");

    // Driven case: error of the tracked eigenvalues against the closed forms
    // (complete drive constant) at growing cutoff.
    for (double kappa : {0.2, 0.5}) {
        const SystemParams p = SystemParams::from_gamma_kappa(1.0, 2.0, kappa, 1.0);
        const DerivedParams d = derive(p);
        std::array<Complex, 4> reference{};
        for (std::size_t k = 0; k < 4; ++k) {
            reference[k] = analytic_lambda_nh(kTrackedStates[k].n_e, kTrackedStates[k].n_f, d, false, true);
        }
        double previous = std::numeric_limits<double>::infinity();
        o.detail << "; eps=1 kappa=" << kappa << " errors";
        for (int levels : {6, 8, 10, 12}) {
            const FockCutoff c(levels);
            const auto numeric = tracked_eigenvalues(build_h_nh(p, c), p, c, reference);
            double err = 0.0;
            for (std::size_t k = 0; k < 4; ++k) {
                err = std::max(err, std::abs(numeric[k] - reference[k]));
            }
            o.detail << " " << err;
            o.require(err < previous, "monotone in d");
            previous = err;
        }
    }
}

void ac3_ac4(Outcome& o3, Outcome& o4) {
    const FockCutoff c(4);
    for (double n : {0.0, 0.1, 0.2}) {
        const auto hep = hep_scan(n, c);
        const auto lep = lep_scan(n);
        if (!hep || !lep) {
            o3.require(static_cast<bool>(hep), "HEP located");
            o4.require(static_cast<bool>(lep), "LEP located");
            continue;
        }
        const double expected_hep = hep_coupling(1.0, n);
        o3.detail << "n=" << n << ": g_HEP " << hep->parameter << " (expected " << expected_hep << "); ";
        o3.require(std::abs(hep->parameter - expected_hep) <= 0.01 + 1e-9, "HEP location");
        o3.require(hep->flagged, "HEP flagged");

        o4.detail << "n=" << n << ": g_LEP " << lep->parameter << ", gap " << hep->parameter - lep->parameter << "; ";
        o4.require(std::abs(lep->parameter - lep_coupling(1.0)) <= 0.01 + 1e-9, "LEP location");
        o4.require(std::abs((hep->parameter - lep->parameter) - 2 * n * 1.0) <= 0.02 + 1e-9, "gap");
    }
}

void ac5(Outcome& o) {
    const FockCutoff c(5);
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    double worst_n_dependence = 0.0;
    const SystemParams p0{1.0, 2.5, 1.5, 0.7, 0.0};
    SystemParams p3 = p0;
    p3.n_th = 0.3;
    const Superoperator l0 = build_liouvillian(p0, c);
    const Superoperator l3 = build_liouvillian(p3, c);
    for (int trial = 0; trial < 20; ++trial) {
        const ComplexMatrix rho = oracle::random_density(c.dim(), interior_support(c), rng);
        const MomentCheck m0 = moment_rhs_check(p0, l0, c, rho);
        const MomentCheck m3 = moment_rhs_check(p3, l3, c, rho);
        worst = std::max({worst, m0.discrepancy, m3.discrepancy});
        for (int k = 0; k < 2; ++k) {
            worst_n_dependence = std::max(worst_n_dependence, std::abs(m0.from_liouvillian[k] - m3.from_liouvillian[k]));
        }
    }
    o.detail << "max discrepancy " << worst << ", n-dependence " << worst_n_dependence;
    o.require(worst <= 1e-8, "moment equations");
    o.require(worst_n_dependence <= 1e-8, "n independence");
}

void ac6(Outcome& o) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    double worst_value = 0.0;
    double worst_angle = 0.0;
    int points = 0;
    while (points < 10) {
        const SystemParams p{u(rng), u(rng), u(rng), 0.0, 0.0};
        if (std::abs(p.g - std::abs(p.kappa())) < 0.05) {
            continue;  // keep away from the EP where eigenvectors are ill-conditioned
        }
        ++points;
        const DerivedParams d = derive(p);
        const Spectrum s = eig(dynamical_matrix(p).m);
        const auto [lp, lm] = lambda_pm(d);
        const auto [vp, vm] = v_pm(d);
        for (const auto& [lambda, v] : {std::pair{lp, vp}, std::pair{lm, vm}}) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < s.size(); ++i) {
                if (std::abs(s.eigenvalues[i] - lambda) < std::abs(s.eigenvalues[best] - lambda)) {
                    best = i;
                }
            }
            worst_value = std::max(worst_value, std::abs(s.eigenvalues[best] - lambda));
            worst_angle = std::max(worst_angle, span_angle(s.vector(best), v));
        }
    }
    o.detail << "eigenvalue error " << worst_value << ", eigenvector angle " << worst_angle;
    o.require(worst_value <= 1e-12, "eigenvalues");
    o.require(worst_angle <= 1e-10, "eigenvectors");
}

void ac7(Outcome& o) {
    const FockCutoff c(6);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    double recon = 0.0, comm = 0.0, frame = 0.0, sym = 0.0;
    for (int trial = 0; trial < 8; ++trial) {
        const SystemParams p{u(rng), u(rng), u(rng), trial % 2 ? u(rng) : 0.0, 0.0};
        const PtSplit split = build_h_pt_split(p, c);
        const ComplexMatrix h = build_h_nh(p, c);
        recon = std::max(recon, (split.h_pt + split.h_0 - h).cwiseAbs().maxCoeff() / h.cwiseAbs().maxCoeff());
        comm = std::max(comm, fock::restrict_interior(fock::commutator(split.h_pt, split.h_0), c).norm() /
                                  (split.h_pt.norm() * split.h_0.norm()));
        if (p.eps == 0.0) {
            const double t = 1.0 / p.gamma();
            const ComplexMatrix s_op = mat_exp(-kI * split.h_0 * t);
            const ComplexMatrix s_inv = mat_exp(kI * split.h_0 * t);
            frame = std::max(frame, fock::restrict_interior(s_inv * split.h_pt * s_op - split.h_pt, c).norm() /
                                        split.h_pt.norm());
            const ComplexMatrix pm = fock::parity_pt_operator(c);
            sym = std::max(sym, (pm * split.h_pt.conjugate() * pm - split.h_pt).norm() / split.h_pt.norm());
        }
    }
    // n = 0 takes the optical path: two loss channels, H_nH as built by hand,
    // and the Liouvillian of the optical master equation.
    const SystemParams p{1.0, 2.5, 1.5, 1.0, 0.0};
    const FockCutoff c4(4);
    const auto collapse = build_collapse_ops(p, c4);
    const ComplexMatrix h_optical = oracle::h_nh_by_hand(4, 1.0, 2.5, 1.5, 1.0);
    const bool reduces = collapse.size() == 2 && collapse[0] == std::sqrt(5.0) * fock::mode_a(c4) &&
                         collapse[1] == std::sqrt(3.0) * fock::mode_b(c4) && build_drift_h(p, c4) == build_h_nh(p, c4) &&
                         (build_h_nh(p, c4) - h_optical).cwiseAbs().maxCoeff() <= 1e-14 &&
                         (build_liouvillian(p, c4).matrix - build_liouvillian_from_h_nh(p, c4).matrix)
                                 .cwiseAbs()
                                 .maxCoeff() <= 1e-14;
    o.detail << "reconstruction " << recon << ", commutator " << comm << ", frame " << frame << ", PT symmetry "
             << sym << ", n=0 reduction " << (reduces ? "exact" : "inexact");
    o.require(recon <= 1e-12, "reconstruction");
    o.require(comm <= 1e-10, "commutator");
    o.require(frame <= 1e-8, "frame invariance");
    o.require(sym <= 1e-10, "PT symmetry");
    o.require(reduces, "thermal reduction");
}

void ac8(Outcome& o) {
    // g = 1, gamma = 2, kappa = 0.5, eps = 1 from the vacuum, t g = 1.
    const FockCutoff c(6);
    for (double n : {0.0, 0.2}) {
        const SystemParams p = SystemParams::from_gamma_kappa(1.0, 2.0, 0.5, 1.0, n);
        TrajectoryConfig config;
        config.cutoff = c;
        config.t_final = 1.0;
        config.n_samples = 1;
        config.n_traj = 10000;
        config.seed = 8;
        config.dt = auto_time_step(p, c, config.t_final, config.n_samples);
        o.detail << "n=" << n;
        if (n > 0.0) {
            // At d = 6 the thermal ensemble reaches the top level, so the
            // default guard stops the run. The comparison below is between
            // two unravelings of the same truncated generator and runs
            // without the guard.
            try {
                run_ensemble(p, config, fock::basis_state(0, 0, c));
                o.detail << " guard quiet;";
            } catch (const TruncationGuardError&) {
                o.detail << " guard (1e-6) fires at d=6, compared without it;";
            }
            config.guard_threshold = std::numeric_limits<double>::infinity();
        }
        const auto cmp = ensemble_vs_master(p, config, fock::basis_state(0, 0, c));
        const double limit = n == 0.0 ? 0.02 : 0.03;
        o.detail << " trace distance " << cmp.trace_distance.back() << " (dt " << config.dt << "); ";
        o.require(cmp.trace_distance.back() <= limit, "ensemble vs master");
    }

    const double gamma_a = 0.5;
    TrajectoryConfig single;
    single.cutoff = FockCutoff(2);
    single.dt = 0.002;
    single.t_final = 10.0;
    single.n_traj = 10000;
    single.n_samples = 1;
    single.seed = 88;
    const TrajectoryEnsemble e =
        run_ensemble(SystemParams{0.0, gamma_a, 0.0, 0.0, 0.0}, single, fock::basis_state(1, 0, single.cutoff));
    std::vector<double> times;
    for (const auto& jumps : e.jumps) {
        if (!jumps.empty()) {
            times.push_back(jumps.front().time);
        }
    }
    const double horizon = 1.0 - std::exp(-2 * gamma_a * single.t_final);
    const double ks =
        oracle::ks_statistic(times, [&](double t) { return (1.0 - std::exp(-2 * gamma_a * t)) / horizon; });
    o.detail << "KS " << ks;
    o.require(ks <= 0.02, "waiting times");
}

void ac9(Outcome& o) {
    const FockCutoff c(4);
    for (double n : {0.0, 0.2}) {
        const auto ep = hep_scan(n, c, true);
        if (!ep) {
            o.require(false, "drift EP located");
            continue;
        }
        o.detail << "n=" << n << ": g " << ep->parameter << " angle " << ep->angle << "; ";
        o.require(std::abs(ep->parameter - 1.0) <= 0.01 + 1e-9, "drift EP at g = kappa");
        o.require(ep->flagged, "drift EP flagged");
    }
}

void ac10(Outcome& o) {
    const FockCutoff c(4);
    const LiouvillianCheck check = liouvillian_spectrum_check(SystemParams::from_gamma_kappa(1.0, 2.0, 0.5), c);
    o.detail << "distances " << check.distances[0] << " " << check.distances[1] << "; ";
    o.require(check.contains_targets, "targets in the spectrum");

    const LiouvillianCheck at_ep = liouvillian_spectrum_check(SystemParams::from_gamma_kappa(1.0, 2.0, 1.0), c);
    bool degenerate_at_gamma = false;
    for (const auto& cluster : at_ep.single_excitation.clusters) {
        bool near = true;
        for (const Complex& v : cluster.eigenvalues) {
            near = near && std::abs(v + 2.0) <= 1e-6;
        }
        degenerate_at_gamma = degenerate_at_gamma || (near && cluster.eigenvalues.size() >= 2);
    }
    o.detail << "at kappa=g: coalescence " << (at_ep.single_excitation.coalescence ? "flagged" : "not flagged")
             << ", min angle " << at_ep.single_excitation.min_sector_angle;
    o.require(at_ep.contains_targets, "targets at the EP");
    o.require(at_ep.single_excitation.coalescence && degenerate_at_gamma, "flagged pair at -gamma");
}

}  // namespace

int main() {
    Outcome results[10];
    const std::function<void(Outcome&)> single[] = {ac1, ac2, nullptr, nullptr, ac5, ac6, ac7, ac8, ac9, ac10};
    double seconds[10] = {};
    auto guarded = [&](int i, const std::function<void()>& body) {
        const auto start = std::chrono::steady_clock::now();
        try {
            body();
        } catch (const std::exception& e) {
            results[i].require(false, std::string("exception: ") + e.what());
        }
        seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    for (int i = 0; i < 10; ++i) {
        if (i == 2) {
            guarded(2, [&] { ac3_ac4(results[2], results[3]); });
            seconds[3] = seconds[2];
        } else if (i != 3) {
            guarded(i, [&] { single[i](results[i]); });
        }
    }
    int failures = 0;
    for (int i = 0; i < 10; ++i) {
        failures += results[i].pass ? 0 : 1;
        std::printf("AC%d %s %s (%.1fs)\n", i + 1, results[i].pass ? "PASS" : "FAIL", results[i].detail.str().c_str(),
                    seconds[i]);
    }
    std::fflush(stdout);
    return failures == 0 ? 0 : 1;
}
