#include "thermal_ep/spectral.hpp"

#include "thermal_ep/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace tep {

Spectrum eig(const ComplexMatrix& a, bool want_vectors, double tol) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw DimensionError("eig: expected a non-empty square matrix, got " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()));
    }
    if (!a.allFinite()) {
        throw NumericalError("eig: matrix has non-finite entries");
    }
    // ComplexEigenSolver: Householder Hessenberg reduction, complex Schur form
    // by shifted QR (Wilkinson shifts with exceptional shifts on stagnation),
    // then back-substitution on the triangular factor.
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(a, want_vectors);
    if (solver.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "eig: QR iteration did not converge for a " << a.rows() << "x" << a.cols()
            << " matrix (||A||_F = " << a.norm() << ")";
        throw NumericalError(msg.str());
    }
    Spectrum out;
    out.matrix_norm = a.norm();
    const ComplexVector& values = solver.eigenvalues();
    out.eigenvalues.assign(values.data(), values.data() + values.size());
    if (!want_vectors) {
        return out;
    }
    out.eigenvectors = solver.eigenvectors();
    out.residuals.resize(out.eigenvalues.size());
    const double bound = tol * std::max(out.matrix_norm, std::numeric_limits<double>::min());
    double worst = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        auto v = out.eigenvectors.col(i);
        const double norm = v.norm();
        if (norm > 0.0) {
            v /= norm;
        }
        const double r = (a * v - values(i) * v).norm();
        out.residuals[static_cast<std::size_t>(i)] = r;
        worst = std::max(worst, r);
    }
    if (worst > bound) {
        std::ostringstream msg;
        msg << "eig: residual " << worst << " exceeds " << tol << " * ||A|| = " << bound;
        throw NumericalError(msg.str());
    }
    return out;
}

double span_angle(const ComplexVector& u, const ComplexVector& v) {
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) {
        throw NumericalError("span_angle: zero vector");
    }
    const double overlap = std::min(1.0, std::abs(u.dot(v)) / (nu * nv));
    // acos loses half the digits near overlap 1; use the sine form there.
    const double sine = (v / nv - u.dot(v) / (nu * nu) * u / nv).norm();
    if (overlap > 0.7) {
        return std::asin(std::min(1.0, sine));
    }
    return std::acos(overlap);
}

// ------------------------------------------------------------------- scans

namespace {

// Single-linkage grouping of eigenvalues within `radius`.
std::vector<std::vector<std::size_t>> cluster_indices(const std::vector<Complex>& values, double radius) {
    const std::size_t n = values.size();
    std::vector<std::size_t> parent(n);
    for (std::size_t i = 0; i < n; ++i) {
        parent[i] = i;
    }
    auto find = [&](std::size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(values[i] - values[j]) <= radius) {
                parent[find(i)] = find(j);
            }
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) {
        groups[find(i)].push_back(i);
    }
    std::vector<std::vector<std::size_t>> out;
    for (auto& [root, members] : groups) {
        out.push_back(std::move(members));
    }
    std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.front() < r.front(); });
    return out;
}

double min_pair_angle(const ComplexMatrix& vectors, const std::vector<std::size_t>& members) {
    double best = std::numbers::pi / 2.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            const auto a = static_cast<Eigen::Index>(members[i]);
            const auto b = static_cast<Eigen::Index>(members[j]);
            best = std::min(best, span_angle(vectors.col(a), vectors.col(b)));
        }
    }
    return best;
}

}  // namespace

CoalescenceReport analyse_coalescence(const ScanMatrix& point, double parameter, const ScanOptions& options) {
    const ComplexMatrix& a = point.matrix;
    if (a.rows() != a.cols()) {
        throw DimensionError("coalescence: matrix must be square");
    }
    if (!point.sector.empty() && static_cast<Eigen::Index>(point.sector.size()) != a.rows()) {
        throw DimensionError("coalescence: sector labels do not match the matrix dimension");
    }

    // Group basis indices by sector; an empty labelling is one sector.
    std::map<int, std::vector<Eigen::Index>> blocks;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const int s = point.sector.empty() ? 0 : point.sector[static_cast<std::size_t>(i)];
        if (options.sectors.empty() ||
            std::find(options.sectors.begin(), options.sectors.end(), s) != options.sectors.end()) {
            blocks[s].push_back(i);
        }
    }

    CoalescenceReport report;
    report.parameter = parameter;
    report.min_sector_angle = std::numbers::pi / 2.0;
    for (const auto& [sector, indices] : blocks) {
        const auto n = static_cast<Eigen::Index>(indices.size());
        ComplexMatrix block(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                block(i, j) = a(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(j)]);
            }
        }
        const Spectrum spec = eig(block, true);
        report.eigenvalues.insert(report.eigenvalues.end(), spec.eigenvalues.begin(), spec.eigenvalues.end());

        std::vector<std::size_t> all(spec.size());
        for (std::size_t i = 0; i < all.size(); ++i) {
            all[i] = i;
        }
        report.min_sector_angle = std::min(report.min_sector_angle, min_pair_angle(spec.eigenvectors, all));

        const double radius = options.cluster_eps_rel * spec.matrix_norm;
        for (const auto& members : cluster_indices(spec.eigenvalues, radius)) {
            if (members.size() < 2) {
                continue;
            }
            EigenCluster cluster;
            cluster.sector = sector;
            for (std::size_t m : members) {
                cluster.eigenvalues.push_back(spec.eigenvalues[m]);
            }
            cluster.min_angle = min_pair_angle(spec.eigenvectors, members);
            if (cluster.min_angle < options.angle_eps) {
                report.coalescence = true;
            }
            report.clusters.push_back(std::move(cluster));
        }
    }
    return report;
}

std::vector<CoalescenceReport> coalescence_scan(const ScanBuilder& builder, const std::vector<double>& grid,
                                                const ScanOptions& options) {
    if (grid.empty()) {
        throw ConfigError("coalescence_scan: empty grid");
    }
    if (!std::is_sorted(grid.begin(), grid.end())) {
        throw ConfigError("coalescence_scan: grid must be sorted");
    }
    std::vector<CoalescenceReport> reports(grid.size());
    const std::size_t workers = options.workers == 0 ? default_workers() : options.workers;
    parallel_for(grid.size(), workers, [&](std::size_t i) {
        try {
            reports[i] = analyse_coalescence(builder(grid[i]), grid[i], options);
        } catch (const Error& e) {
            CoalescenceReport failed;
            failed.parameter = grid[i];
            failed.ok = false;
            failed.error = e.what();
            failed.min_sector_angle = std::numeric_limits<double>::quiet_NaN();
            reports[i] = std::move(failed);
        }
    });
    return reports;
}

std::optional<EpEstimate> locate_ep(const std::vector<CoalescenceReport>& reports) {
    std::optional<EpEstimate> best;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        if (!r.ok) {
            continue;
        }
        if (!best || r.min_sector_angle < best->angle) {
            best = EpEstimate{r.parameter, 0.0, i, r.min_sector_angle, r.coalescence};
        }
    }
    if (best) {
        // One grid step, taken from the neighbouring points.
        double step = 0.0;
        if (best->index + 1 < reports.size()) {
            step = reports[best->index + 1].parameter - best->parameter;
        } else if (best->index > 0) {
            step = best->parameter - reports[best->index - 1].parameter;
        }
        best->uncertainty = step;
    }
    return best;
}

std::vector<double> make_grid(double min, double max, double step) {
    if (!(step > 0.0) || !(min < max) || !std::isfinite(min) || !std::isfinite(max)) {
        throw ConfigError("grid: need min < max and step > 0");
    }
    const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t k = 0; k < count; ++k) {
        grid[k] = min + static_cast<double>(k) * step;
    }
    return grid;
}

}  // namespace tep
