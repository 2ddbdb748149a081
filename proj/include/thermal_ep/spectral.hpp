// Dense non-Hermitian eigenproblems, the matrix exponential, and
// exceptional-point diagnostics based on eigenvector coalescence.

#pragma once

#include "thermal_ep/types.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tep {

struct Spectrum {
    std::vector<Complex> eigenvalues;
    // Unit-norm right eigenvectors as columns, aligned with eigenvalues.
    // Empty when vectors were not requested.
    ComplexMatrix eigenvectors;
    // ||A v - lambda v|| per pair; empty when vectors were not requested.
    std::vector<double> residuals;
    double matrix_norm = 0.0;  // Frobenius norm of the input

    [[nodiscard]] bool has_vectors() const noexcept { return eigenvectors.size() > 0; }
    [[nodiscard]] std::size_t size() const noexcept { return eigenvalues.size(); }
    [[nodiscard]] ComplexVector vector(std::size_t i) const { return eigenvectors.col(static_cast<Eigen::Index>(i)); }
};

inline constexpr double kDefaultResidualTol = 1e-9;

// Hessenberg reduction, shifted QR to complex Schur form, eigenvectors by
// back-substitution on the triangular factor. Eigenvalues are returned in
// Schur order. Throws NumericalError if QR does not converge or a residual
// exceeds tol * ||A||.
Spectrum eig(const ComplexMatrix& a, bool want_vectors = true, double tol = kDefaultResidualTol);

// Scaling-and-squaring with a diagonal Pade approximant of degree 3..13.
// Throws NumericalError when the norm is too large to scale safely or the
// result is not finite.
ComplexMatrix mat_exp(const ComplexMatrix& a);

// Principal angle between the spans of two non-zero vectors, in [0, pi/2].
double span_angle(const ComplexVector& u, const ComplexVector& v);

// -------------------------------------------------------- coalescence scans

// Matrix produced by a scan builder. When sector is non-empty it labels each
// basis index with a conserved quantum number (e.g. total excitation number);
// the matrix must be block diagonal with respect to it.
struct ScanMatrix {
    ComplexMatrix matrix;
    std::vector<int> sector;
};

using ScanBuilder = std::function<ScanMatrix(double)>;

struct ScanOptions {
    double cluster_eps_rel = 1e-6;  // cluster radius relative to ||block||_F
    double angle_eps = 1e-3;        // radians
    // Sectors to analyse; empty means every sector present.
    std::vector<int> sectors;
    std::size_t workers = 0;  // 0: default_workers()
};

struct EigenCluster {
    int sector = 0;
    std::vector<Complex> eigenvalues;
    double min_angle = 0.0;  // minimum pairwise eigenvector angle
};

struct CoalescenceReport {
    double parameter = 0.0;
    bool ok = true;
    std::string error;  // set when the point failed; other fields are empty
    std::vector<EigenCluster> clusters;  // groups of size >= 2 only
    // Minimum pairwise eigenvector angle within any analysed sector, with or
    // without eigenvalue clustering. This is what the EP locator minimises.
    double min_sector_angle = 0.0;
    std::vector<Complex> eigenvalues;  // all analysed eigenvalues, sector order
    bool coalescence = false;
};

struct EpEstimate {
    double parameter = 0.0;
    double uncertainty = 0.0;  // one grid step
    std::size_t index = 0;
    double angle = 0.0;
    bool flagged = false;
};

// Single-point analysis used by coalescence_scan.
CoalescenceReport analyse_coalescence(const ScanMatrix& point, double parameter, const ScanOptions& options);

// One report per grid point in grid order. Per-point failures are recorded in
// the report rather than aborting the scan.
std::vector<CoalescenceReport> coalescence_scan(const ScanBuilder& builder, const std::vector<double>& grid,
                                                const ScanOptions& options = {});

// Grid point minimising min_sector_angle over successful reports.
std::optional<EpEstimate> locate_ep(const std::vector<CoalescenceReport>& reports);

// min, min+step, ..., up to max inclusive (tolerant of rounding).
std::vector<double> make_grid(double min, double max, double step);

}  // namespace tep
