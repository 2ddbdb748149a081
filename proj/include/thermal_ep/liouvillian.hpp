// Lindblad generator in superoperator form, the first-moment dynamical matrix
// and the Liouvillian exceptional-point witnesses.

#pragma once

#include "thermal_ep/model.hpp"
#include "thermal_ep/spectral.hpp"

#include <array>
#include <utility>
#include <vector>

namespace tep {

// Column-stacking vectorisation: vec(A rho B) = (B^T kron A) vec(rho).
ComplexVector vec(const ComplexMatrix& rho);
ComplexMatrix unvec(const ComplexVector& v, Eigen::Index dim);

struct Superoperator {
    ComplexMatrix matrix;  // D^2 x D^2, D = d^2
    Eigen::Index hilbert_dim = 0;

    [[nodiscard]] ComplexMatrix apply(const ComplexMatrix& rho) const;
};

// -i[H, rho] + sum_i (C rho C^dag - 1/2 {C^dag C, rho}).
Superoperator build_liouvillian(const SystemParams& params, FockCutoff cutoff);
// -i(H_nH rho - rho H_nH^dag) + sum_i C rho C^dag. Same generator, assembled
// from the non-Hermitian Hamiltonian.
Superoperator build_liouvillian_from_h_nh(const SystemParams& params, FockCutoff cutoff);
// Right-hand side of the master equation evaluated directly on matrices.
ComplexMatrix lindblad_rhs(const ComplexMatrix& h, const std::vector<ComplexMatrix>& collapse,
                           const ComplexMatrix& rho);

struct DynamicalMatrix {
    Eigen::Matrix2cd m;      // [[-i gamma_a, g], [g, -i gamma_b]]
    Eigen::Vector2cd drive;  // [eps, eps]
};

DynamicalMatrix dynamical_matrix(const SystemParams& params);
// (+Omega - i gamma, -Omega - i gamma).
std::pair<Complex, Complex> lambda_pm(const DerivedParams& derived);
// Normalised [+-Omega - i kappa, g].
std::pair<Eigen::Vector2cd, Eigen::Vector2cd> v_pm(const DerivedParams& derived);

struct MomentCheck {
    std::array<Complex, 2> moments;       // <a>, <b>
    std::array<Complex, 2> from_liouvillian;  // tr(a L[rho]), tr(b L[rho])
    std::array<Complex, 2> from_equations;    // -i M v - v0
    double discrepancy = 0.0;             // max |difference|
};

// Throws ConfigError when rho is not a unit-trace positive semidefinite
// matrix of the right size.
MomentCheck moment_rhs_check(const SystemParams& params, FockCutoff cutoff, const ComplexMatrix& rho);
MomentCheck moment_rhs_check(const SystemParams& params, const Superoperator& liouvillian,
                             FockCutoff cutoff, const ComplexMatrix& rho);

struct LiouvillianCheck {
    std::array<Complex, 2> targets{};      // -gamma + i Omega, -gamma - i Omega
    std::array<double, 2> distances{};     // distance to the nearest eigenvalue of L
    double zero_distance = 0.0;            // distance of the nearest eigenvalue to 0
    double tol = 1e-6;
    // Coalescence analysis of the single-excitation coherence block of L.
    CoalescenceReport single_excitation;
    std::size_t spectrum_size = 0;
    bool contains_targets = false;
    bool has_zero = false;
};

// Runs at eps = 0; the drive only adds an affine term to the generator.
// Requires (d^2)^2 <= 4096.
LiouvillianCheck liouvillian_spectrum_check(const SystemParams& params, FockCutoff cutoff, double tol = 1e-6,
                                            const ScanOptions& options = {});

// Block of L on span{vec(|1,0><0,0|), vec(|0,1><0,0|)}; invariant at n_th = 0.
ComplexMatrix single_excitation_block(const Superoperator& liouvillian, FockCutoff cutoff);

}  // namespace tep
