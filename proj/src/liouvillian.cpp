#include "thermal_ep/liouvillian.hpp"

#include "thermal_ep/fockspace.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tep {

ComplexVector vec(const ComplexMatrix& rho) {
    return Eigen::Map<const ComplexVector>(rho.data(), rho.size());
}

ComplexMatrix unvec(const ComplexVector& v, Eigen::Index dim) {
    if (v.size() != dim * dim) {
        throw DimensionError("unvec: vector length is not dim^2");
    }
    return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
}

ComplexMatrix Superoperator::apply(const ComplexMatrix& rho) const {
    if (rho.rows() != hilbert_dim || rho.cols() != hilbert_dim) {
        throw DimensionError("Superoperator::apply: density matrix has the wrong dimension");
    }
    return unvec(matrix * vec(rho), hilbert_dim);
}

Superoperator build_liouvillian(const SystemParams& params, FockCutoff cutoff) {
    const Eigen::Index dim = cutoff.dim();
    const ComplexMatrix id = ComplexMatrix::Identity(dim, dim);
    const ComplexMatrix h = build_hamiltonian(params, cutoff);
    ComplexMatrix l = -kI * (fock::kron(id, h) - fock::kron(h.transpose(), id));
    for (const ComplexMatrix& c : build_collapse_ops(params, cutoff)) {
        const ComplexMatrix cdc = c.adjoint() * c;
        l += fock::kron(c.conjugate(), c) - 0.5 * fock::kron(id, cdc) - 0.5 * fock::kron(cdc.transpose(), id);
    }
    return Superoperator{std::move(l), dim};
}

Superoperator build_liouvillian_from_h_nh(const SystemParams& params, FockCutoff cutoff) {
    const Eigen::Index dim = cutoff.dim();
    const ComplexMatrix id = ComplexMatrix::Identity(dim, dim);
    const ComplexMatrix h_nh = build_h_nh(params, cutoff);
    // rho H_nH^dag -> ((H_nH^dag)^T kron I) vec(rho) = (conj(H_nH) kron I) vec(rho)
    ComplexMatrix l = -kI * (fock::kron(id, h_nh) - fock::kron(h_nh.conjugate(), id));
    for (const ComplexMatrix& c : build_collapse_ops(params, cutoff)) {
        l += fock::kron(c.conjugate(), c);
    }
    return Superoperator{std::move(l), dim};
}

ComplexMatrix lindblad_rhs(const ComplexMatrix& h, const std::vector<ComplexMatrix>& collapse,
                           const ComplexMatrix& rho) {
    ComplexMatrix out = -kI * (h * rho - rho * h);
    for (const ComplexMatrix& c : collapse) {
        const ComplexMatrix cdc = c.adjoint() * c;
        out += c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
    }
    return out;
}

DynamicalMatrix dynamical_matrix(const SystemParams& params) {
    params.validate();
    DynamicalMatrix out;
    out.m << -kI * params.gamma_a, params.g, params.g, -kI * params.gamma_b;
    out.drive << params.eps, params.eps;
    return out;
}

std::pair<Complex, Complex> lambda_pm(const DerivedParams& derived) {
    const Complex shift = -kI * derived.gamma;
    return {derived.omega + shift, -derived.omega + shift};
}

std::pair<Eigen::Vector2cd, Eigen::Vector2cd> v_pm(const DerivedParams& derived) {
    Eigen::Vector2cd plus(derived.omega - kI * derived.kappa, derived.g);
    Eigen::Vector2cd minus(-derived.omega - kI * derived.kappa, derived.g);
    return {plus.normalized(), minus.normalized()};
}

namespace {

void validate_density_matrix(const ComplexMatrix& rho, Eigen::Index dim) {
    constexpr double tol = 1e-9;
    if (rho.rows() != dim || rho.cols() != dim) {
        throw ConfigError("density matrix: expected " + std::to_string(dim) + "x" + std::to_string(dim));
    }
    if ((rho - rho.adjoint()).norm() > tol * std::max(1.0, rho.norm())) {
        throw ConfigError("density matrix: not Hermitian");
    }
    const Complex trace = rho.trace();
    if (std::abs(trace - 1.0) > tol) {
        std::ostringstream msg;
        msg << "density matrix: trace " << trace << " != 1";
        throw ConfigError(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -tol) {
        throw ConfigError("density matrix: not positive semidefinite");
    }
}

}  // namespace

MomentCheck moment_rhs_check(const SystemParams& params, FockCutoff cutoff, const ComplexMatrix& rho) {
    return moment_rhs_check(params, build_liouvillian(params, cutoff), cutoff, rho);
}

MomentCheck moment_rhs_check(const SystemParams& params, const Superoperator& liouvillian, FockCutoff cutoff,
                             const ComplexMatrix& rho) {
    validate_density_matrix(rho, cutoff.dim());
    const ComplexMatrix a = fock::mode_a(cutoff);
    const ComplexMatrix b = fock::mode_b(cutoff);
    const ComplexMatrix drho = liouvillian.apply(rho);

    MomentCheck out;
    out.moments = {(a * rho).trace(), (b * rho).trace()};
    out.from_liouvillian = {(a * drho).trace(), (b * drho).trace()};

    const DynamicalMatrix dm = dynamical_matrix(params);
    const Eigen::Vector2cd v(out.moments[0], out.moments[1]);
    const Eigen::Vector2cd rhs = -kI * (dm.m * v) - dm.drive;
    out.from_equations = {rhs(0), rhs(1)};
    out.discrepancy = std::max(std::abs(out.from_liouvillian[0] - rhs(0)), std::abs(out.from_liouvillian[1] - rhs(1)));
    return out;
}

ComplexMatrix single_excitation_block(const Superoperator& liouvillian, FockCutoff cutoff) {
    const Eigen::Index dim = cutoff.dim();
    // vec(|i><0,0|) sits at index i + 0 * dim.
    const std::array<Eigen::Index, 2> idx{cutoff.index(1, 0), cutoff.index(0, 1)};
    if (liouvillian.matrix.rows() != dim * dim) {
        throw DimensionError("single_excitation_block: Liouvillian does not match the cutoff");
    }
    ComplexMatrix block(2, 2);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            block(i, j) = liouvillian.matrix(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
    }
    return block;
}

LiouvillianCheck liouvillian_spectrum_check(const SystemParams& params, FockCutoff cutoff, double tol,
                                            const ScanOptions& options) {
    const Eigen::Index super_dim = static_cast<Eigen::Index>(cutoff.dim()) * cutoff.dim();
    if (super_dim > 4096) {
        throw ConfigError("liouvillian check: (d^2)^2 = " + std::to_string(super_dim) + " exceeds 4096; use d <= 8");
    }
    SystemParams undriven = params;
    undriven.eps = 0.0;
    const DerivedParams derived = derive(undriven);
    const Superoperator l = build_liouvillian(undriven, cutoff);
    const Spectrum spectrum = eig(l.matrix, false);

    LiouvillianCheck out;
    out.tol = tol;
    out.spectrum_size = spectrum.size();
    out.targets = {-derived.gamma + kI * derived.omega, -derived.gamma - kI * derived.omega};
    out.distances = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    out.zero_distance = std::numeric_limits<double>::infinity();
    for (const Complex& value : spectrum.eigenvalues) {
        for (std::size_t k = 0; k < 2; ++k) {
            out.distances[k] = std::min(out.distances[k], std::abs(value - out.targets[k]));
        }
        out.zero_distance = std::min(out.zero_distance, std::abs(value));
    }
    out.contains_targets = out.distances[0] <= tol && out.distances[1] <= tol;
    out.has_zero = out.zero_distance <= tol;

    ScanOptions block_options = options;
    block_options.sectors.clear();
    out.single_excitation =
        analyse_coalescence(ScanMatrix{single_excitation_block(l, cutoff), {}}, params.g, block_options);
    return out;
}

}  // namespace tep
