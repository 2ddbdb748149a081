// Truncated two-mode Fock-space operator algebra.
//
// Basis ordering is mode-A-major: |n_a, n_b> has index n_a * d + n_b, so an
// operator X acting on mode A embeds as kron(X, I) and on mode B as kron(I, X).

#pragma once

#include "thermal_ep/types.hpp"

#include <array>

namespace tep {

struct SystemParams;

namespace fock {

// d x d lowering operator, entry (k, k+1) = sqrt(k+1).
ComplexMatrix annihilation(FockCutoff cutoff);
// d x d diagonal number operator.
ComplexMatrix number(FockCutoff cutoff);

ComplexMatrix dagger(const ComplexMatrix& op);
ComplexMatrix kron(const ComplexMatrix& lhs, const ComplexMatrix& rhs);
ComplexMatrix commutator(const ComplexMatrix& lhs, const ComplexMatrix& rhs);

// Lift a single-mode d x d operator to the two-mode space.
ComplexMatrix embed(const ComplexMatrix& op, Mode mode, FockCutoff cutoff);

// Two-mode ladder operators a and b.
ComplexMatrix mode_a(FockCutoff cutoff);
ComplexMatrix mode_b(FockCutoff cutoff);

// Diagonal 0/1 projector onto states with both occupations <= d-2. The ladder
// algebra is exact on this subspace; truncation only breaks it at level d-1.
ComplexMatrix interior_projector(FockCutoff cutoff);
// P X P with P the interior projector.
ComplexMatrix restrict_interior(const ComplexMatrix& op, FockCutoff cutoff);

// Total excitation number n_a + n_b of each basis index.
std::vector<int> excitation_sectors(FockCutoff cutoff);

// Two-mode basis vector |n_a, n_b>.
ComplexVector basis_state(int n_a, int n_b, FockCutoff cutoff);

struct DisplacedOps {
    ComplexMatrix c;
    ComplexMatrix c_plus;
    ComplexMatrix d;
    ComplexMatrix d_plus;
};

// Displacement constants of c = a + eps*alpha, c+ = a^dag + eps*beta,
// d = b + eps*delta, d+ = b^dag + eps*theta.
struct DisplacementConstants {
    Complex alpha;
    Complex beta;
    Complex delta;
    Complex theta;
    double xi;
};

// Throws SingularTransformError when xi = g^2 + gamma_a gamma_b is zero.
DisplacementConstants displacement_constants(const SystemParams& params);
DisplacedOps displaced_ops(const SystemParams& params, FockCutoff cutoff);

// 2x2 rotation R = [[cos, sin], [-sin, cos]] taking (c, d) to the supermodes
// (e, f). Throws EpSingularityError at Omega = 0.
Eigen::Matrix2cd supermode_rotation(const SystemParams& params);

struct SupermodeOps {
    ComplexMatrix e;
    ComplexMatrix f;
    ComplexMatrix e_plus;
    ComplexMatrix f_plus;
};

// e, f from R (c, d); e+, f+ from R (c+, d+). At eps = 0 the "+" pair is the
// conjugate transpose of (c, d).
SupermodeOps supermode_ops(const SystemParams& params, FockCutoff cutoff);

// Perfect shuffle: |n_a, n_b> -> |n_b, n_a>.
ComplexMatrix shuffle(FockCutoff cutoff);
// P = shuffle * exp(i pi (n_a + n_b)); a real involution.
ComplexMatrix parity_pt_operator(FockCutoff cutoff);

}  // namespace fock
}  // namespace tep
