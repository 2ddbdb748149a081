#include "thermal_ep/fockspace.hpp"

#include "thermal_ep/model.hpp"

#include <cmath>
#include <numbers>

namespace tep::fock {

ComplexMatrix annihilation(FockCutoff cutoff) {
    const int d = cutoff.levels();
    ComplexMatrix a = ComplexMatrix::Zero(d, d);
    for (int k = 0; k + 1 < d; ++k) {
        a(k, k + 1) = std::sqrt(static_cast<double>(k + 1));
    }
    return a;
}

ComplexMatrix number(FockCutoff cutoff) {
    const int d = cutoff.levels();
    ComplexMatrix n = ComplexMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        n(k, k) = static_cast<double>(k);
    }
    return n;
}

ComplexMatrix dagger(const ComplexMatrix& op) { return op.adjoint(); }

ComplexMatrix kron(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
    const Eigen::Index r = rhs.rows();
    const Eigen::Index c = rhs.cols();
    ComplexMatrix out(lhs.rows() * r, lhs.cols() * c);
    for (Eigen::Index i = 0; i < lhs.rows(); ++i) {
        for (Eigen::Index j = 0; j < lhs.cols(); ++j) {
            out.block(i * r, j * c, r, c) = lhs(i, j) * rhs;
        }
    }
    return out;
}

ComplexMatrix commutator(const ComplexMatrix& lhs, const ComplexMatrix& rhs) { return lhs * rhs - rhs * lhs; }

ComplexMatrix embed(const ComplexMatrix& op, Mode mode, FockCutoff cutoff) {
    const int d = cutoff.levels();
    if (op.rows() != d || op.cols() != d) {
        throw DimensionError("embed: expected a " + std::to_string(d) + "x" + std::to_string(d) +
                             " operator, got " + std::to_string(op.rows()) + "x" + std::to_string(op.cols()));
    }
    const ComplexMatrix id = ComplexMatrix::Identity(d, d);
    return mode == Mode::A ? kron(op, id) : kron(id, op);
}

ComplexMatrix mode_a(FockCutoff cutoff) { return embed(annihilation(cutoff), Mode::A, cutoff); }
ComplexMatrix mode_b(FockCutoff cutoff) { return embed(annihilation(cutoff), Mode::B, cutoff); }

ComplexMatrix interior_projector(FockCutoff cutoff) {
    const int dim = cutoff.dim();
    const int top = cutoff.levels() - 1;
    ComplexMatrix p = ComplexMatrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        if (cutoff.occupation_a(i) < top && cutoff.occupation_b(i) < top) {
            p(i, i) = 1.0;
        }
    }
    return p;
}

ComplexMatrix restrict_interior(const ComplexMatrix& op, FockCutoff cutoff) {
    const ComplexMatrix p = interior_projector(cutoff);
    return p * op * p;
}

std::vector<int> excitation_sectors(FockCutoff cutoff) {
    std::vector<int> sectors(static_cast<std::size_t>(cutoff.dim()));
    for (int i = 0; i < cutoff.dim(); ++i) {
        sectors[static_cast<std::size_t>(i)] = cutoff.occupation_a(i) + cutoff.occupation_b(i);
    }
    return sectors;
}

ComplexVector basis_state(int n_a, int n_b, FockCutoff cutoff) {
    if (n_a < 0 || n_b < 0 || n_a >= cutoff.levels() || n_b >= cutoff.levels()) {
        throw DimensionError("basis_state: occupation outside the truncated space");
    }
    ComplexVector v = ComplexVector::Zero(cutoff.dim());
    v(cutoff.index(n_a, n_b)) = 1.0;
    return v;
}

DisplacementConstants displacement_constants(const SystemParams& params) {
    const double xi = params.g * params.g + params.gamma_a * params.gamma_b;
    if (xi == 0.0) {
        throw SingularTransformError("displaced operators: xi = g^2 + gamma_a*gamma_b vanishes");
    }
    const Complex alpha = Complex(params.gamma_b, -params.g) / xi;
    const Complex delta = Complex(params.gamma_a, -params.g) / xi;
    return {alpha, -alpha, delta, -delta, xi};
}

DisplacedOps displaced_ops(const SystemParams& params, FockCutoff cutoff) {
    const DisplacementConstants k = displacement_constants(params);
    const ComplexMatrix a = mode_a(cutoff);
    const ComplexMatrix b = mode_b(cutoff);
    const ComplexMatrix id = ComplexMatrix::Identity(cutoff.dim(), cutoff.dim());
    const double eps = params.eps;
    return {
        a + eps * k.alpha * id,
        a.adjoint() + eps * k.beta * id,
        b + eps * k.delta * id,
        b.adjoint() + eps * k.theta * id,
    };
}

Eigen::Matrix2cd supermode_rotation(const SystemParams& params) {
    const double kappa = params.kappa();
    const Complex omega = omega_of(params.g, kappa);
    if (omega == Complex(0.0)) {
        throw EpSingularityError("supermode rotation: Omega = 0 (kappa = g), the supermodes coalesce");
    }
    const Complex sin_half = std::sqrt((omega + kI * kappa) / (2.0 * omega));
    // cos = sqrt((Omega - i kappa) / (2 Omega)) up to the branch; fixing
    // sin * cos = g / (2 Omega) keeps R^T diag(Omega, -Omega) R equal to the
    // coupling matrix on both sides of the EP.
    const Complex cos_half = params.g / (2.0 * omega * sin_half);
    Eigen::Matrix2cd r;
    r << cos_half, sin_half, -sin_half, cos_half;
    return r;
}

SupermodeOps supermode_ops(const SystemParams& params, FockCutoff cutoff) {
    const Eigen::Matrix2cd r = supermode_rotation(params);
    const DisplacedOps ops = displaced_ops(params, cutoff);
    return {
        r(0, 0) * ops.c + r(0, 1) * ops.d,
        r(1, 0) * ops.c + r(1, 1) * ops.d,
        r(0, 0) * ops.c_plus + r(0, 1) * ops.d_plus,
        r(1, 0) * ops.c_plus + r(1, 1) * ops.d_plus,
    };
}

ComplexMatrix shuffle(FockCutoff cutoff) {
    const int dim = cutoff.dim();
    ComplexMatrix s = ComplexMatrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        s(cutoff.index(cutoff.occupation_b(i), cutoff.occupation_a(i)), i) = 1.0;
    }
    return s;
}

ComplexMatrix parity_pt_operator(FockCutoff cutoff) {
    const int dim = cutoff.dim();
    ComplexMatrix phase = ComplexMatrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const int n = cutoff.occupation_a(i) + cutoff.occupation_b(i);
        phase(i, i) = (n % 2 == 0) ? 1.0 : -1.0;
    }
    return shuffle(cutoff) * phase;
}

}  // namespace tep::fock
