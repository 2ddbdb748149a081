// Matrix exponential by scaling and squaring with diagonal Pade approximants
// (Higham 2005 degree selection).

#include "thermal_ep/spectral.hpp"

#include <Eigen/LU>

#include <array>
#include <cmath>
#include <sstream>

namespace tep {

namespace {

constexpr std::array<double, 14> kPade13{64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                         1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                         670442572800.0,      33522128640.0,       1323241920.0,
                                         40840800.0,          960960.0,            16380.0,
                                         182.0,               1.0};
constexpr std::array<double, 10> kPade9{17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                                        2162160.0,     110880.0,     3960.0,       90.0,        1.0};
constexpr std::array<double, 8> kPade7{17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
constexpr std::array<double, 6> kPade5{30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 4> kPade3{120.0, 60.0, 12.0, 1.0};

// Largest 1-norm for which each degree meets unit roundoff.
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

// Squarings beyond this mean ||A||_1 > theta13 * 2^1000; reject.
constexpr int kMaxSquarings = 1000;

double norm1(const ComplexMatrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

// U (odd part) and V (even part) of the low-degree approximants.
template <std::size_t N>
ComplexMatrix pade_low(const ComplexMatrix& a, const std::array<double, N>& b) {
    const Eigen::Index n = a.rows();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    const ComplexMatrix a2 = a * a;
    ComplexMatrix power = id;
    ComplexMatrix u_inner = ComplexMatrix::Zero(n, n);
    ComplexMatrix v = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; k < N; k += 2) {
        v += b[k] * power;
        u_inner += b[k + 1] * power;
        power = power * a2;
    }
    const ComplexMatrix u = a * u_inner;
    return (v - u).partialPivLu().solve(v + u);
}

ComplexMatrix pade13(const ComplexMatrix& a) {
    const Eigen::Index n = a.rows();
    const auto& b = kPade13;
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    const ComplexMatrix a2 = a * a;
    const ComplexMatrix a4 = a2 * a2;
    const ComplexMatrix a6 = a4 * a2;
    const ComplexMatrix u_high = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
    const ComplexMatrix u = a * (u_high + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    const ComplexMatrix v_high = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
    const ComplexMatrix v = v_high + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

ComplexMatrix mat_exp(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) {
        throw DimensionError("mat_exp: matrix must be square");
    }
    const Eigen::Index n = a.rows();
    if (n == 0) {
        return a;
    }
    if (!a.allFinite()) {
        throw NumericalError("mat_exp: matrix has non-finite entries");
    }
    if (a.isDiagonal(0.0)) {
        ComplexMatrix out = ComplexMatrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            out(i, i) = std::exp(a(i, i));
        }
        if (!out.allFinite()) {
            std::ostringstream msg;
            msg << "mat_exp: overflow, max |diag| = " << a.diagonal().cwiseAbs().maxCoeff();
            throw NumericalError(msg.str());
        }
        return out;
    }

    const double norm = norm1(a);
    ComplexMatrix out;
    if (norm <= kTheta3) {
        out = pade_low(a, kPade3);
    } else if (norm <= kTheta5) {
        out = pade_low(a, kPade5);
    } else if (norm <= kTheta7) {
        out = pade_low(a, kPade7);
    } else if (norm <= kTheta9) {
        out = pade_low(a, kPade9);
    } else {
        int squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
        if (squarings > kMaxSquarings) {
            std::ostringstream msg;
            msg << "mat_exp: ||A||_1 = " << norm << " is too large to scale";
            throw NumericalError(msg.str());
        }
        out = pade13(a / std::ldexp(1.0, squarings));
        for (int s = 0; s < squarings; ++s) {
            out = out * out;
        }
    }
    if (!out.allFinite()) {
        std::ostringstream msg;
        msg << "mat_exp: result overflowed (||A||_1 = " << norm << ")";
        throw NumericalError(msg.str());
    }
    return out;
}

}  // namespace tep
