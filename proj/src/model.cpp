#include "thermal_ep/model.hpp"

#include "thermal_ep/fockspace.hpp"

#include <cmath>
#include <string>

namespace tep {

namespace {

void require_rate(double value, const char* name) {
    if (!std::isfinite(value) || value < 0.0) {
        throw ConfigError(std::string("SystemParams: ") + name + " must be finite and >= 0, got " +
                          std::to_string(value));
    }
}

// i * 2 eps^2 gamma / denom with the pole guard shared by chi and chi'.
Complex imaginary_drive_term(double eps, double numerator_gamma, double denom, const char* what) {
    if (eps == 0.0) {
        return {0.0, 0.0};
    }
    if (denom == 0.0) {
        throw PoleError(std::string(what) + ": pole of the drive constant (vanishing denominator)");
    }
    return kI * (2.0 * eps * eps * numerator_gamma / denom);
}

ComplexVector coherent_state(Complex amplitude, FockCutoff cutoff) {
    const int d = cutoff.levels();
    ComplexVector v(d);
    Complex term = 1.0;
    for (int k = 0; k < d; ++k) {
        if (k > 0) {
            term *= amplitude / std::sqrt(static_cast<double>(k));
        }
        v(k) = term;
    }
    return v.normalized();
}

}  // namespace

void SystemParams::validate() const {
    require_rate(g, "g");
    require_rate(gamma_a, "gamma_a");
    require_rate(gamma_b, "gamma_b");
    require_rate(eps, "eps");
    require_rate(n_th, "n_th");
}

SystemParams SystemParams::from_gamma_kappa(double g, double gamma, double kappa, double eps, double n_th) {
    return SystemParams{g, gamma + kappa, gamma - kappa, eps, n_th};
}

Complex omega_of(double g, double kappa) {
    const double diff = g * g - kappa * kappa;
    if (diff >= 0.0) {
        return {std::sqrt(diff), 0.0};
    }
    return {0.0, std::sqrt(-diff)};
}

Complex drive_constant(double g, double gamma_a, double gamma_b, double eps) {
    if (eps == 0.0) {
        return {0.0, 0.0};
    }
    const double xi = g * g + gamma_a * gamma_b;
    if (xi == 0.0) {
        throw PoleError("drive constant: g^2 + gamma_a*gamma_b vanishes");
    }
    const Complex alpha = Complex(gamma_b, -g) / xi;
    const Complex beta = -alpha;
    const Complex delta = Complex(gamma_a, -g) / xi;
    const Complex theta = -delta;
    const Complex constant = g * (beta * delta + theta * alpha) + kI * (beta - alpha) + kI * (theta - delta) -
                             kI * gamma_a * alpha * beta - kI * gamma_b * delta * theta;
    return -eps * eps * constant;
}

SystemParams effective_params(const SystemParams& params) {
    const double scale = 2.0 * params.n_th + 1.0;
    return SystemParams{params.g, params.gamma_a * scale, params.gamma_b * scale, params.eps, 0.0};
}

DerivedParams derive(const SystemParams& params) {
    params.validate();
    DerivedParams out;
    out.g = params.g;
    out.gamma = params.gamma();
    out.kappa = params.kappa();
    out.xi = params.g * params.g + params.gamma_a * params.gamma_b;
    out.omega = omega_of(params.g, out.kappa);

    const double g2 = params.g * params.g;
    out.chi = imaginary_drive_term(params.eps, out.gamma, g2 + out.gamma * out.gamma - out.kappa * out.kappa, "chi");
    out.chi_full = drive_constant(params.g, params.gamma_a, params.gamma_b, params.eps);

    const double scale = 2.0 * params.n_th + 1.0;
    out.gamma_p = scale * out.gamma;
    out.kappa_p = scale * out.kappa;
    out.omega_p = omega_of(params.g, out.kappa_p);
    out.chi_t = kI * (params.n_th * (params.gamma_a + params.gamma_b));
    const double thermal_denom = g2 + (out.gamma * out.gamma - out.kappa * out.kappa) * scale * scale;
    out.chi_p = kI * (2.0 * out.gamma * params.n_th) +
                imaginary_drive_term(params.eps, out.gamma * scale, thermal_denom, "chi'");
    out.chi_p_full =
        out.chi_t + drive_constant(params.g, params.gamma_a * scale, params.gamma_b * scale, params.eps);
    return out;
}

ComplexMatrix build_hamiltonian(const SystemParams& params, FockCutoff cutoff) {
    const ComplexMatrix a = fock::mode_a(cutoff);
    const ComplexMatrix b = fock::mode_b(cutoff);
    const ComplexMatrix ad = a.adjoint();
    const ComplexMatrix bd = b.adjoint();
    return params.g * (ad * b + bd * a) + kI * params.eps * (a - ad) + kI * params.eps * (b - bd);
}

std::vector<ComplexMatrix> build_collapse_ops(const SystemParams& params, FockCutoff cutoff) {
    params.validate();
    const ComplexMatrix a = fock::mode_a(cutoff);
    const ComplexMatrix b = fock::mode_b(cutoff);
    const double n = params.n_th;
    if (n == 0.0) {
        return {std::sqrt(2.0 * params.gamma_a) * a, std::sqrt(2.0 * params.gamma_b) * b};
    }
    return {
        std::sqrt(2.0 * params.gamma_a * (n + 1.0)) * a,
        std::sqrt(2.0 * params.gamma_a * n) * a.adjoint(),
        std::sqrt(2.0 * params.gamma_b * (n + 1.0)) * b,
        std::sqrt(2.0 * params.gamma_b * n) * b.adjoint(),
    };
}

ComplexMatrix build_h_nh(const SystemParams& params, FockCutoff cutoff) {
    ComplexMatrix h = build_hamiltonian(params, cutoff);
    for (const ComplexMatrix& c : build_collapse_ops(params, cutoff)) {
        h -= 0.5 * kI * (c.adjoint() * c);
    }
    return h;
}

ComplexMatrix build_drift_h(const SystemParams& params, FockCutoff cutoff) {
    // the optical H_nH: thermal channels only add noise to the drift
    SystemParams optical = params;
    optical.n_th = 0.0;
    return build_h_nh(optical, cutoff);
}

PtSplit build_h_pt_split(const SystemParams& params, FockCutoff cutoff) {
    params.validate();
    const SystemParams eff = effective_params(params);
    const fock::DisplacedOps ops = fock::displaced_ops(eff, cutoff);
    const double gamma = eff.gamma();
    const double kappa = eff.kappa();
    const Complex chi = drive_constant(eff.g, eff.gamma_a, eff.gamma_b, eff.eps) +
                        kI * (params.n_th * (params.gamma_a + params.gamma_b));
    const ComplexMatrix cc = ops.c_plus * ops.c;
    const ComplexMatrix dd = ops.d_plus * ops.d;
    PtSplit split;
    split.h_pt = eff.g * (ops.c_plus * ops.d + ops.d_plus * ops.c) - kI * kappa * cc + kI * kappa * dd;
    split.h_0 = -kI * gamma * (cc + dd);
    split.h_0.diagonal().array() -= chi;
    return split;
}

PtTableau pt_tableau(const SystemParams& params) {
    const SystemParams eff = effective_params(params);
    const double kappa = eff.kappa();
    return PtTableau{{Complex(eff.g), Complex(eff.g), -kI * kappa, kI * kappa}};
}

PtTableau apply_pt_map(const PtTableau& tableau) {
    // c+ d -> (-d+)(-c) = d+ c and c+ c -> d+ d, each coefficient conjugated.
    const auto& k = tableau.coeff;
    return PtTableau{{std::conj(k[1]), std::conj(k[0]), std::conj(k[3]), std::conj(k[2])}};
}

Complex analytic_lambda_pt(int n_e, int n_f, const DerivedParams& derived) {
    return derived.omega * static_cast<double>(n_e - n_f);
}

Complex analytic_lambda_nh(int n_e, int n_f, const DerivedParams& derived, bool thermal, bool full_chi) {
    const double diff = n_e - n_f;
    const double total = n_e + n_f;
    if (thermal) {
        const Complex chi = full_chi ? derived.chi_p_full : derived.chi_p;
        return derived.omega_p * diff - kI * derived.gamma_p * total - chi;
    }
    const Complex chi = full_chi ? derived.chi_full : derived.chi;
    return derived.omega * diff - kI * derived.gamma * total - chi;
}

double hep_coupling(double kappa, double n_th) { return (2.0 * n_th + 1.0) * kappa; }

double lep_coupling(double kappa) { return kappa; }

ComplexVector supermode_state(int n_e, int n_f, const SystemParams& params, FockCutoff cutoff) {
    if (n_e < 0 || n_f < 0) {
        throw ConfigError("supermode_state: negative excitation number");
    }
    const SystemParams eff = effective_params(params);
    const fock::DisplacementConstants k = fock::displacement_constants(eff);
    // c |vac> = 0 requires a |vac> = -eps alpha |vac>.
    ComplexVector state = fock::kron(coherent_state(-eff.eps * k.alpha, cutoff),
                                     coherent_state(-eff.eps * k.delta, cutoff));
    const fock::SupermodeOps ops = fock::supermode_ops(eff, cutoff);
    for (int i = 0; i < n_e; ++i) {
        state = ops.e_plus * state;
    }
    for (int i = 0; i < n_f; ++i) {
        state = ops.f_plus * state;
    }
    return state.normalized();
}

}  // namespace tep
