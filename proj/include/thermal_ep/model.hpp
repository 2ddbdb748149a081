// Physical model of two coupled, coherently driven, lossy resonators: parameter
// bookkeeping, Hamiltonian and collapse-operator builders, closed-form
// eigenvalues and exceptional-point conditions.

#pragma once

#include "thermal_ep/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace tep {

struct SystemParams {
    double g = 1.0;        // inter-mode coupling
    double gamma_a = 2.5;  // field damping rate of mode A
    double gamma_b = 1.5;  // field damping rate of mode B
    double eps = 0.0;      // coherent drive amplitude
    double n_th = 0.0;     // mean thermal photon number of both baths

    // Throws ConfigError when a rate is negative or non-finite.
    void validate() const;

    // Construct from the balanced parametrisation gamma_a = gamma + kappa,
    // gamma_b = gamma - kappa.
    static SystemParams from_gamma_kappa(double g, double gamma, double kappa, double eps = 0.0,
                                         double n_th = 0.0);
    [[nodiscard]] double gamma() const noexcept { return 0.5 * (gamma_a + gamma_b); }
    [[nodiscard]] double kappa() const noexcept { return 0.5 * (gamma_a - gamma_b); }

    friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

struct DerivedParams {
    double g = 0.0;
    double gamma = 0.0;
    double kappa = 0.0;
    double xi = 0.0;
    Complex omega;       // sqrt(g^2 - kappa^2), i sqrt(kappa^2 - g^2) past the EP
    Complex chi;         // drive constant with its real part dropped
    Complex chi_full;    // complete constant from completing the square
    double gamma_p = 0.0;  // (2n+1) gamma
    double kappa_p = 0.0;  // (2n+1) kappa
    Complex omega_p;
    Complex chi_t;       // i n (gamma_a + gamma_b)
    Complex chi_p;       // thermal drive constant, real part dropped
    Complex chi_p_full;
};

// Throws PoleError when the drive constant is singular (g^2 + gamma_a gamma_b
// = 0 with a non-zero drive).
DerivedParams derive(const SystemParams& params);

// sqrt(g^2 - k^2) on the branch with non-negative imaginary part.
Complex omega_of(double g, double kappa);

// Constant left over after shifting a -> c, b -> d in the driven Hamiltonian
// with damping rates (gamma_a, gamma_b); H_nH = ... - chi_full * I.
Complex drive_constant(double g, double gamma_a, double gamma_b, double eps);

// Optical system with the thermal damping rates (2n+1) gamma_a,b. The thermal
// H_nH is this system's H_nH shifted by -chi_t.
SystemParams effective_params(const SystemParams& params);

ComplexMatrix build_hamiltonian(const SystemParams& params, FockCutoff cutoff);
// Two operators for n_th = 0, four (loss and gain per mode) otherwise.
std::vector<ComplexMatrix> build_collapse_ops(const SystemParams& params, FockCutoff cutoff);
// H - (i/2) sum C^dag C.
ComplexMatrix build_h_nh(const SystemParams& params, FockCutoff cutoff);
// H - i gamma_a a^dag a - i gamma_b b^dag b, independent of n_th.
ComplexMatrix build_drift_h(const SystemParams& params, FockCutoff cutoff);

struct PtSplit {
    ComplexMatrix h_pt;
    ComplexMatrix h_0;
};

// H_PT = g(c+ d + d+ c) - i kappa c+ c + i kappa d+ d,
// H_0 = -i gamma (c+ c + d+ d) - chi_full I. The sum reproduces build_h_nh
// for the optical collapse set.
PtSplit build_h_pt_split(const SystemParams& params, FockCutoff cutoff);

// Coefficients of H_PT over the monomials (c+ d, d+ c, c+ c, d+ d).
struct PtTableau {
    std::array<Complex, 4> coeff;
};
PtTableau pt_tableau(const SystemParams& params);
// Image of the tableau under c -> -d, c+ -> -d+, d -> -c, d+ -> -c+, i -> -i.
PtTableau apply_pt_map(const PtTableau& tableau);

// Omega (N_e - N_f).
Complex analytic_lambda_pt(int n_e, int n_f, const DerivedParams& derived);
// Omega (N_e - N_f) - i gamma (N_e + N_f) - chi; primed quantities when
// thermal is set. Uses the real-part-dropped chi unless full_chi is set.
Complex analytic_lambda_nh(int n_e, int n_f, const DerivedParams& derived, bool thermal,
                           bool full_chi = false);

double hep_coupling(double kappa, double n_th);
double lep_coupling(double kappa);

// The four tracked supermode states psi1..psi4.
struct TrackedState {
    const char* label;
    int n_e;
    int n_f;
};
inline constexpr std::array<TrackedState, 4> kTrackedStates{{
    {"psi1", 1, 0},
    {"psi2", 0, 1},
    {"psi3", 2, 0},
    {"psi4", 0, 2},
}};

// e+^{N_e} f+^{N_f} |vac_{e,f}>, normalised. vac_{e,f} is the product of
// coherent states annihilated by c and d. Valid away from the EP.
ComplexVector supermode_state(int n_e, int n_f, const SystemParams& params, FockCutoff cutoff);

}  // namespace tep
