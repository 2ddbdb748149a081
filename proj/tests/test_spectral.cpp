#include "oracles.hpp"

#include "thermal_ep/fockspace.hpp"
#include "thermal_ep/liouvillian.hpp"
#include "thermal_ep/model.hpp"
#include "thermal_ep/spectral.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <doctest.h>

using namespace tep;

namespace {

Complex product(const std::vector<Complex>& v) {
    Complex p = 1.0;
    for (const auto& x : v) {
        p *= x;
    }
    return p;
}

Complex sum(const std::vector<Complex>& v) {
    Complex s = 0.0;
    for (const auto& x : v) {
        s += x;
    }
    return s;
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("eig on simple inputs") {
    ComplexMatrix diag = ComplexMatrix::Zero(4, 4);
    diag.diagonal() << Complex(1, 2), Complex(-3, 0), Complex(0, -1), Complex(2.5, 0.5);
    const Spectrum s = eig(diag);
    CHECK(oracle::multiset_distance(s.eigenvalues, {Complex(1, 2), Complex(-3, 0), Complex(0, -1), Complex(2.5, 0.5)}) == 0.0);
    for (double r : s.residuals) {
        CHECK(r == 0.0);
    }

    const Eigen::Matrix2cd m = dynamical_matrix(SystemParams::from_gamma_kappa(1.0, 2.0, 0.5)).m;
    const Spectrum sm = eig(m);
    const auto [l1, l2] = oracle::eig2x2(m);
    CHECK(oracle::multiset_distance(sm.eigenvalues, {l1, l2}) < 1e-14);
    CHECK(oracle::multiset_distance(sm.eigenvalues, {Complex(0.866025403784, -2), Complex(-0.866025403784, -2)}) < 1e-11);

    ComplexMatrix jordan = ComplexMatrix::Zero(2, 2);
    jordan(0, 1) = 1.0;
    const Spectrum sj = eig(jordan);
    CHECK(std::abs(sj.eigenvalues[0]) < 1e-12);
    CHECK(std::abs(sj.eigenvalues[1]) < 1e-12);
    const CoalescenceReport r = analyse_coalescence(ScanMatrix{jordan, {}}, 0.0, ScanOptions{});
    CHECK(r.coalescence);
    CHECK(r.min_sector_angle < 1e-3);

    CHECK_THROWS_AS(eig(ComplexMatrix(2, 3)), DimensionError);
    CHECK_THROWS_AS(eig(ComplexMatrix(0, 0)), DimensionError);
}

TEST_CASE("eigen decomposition properties on random matrices") {
    std::mt19937_64 rng(17);
    for (int n : {1, 3, 8, 40, 128, 256}) {
        const ComplexMatrix a = oracle::random_matrix(n, rng);
        const Spectrum s = eig(a);
        REQUIRE(s.size() == static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(s.residuals[i] <= 1e-9 * a.norm());
            CHECK(std::abs(s.vector(i).norm() - 1.0) < 1e-12);
        }
        CHECK(std::abs(sum(s.eigenvalues) - a.trace()) <= 1e-8 * std::max(1.0, std::abs(a.trace())) * n);
        if (n <= 40) {
            const Complex det = a.determinant();
            CHECK(std::abs(product(s.eigenvalues) - det) <= 1e-8 * std::abs(det));
        }
    }
}

TEST_CASE("similarity invariance") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 5; ++trial) {
        const ComplexMatrix a = oracle::random_matrix(12, rng);
        ComplexMatrix s = oracle::random_matrix(12, rng) * 0.1 + ComplexMatrix::Identity(12, 12);
        const ComplexMatrix b = s.inverse() * a * s;
        CHECK(oracle::multiset_distance(eig(b, false).eigenvalues, eig(a, false).eigenvalues) < 1e-7);
    }
}

TEST_CASE("Hermitian inputs give real spectra") {
    std::mt19937_64 rng(23);
    const ComplexMatrix g = oracle::random_matrix(30, rng);
    const ComplexMatrix h = g + g.adjoint();
    for (const Complex& v : eig(h, false).eigenvalues) {
        CHECK(std::abs(v.imag()) < 1e-10);
    }
    const Spectrum sh = eig(build_hamiltonian(SystemParams{1.0, 1.0, 1.0, 1.0, 0.0}, FockCutoff(6)), false);
    for (const Complex& v : sh.eigenvalues) {
        CHECK(std::abs(v.imag()) < 1e-10);
    }
}

TEST_CASE("deterministic output") {
    std::mt19937_64 rng(29);
    const ComplexMatrix a = oracle::random_matrix(50, rng);
    const Spectrum s1 = eig(a);
    const Spectrum s2 = eig(a);
    CHECK(s1.eigenvalues == s2.eigenvalues);
    CHECK(s1.eigenvectors == s2.eigenvectors);
}

TEST_CASE("matrix exponential") {
    CHECK(mat_exp(ComplexMatrix::Zero(3, 3)) == ComplexMatrix::Identity(3, 3));

    ComplexMatrix x = ComplexMatrix::Zero(2, 2);
    x(0, 1) = x(1, 0) = kI * M_PI;
    CHECK((mat_exp(x) + ComplexMatrix::Identity(2, 2)).norm() < 1e-14);

    ComplexMatrix diag = ComplexMatrix::Zero(3, 3);
    diag.diagonal() << Complex(0.3, 1.0), Complex(-2.0, 0.0), Complex(1.5, -0.5);
    const ComplexMatrix ed = mat_exp(diag);
    for (int i = 0; i < 3; ++i) {
        CHECK(ed(i, i) == std::exp(diag(i, i)));
    }

    std::mt19937_64 rng(31);
    for (double scale : {1e-3, 0.1, 1.0, 5.0, 30.0}) {
        const ComplexMatrix a = oracle::random_matrix(10, rng) * (scale / 10.0);
        const ComplexMatrix reference = oracle::expm_taylor(a);
        CHECK((mat_exp(a) - reference).norm() <= 1e-11 * std::max(1.0, reference.norm()));
        const ComplexMatrix eigen_reference = a.exp();
        CHECK((mat_exp(a) - eigen_reference).norm() <= 1e-11 * std::max(1.0, eigen_reference.norm()));
    }

    const PtSplit split = build_h_pt_split(SystemParams{1.0, 2.5, 1.5, 1.0, 0.0}, FockCutoff(5));
    const ComplexMatrix fwd = mat_exp(-kI * split.h_0 * 0.7);
    const ComplexMatrix back = mat_exp(kI * split.h_0 * 0.7);
    CHECK((fwd * back - ComplexMatrix::Identity(25, 25)).norm() < 1e-10);

    ComplexMatrix huge = ComplexMatrix::Identity(2, 2) * 1e300;
    huge(0, 1) = 1e300;
    CHECK_THROWS_AS(mat_exp(huge), NumericalError);
    CHECK_THROWS_AS(mat_exp(ComplexMatrix(2, 3)), DimensionError);
}

TEST_CASE("span angle") {
    ComplexVector u(2), v(2);
    u << 1, 0;
    v << 0, 1;
    CHECK(span_angle(u, v) == doctest::Approx(M_PI / 2));
    CHECK(span_angle(u, u * Complex(0, 3)) < 1e-15);
    v << 1, 1e-9;
    CHECK(span_angle(u, v) == doctest::Approx(1e-9).epsilon(1e-6));
}

TEST_CASE("EP signature of the dynamical matrix") {
    const ScanOptions options;
    for (double g : {0.5, 0.85, 1.0, 1.15, 1.6}) {
        const SystemParams p = SystemParams::from_gamma_kappa(g, 2.0, 1.0);
        const CoalescenceReport r = analyse_coalescence(ScanMatrix{dynamical_matrix(p).m, {}}, g, options);
        if (g == 1.0) {
            CHECK(r.coalescence);
            CHECK(r.min_sector_angle < options.angle_eps);
        } else {
            CHECK(!r.coalescence);
            CHECK(r.min_sector_angle > 10 * options.angle_eps);
        }
        CHECK(r.min_sector_angle >= 0.0);
        CHECK(r.min_sector_angle <= M_PI / 2);
    }
}

TEST_CASE("coalescence scans") {
    SUBCASE("grid helper") {
        const auto grid = make_grid(0.5, 1.5, 0.01);
        CHECK(grid.size() == 101);
        CHECK(grid.back() == doctest::Approx(1.5));
        CHECK_THROWS_AS(make_grid(1.0, 0.5, 0.1), ConfigError);
        CHECK_THROWS_AS(make_grid(0.0, 1.0, 0.0), ConfigError);
    }
    SUBCASE("optical H_nH over kappa") {
        const FockCutoff c(4);
        const auto sectors = fock::excitation_sectors(c);
        const ScanBuilder builder = [&](double kappa) {
            return ScanMatrix{build_h_nh(SystemParams::from_gamma_kappa(1.0, 2.0, kappa), c), sectors};
        };
        ScanOptions options;
        options.sectors = {1, 2};
        const auto reports = coalescence_scan(builder, make_grid(0.5, 1.5, 0.01), options);
        REQUIRE(reports.size() == 101);
        const auto ep = locate_ep(reports);
        REQUIRE(ep);
        CHECK(std::abs(ep->parameter - 1.0) <= 0.01 + 1e-12);
        CHECK(ep->uncertainty == doctest::Approx(0.01));
        CHECK(ep->flagged);
    }
    SUBCASE("reports stay in grid order and record failures") {
        const ScanBuilder builder = [](double x) -> ScanMatrix {
            if (x > 0.45 && x < 0.55) {
                throw NumericalError("synthetic failure");
            }
            Eigen::Matrix2cd m;
            m << 0, 1, x, 0;
            return ScanMatrix{m, {}};
        };
        ScanOptions options;
        options.workers = 3;
        const auto grid = make_grid(0.0, 1.0, 0.1);
        const auto reports = coalescence_scan(builder, grid, options);
        REQUIRE(reports.size() == grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(reports[i].parameter == grid[i]);
        }
        CHECK(!reports[5].ok);
        CHECK(reports[5].error.find("synthetic") != std::string::npos);
        const auto ep = locate_ep(reports);
        REQUIRE(ep);
        CHECK(ep->parameter == 0.0);
    }
    SUBCASE("unsorted grid is rejected") {
        const ScanBuilder builder = [](double) { return ScanMatrix{ComplexMatrix::Identity(2, 2), {}}; };
        CHECK_THROWS_AS(coalescence_scan(builder, {0.2, 0.1}), ConfigError);
        CHECK_THROWS_AS(coalescence_scan(builder, {}), ConfigError);
    }
}

}  // TEST_SUITE
