#include <doctest.h>

#include <cmath>

#include "bdmix/bdchain.hpp"
#include "bdmix/spectral.hpp"

using namespace bdmix;

TEST_CASE("finite chain gap matches dense eigensolver") {
    // numpy eigvalsh oracle
    auto ch = build_custom({1.0, 2.0, 1.5, 0.0}, {0.0, 1.0, 3.0, 2.0});
    auto r = spectral_gap(ch);
    CHECK(r.gap == doctest::Approx(1.0520151053298534).epsilon(1e-9));
    CHECK(sturm_count(ch, 1e-9) == 1);
    CHECK(sturm_count(ch, 100.0) == 4);
    auto e = second_eigenfunction(ch);
    CHECK(e.value == doctest::Approx(1.0520151053298534).epsilon(1e-9));
    CHECK(rayleigh(ch, e.f) == doctest::Approx(e.value).epsilon(1e-8));
}

TEST_CASE("infinite M/M/1 and M/M/n gaps sit on the essential spectrum") {
    auto s1 = RegimeSpec::from_lambda(1, 0.25);
    auto g1 = spectral_gap(build_mmn(s1, 200));
    CHECK(g1.gap == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(g1.at_essential);
    SpectralOptions refl;
    refl.tail_closure = false;
    // dense reflecting truncation at 400: 0.2500306887
    CHECK(spectral_gap(build_mmn(s1, 400), refl).gap == doctest::Approx(0.2500306887205927).epsilon(1e-8));
    auto s4 = RegimeSpec::from_alpha(4, 1.0);
    CHECK(spectral_gap(build_mmn(s4, 100)).gap == doctest::Approx(s4.sqrt_gap()).epsilon(1e-9));
}

TEST_CASE("M/M/inf gap equals mu") {
    CHECK(spectral_gap(build_mminf(4.0, 1.0, choose_truncation_mminf(4.0, 1.0))).gap ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(spectral_gap(build_mminf(4.0, 2.0, choose_truncation_mminf(4.0, 2.0))).gap ==
          doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("forms and reversibility") {
    auto s = RegimeSpec::from_alpha(16, 0.75);
    auto ch = build_mmn(s, choose_truncation(s));
    auto nu = stationary(ch);
    std::vector<double> f(ch.size());
    for (long q = 0; q <= ch.q_max; ++q) f[q] = std::sin(0.3 * q) + 0.01 * q;
    CHECK(dirichlet_form(ch, nu, f) == doctest::Approx(generator_form(ch, nu, f)).epsilon(1e-10));
    CHECK(rayleigh(ch, nu, f) >= spectral_gap(ch, {false, 1e-10}).gap - 1e-9);
    std::vector<double> c(ch.size(), 2.0);
    CHECK(variance(nu, c) == doctest::Approx(0.0));
}

TEST_CASE("closed-form spectral bounds") {
    auto s = RegimeSpec::from_alpha(100, 0.25);
    CHECK(beta_hat_lower_bound(s) <= s.sqrt_gap());
    CHECK(van_doorn_bound(s) <= van_doorn_fstar(s) + 1e-15);
    CHECK(van_doorn_fstar(RegimeSpec::from_alpha(2000, 0.25)) == doctest::Approx(0.5).epsilon(1e-3));
}
