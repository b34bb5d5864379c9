#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bdmix/bdchain.hpp"

using namespace bdmix;

TEST_CASE("alpha and lambda parameterizations") {
    auto s = RegimeSpec::from_alpha(4, 1.0);
    CHECK(s.lambda == doctest::Approx(3.0));
    CHECK(s.excess == doctest::Approx(1.0));
    CHECK(s.epsilon == doctest::Approx(0.25));
    CHECK(s.lambda_is_integer());
    auto t = RegimeSpec::from_lambda(100, 90.0);
    CHECK(t.alpha == doctest::Approx(0.5));
    CHECK_FALSE(t.alpha_given);
    CHECK(RegimeSpec::from_alpha(16, 1.0).sqrt_gap() == doctest::Approx(std::pow(4.0 - std::sqrt(15.0), 2)).epsilon(1e-14));
}

TEST_CASE("alpha round trip") {
    for (long n : {10L, 100L, 1000L})
        for (double a : {0.25, 0.5, 0.75, 1.5}) {
            auto s = RegimeSpec::from_alpha(n, a);
            auto r = RegimeSpec::from_lambda(n, s.lambda);
            CHECK(r.alpha == doctest::Approx(a).epsilon(1e-10));
        }
}

TEST_CASE("bad specs") {
    CHECK_THROWS_AS(RegimeSpec::from_lambda(4, 4.0), Error);
    CHECK_THROWS_AS(RegimeSpec::from_alpha(0, 1.0), Error);
    CHECK_THROWS_AS(RegimeSpec::from_alpha(4, -1.0), Error);
    CHECK_THROWS_AS(build_custom({1.0, 0.0}, {1.0, 1.0}), Error);
}

TEST_CASE("M/M/4 stationary law matches the exact infinite chain") {
    // mpmath oracle
    auto s = RegimeSpec::from_alpha(4, 1.0);
    auto nu = stationary(build_mmn(s, choose_truncation(s, 1e-14)));
    CHECK(nu.probs[0] == doctest::Approx(0.037735849056603774).epsilon(1e-12));
    CHECK(nu.probs[4] == doctest::Approx(0.12735849056603774).epsilon(1e-12));
    CHECK(nu.total_mass() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(nu.tail_ratio == doctest::Approx(0.75));
}

TEST_CASE("custom chain stationary law") {
    auto ch = build_custom({1.0, 2.0, 1.5, 0.0}, {0.0, 1.0, 3.0, 2.0});
    auto nu = stationary(ch);
    CHECK(nu.probs[0] == doctest::Approx(0.31578947368421056).epsilon(1e-14));
    CHECK(nu.probs[2] == doctest::Approx(0.21052631578947367).epsilon(1e-14));
    CHECK(nu.probs[3] == doctest::Approx(0.15789473684210528).epsilon(1e-14));
    CHECK(nu.tail_mass == 0.0);
}

TEST_CASE("detailed balance and generator annihilates constants") {
    auto s = RegimeSpec::from_alpha(64, 0.75);
    auto ch = build_mmn(s, choose_truncation(s));
    auto nu = stationary(ch);
    for (long q = 0; q < ch.q_max; ++q)
        CHECK(nu.probs[q] * ch.birth[q] == doctest::Approx(nu.probs[q + 1] * ch.death[q + 1]).epsilon(1e-12));
    auto Lf = generator_apply(ch, std::vector<double>(ch.size(), 3.0));
    for (double x : Lf) CHECK(std::fabs(x) < 1e-12);
}

TEST_CASE("truncation respects the mass tolerance") {
    for (double a : {0.25, 1.0}) {
        auto s = RegimeSpec::from_alpha(100, a);
        long q = choose_truncation(s, 1e-12);
        auto nu = stationary(build_mmn(s, q));
        CHECK(nu.tail_mass <= 1e-12);
    }
    long q = choose_truncation_mminf(4.0, 1.0, 1e-12);
    CHECK(std::exp(poisson_log_tail(4.0, q)) <= 1e-12);
}

TEST_CASE("huge n keeps log-probabilities finite") {
    auto s = RegimeSpec::from_alpha(5000, 0.25);
    auto nu = stationary(build_mmn(s, choose_truncation(s)));
    REQUIRE_FALSE(nu.log_probs.empty());
    CHECK(std::isfinite(nu.log_probs[0]));
    CHECK(nu.window_mass() == doctest::Approx(1.0 - nu.tail_mass).epsilon(1e-12));
}

TEST_CASE("stationary csv") {
    std::ostringstream os;
    write_stationary_csv(os, stationary(build_custom({1.0, 0.0}, {0.0, 1.0})));
    CHECK(os.str() == "q,prob,log_prob\n0,0.5,-0.69314718055994529\n1,0.5,-0.69314718055994529\n");
}
