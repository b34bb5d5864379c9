#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bdmix/bdchain.hpp"
#include "bdmix/transient.hpp"

using namespace bdmix;

TEST_CASE("evolve matches a dense matrix exponential") {
    // scipy expm oracle
    auto ch = build_custom({1.0, 2.0, 1.5, 0.0}, {0.0, 1.0, 3.0, 2.0});
    auto p = evolve(ch, StateDistribution::dirac(3, 0), 0.7, 1e-13);
    CHECK(p.probs[0] == doctest::Approx(0.592903105558717).epsilon(1e-11));
    CHECK(p.probs[1] == doctest::Approx(0.2650662208334382).epsilon(1e-11));
    CHECK(p.probs[2] == doctest::Approx(0.1059064983060292).epsilon(1e-11));
    CHECK(p.probs[3] == doctest::Approx(0.03612417530181535).epsilon(1e-10));
    CHECK(chi_square(p, stationary(ch)) == doctest::Approx(0.3972232212748188).epsilon(1e-10));
}

TEST_CASE("M/M/16 chi trace against expm on a deep truncation") {
    auto s = RegimeSpec::from_alpha(16, 1.0);
    auto ch = build_mmn(s, choose_truncation(s, 1e-14));
    auto nu = stationary(ch);
    auto p0 = StateDistribution::dirac(ch.q_max, 0);
    CHECK(chi(evolve(ch, p0, 1.0), nu) == doctest::Approx(3.8760736704402015).epsilon(1e-8));
    CHECK(chi(evolve(ch, p0, 5.0), nu) == doctest::Approx(0.6510502223356606).epsilon(1e-8));
    CHECK(chi(evolve(ch, p0, 20.0), nu) == doctest::Approx(0.25132295616655825).epsilon(1e-7));
}

TEST_CASE("semigroup and fixed point") {
    auto s = RegimeSpec::from_alpha(8, 0.75);
    auto ch = build_mmn(s, choose_truncation(s));
    auto nu = stationary(ch);
    auto p0 = StateDistribution::uniform(ch.q_max, 0, 5);
    auto a = evolve(ch, evolve(ch, p0, 1.3), 0.9);
    auto b = evolve(ch, p0, 2.2);
    for (long q = 0; q <= ch.q_max; ++q) CHECK(std::fabs(a.probs[q] - b.probs[q]) < 1e-11);
    auto f = evolve(ch, nu, 3.0);
    CHECK(chi_square(f, nu) < 1e-12);
    CHECK(evolve(ch, p0, 0.0).probs == p0.probs);
}

TEST_CASE("decay trace is nonincreasing") {
    auto s = RegimeSpec::from_alpha(4, 1.0);
    auto ch = build_mmn(s, choose_truncation(s));
    std::vector<double> g;
    for (int k = 0; k <= 40; ++k) g.push_back(0.5 * k);
    auto rows = decay_trace(ch, StateDistribution::dirac(ch.q_max, 0), g);
    REQUIRE(rows.size() == 41);
    CHECK(rows[0].chi == doctest::Approx(5.049752469181039).epsilon(1e-10));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].chi <= rows[i - 1].chi * (1 + 1e-12));
        CHECK(rows[i].tv <= rows[i - 1].tv + 1e-12);
    }
}

TEST_CASE("distances") {
    auto p = StateDistribution::dirac(1, 0);
    auto q = StateDistribution::uniform(1, 0, 1);
    CHECK(chi_square(p, q) == doctest::Approx(1.0));
    CHECK(tv_distance(p, q) == doctest::Approx(0.5));
    CHECK(tv_distance(p, p) == 0.0);
    CHECK_THROWS_AS(chi_square(q, p), Error);
}

TEST_CASE("evolve rejects bad input") {
    auto ch = build_custom({1.0, 0.0}, {0.0, 1.0});
    auto p = StateDistribution::dirac(1, 0);
    CHECK_THROWS_AS(evolve(ch, p, -1.0), Error);
    CHECK_THROWS_AS(evolve(ch, p, 1.0, 1e-3), Error);
    CHECK_THROWS_AS(evolve(ch, StateDistribution::dirac(3, 0), 1.0), Error);
    CHECK_THROWS_AS(evolve(ch, p, 1e8), Error);
}

TEST_CASE("M/M/4 mean at t=1 agrees with event-driven simulation") {
    auto s = RegimeSpec::from_alpha(4, 1.0);
    auto ch = build_mmn(s, choose_truncation(s, 1e-14));
    auto p = evolve(ch, StateDistribution::dirac(ch.q_max, 0), 1.0);
    double mean = 0.0;
    for (long q = 0; q <= p.q_max(); ++q) mean += q * p.probs[q];

    std::mt19937_64 rng(20240611ULL);
    std::exponential_distribution<double> ex(1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const long reps = 260000;
    long steps = 0;
    double s1 = 0.0, s2 = 0.0;
    for (long r = 0; r < reps; ++r) {
        long q = 0;
        double t = 0.0;
        for (;;) {
            double rate = 3.0 + std::min(q, 4L);
            t += ex(rng) / rate;
            if (t > 1.0) break;
            ++steps;
            q += u(rng) * rate < 3.0 ? 1 : -1;
        }
        s1 += q;
        s2 += double(q) * q;
    }
    CHECK(steps > 1000000);
    double m = s1 / reps, se = std::sqrt((s2 / reps - m * m) / reps);
    CHECK(std::fabs(m - mean) < 3.0 * se);
}
