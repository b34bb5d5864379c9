#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bdmix/bdchain.hpp"
#include "bdmix/stats.hpp"
#include "bdmix/transient.hpp"

using namespace bdmix;

TEST_CASE("MGF with the geometric tail closed form") {
    // mpmath oracle
    auto s = RegimeSpec::from_alpha(65, 1.0);
    auto r = mgf_steady_bound(s, 1.0);
    CHECK(r.value == doctest::Approx(1.8296660432080058).epsilon(1e-11));
    CHECK(r.bound == 2.0);
    auto nu = stationary(build_mmn(s, 80));
    CHECK(mgf(nu, r.theta, 65.0) == doctest::Approx(1.8296660432080058).epsilon(1e-11));
    CHECK_THROWS_AS(mgf(nu, 1.0, 0.0), Error);
    CHECK_THROWS_AS(mgf_steady_bound(RegimeSpec::from_alpha(64, 1.0), 1.0), Error);
}

TEST_CASE("moments of M/M/4") {
    auto s = RegimeSpec::from_alpha(4, 1.0);
    auto nu = stationary(build_mmn(s, 30));
    double m1 = moment(nu, 1);
    CHECK(m1 == doctest::Approx(4.5283018867924528).epsilon(1e-12));
    CHECK(moment(nu, 2) - m1 * m1 == doctest::Approx(12.890708437166251).epsilon(1e-11));
    CHECK(moment(nu, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("moment gap bound dominates") {
    auto s = RegimeSpec::from_alpha(16, 1.0);
    auto ch = build_mmn(s, choose_truncation(s, 1e-14));
    auto nu = stationary(ch);
    auto p = evolve(ch, StateDistribution::dirac(ch.q_max, 0), 2.0);
    for (int k : {1, 2, 3}) {
        auto g = moment_gap_bound(p, nu, k);
        CHECK(g.actual <= g.bound);
        CHECK_FALSE(g.clamped);
    }
}

TEST_CASE("variational check on a small pair") {
    StateDistribution p, q;
    p.probs = {0.5, 0.3, 0.2};
    q.probs = {0.2, 0.3, 0.5};
    std::vector<ProbeFn> g = {[](long x) { return double(x); }, [](long x) { return x == 0 ? 1.0 : 0.0; }};
    auto r = chi_variational_check(p, q, g);
    CHECK(r.pass);
    CHECK(r.chi2 == doctest::Approx(0.09 / 0.2 + 0.09 / 0.5));
    CHECK(r.lr_ratio == doctest::Approx(r.chi2).epsilon(1e-12));
}

TEST_CASE("finite-time envelopes") {
    auto s = RegimeSpec::from_alpha(4, 1.0);
    double rate = s.sqrt_gap();
    CHECK(mean_queue_envelope(s, 1.0, 2.0) == doctest::Approx(std::exp(-rate) * std::sqrt(2.0) * 8.0 * 2.0));
    CHECK(tail_bound(s, 0.0, 2.0, 0.0) == doctest::Approx(std::sqrt(2.0 * std::exp(1.0)) * std::exp(-1.0)));
    auto ib = idle_prob_bound(s, 0.0, 0.0);
    CHECK(ib.direction == Direction::upper);
    CHECK(ib.value == doctest::Approx(4.0 * std::exp(1.0) * M_PI / 2.0));
    auto sub = idle_prob_bound(RegimeSpec::from_alpha(100, 0.25), 1e9, 1.0);
    CHECK(sub.direction == Direction::lower);
    CHECK(sub.value == doctest::Approx(1.0 - std::pow(100.0, -0.25) * std::exp(-std::pow(100.0, 0.25))));
    CHECK_THROWS_AS(idle_prob_bound(RegimeSpec::from_alpha(110, 0.5), 1.0, 1.0), Error);
}

TEST_CASE("variance bounds") {
    auto v = variance_bound_check(RegimeSpec::from_alpha(100, 0.75));
    CHECK(v.pass);
    auto lt = variance_bound_check(RegimeSpec::from_lambda(100, 10.0), true);
    CHECK(lt.variance == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(lt.bound == 10000.0);
    CHECK(lt.pass);
}

TEST_CASE("validity range") {
    CHECK(in_validity_range(RegimeSpec::from_alpha(65, 1.0)));
    CHECK_FALSE(in_validity_range(RegimeSpec::from_alpha(64, 1.0)));
    CHECK_FALSE(in_validity_range(RegimeSpec::from_alpha(100, 0.1)));
}

TEST_CASE("bounds csv") {
    std::ostringstream os;
    write_bounds_csv(os, {{4, 1.0, 1.0, "mean_queue", 2.0, 1.0, Direction::upper, true, false}});
    CHECK(os.str() ==
          "n,alpha,t,quantity,bound,numerical,direction,valid,in_validity_range\n4,1,1,mean_queue,2,1,upper,true,false\n");
}
