#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bdmix/common.hpp"

namespace bdmix {

// n servers, lambda = mu*(n - n^(1-alpha)) when alpha-parameterized
struct RegimeSpec {
    long n = 1;
    double alpha = 1.0;
    double lambda = 0.0;
    double mu = 1.0;
    double epsilon = 0.0;  // 1 - lambda/(n mu)
    double excess = 0.0;   // n mu - lambda, kept exact for the alpha form
    bool alpha_given = false;

    static RegimeSpec from_alpha(long n, double alpha, double mu = 1.0);
    static RegimeSpec from_lambda(long n, double lambda, double mu = 1.0);

    double load() const { return lambda / (static_cast<double>(n) * mu); }
    // (sqrt(n mu) - sqrt(lambda))^2 without cancellation
    double sqrt_gap() const;
    bool lambda_is_integer(double tol = 1e-9) const;
};

enum class ChainKind { mm1, mmn, mminf, custom };

const char* kind_name(ChainKind k);

// reflecting truncation: birth[q_max] == 0
struct BirthDeathChain {
    std::vector<double> birth;
    std::vector<double> death;
    long q_max = 0;
    ChainKind kind = ChainKind::custom;
    long n = 0;          // servers (mmn/mm1)
    double lambda = 0.0; // nominal arrival rate
    double mu = 1.0;
    double excess = 0.0; // n mu - lambda (mmn/mm1)

    long size() const { return q_max + 1; }
    double max_rate() const;
};

struct StateDistribution {
    std::vector<double> probs;
    double tail_mass = 0.0;
    std::vector<double> log_probs;  // optional
    double tail_ratio = 0.0;        // geometric ratio of the analytic tail, 0 if none

    long q_max() const { return static_cast<long>(probs.size()) - 1; }
    double window_mass() const { return ksum(probs); }
    double total_mass() const { return window_mass() + tail_mass; }

    static StateDistribution dirac(long q_max, long q);
    static StateDistribution uniform(long q_max, long lo, long hi);
};

BirthDeathChain build_mmn(const RegimeSpec& spec, long q_max);
BirthDeathChain build_mminf(double lambda, double mu, long q_max);
BirthDeathChain build_custom(std::vector<double> birth, std::vector<double> death);

StateDistribution stationary(const BirthDeathChain& chain);

std::vector<double> generator_apply(const BirthDeathChain& chain, const std::vector<double>& f);

long choose_truncation(const RegimeSpec& spec, double mass_tol = 1e-12);
long choose_truncation_mminf(double lambda, double mu, double mass_tol = 1e-12);

// log P[X > m] for X ~ Poisson(a)
double poisson_log_tail(double a, long m);
// log of the M/M/n stationary mass at q = n (untruncated chain)
double mmn_log_nu_at_n(const RegimeSpec& spec);

void write_stationary_csv(std::ostream& os, const StateDistribution& dist);

}  // namespace bdmix
