#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "bdmix/bdchain.hpp"

namespace bdmix {

// E[e^{theta (q - center)}], geometric tail in closed form when tail_ratio > 0
double mgf(const StateDistribution& dist, double theta, double center);

// E[X^k] including the tail (geometric tail summed, other tails placed at q_max + 1)
double moment(const StateDistribution& dist, int k);

struct MgfSteady {
    double bound;
    double value;
    double theta;
};
MgfSteady mgf_steady_bound(const RegimeSpec& spec, double delta);

struct MomentGap {
    double bound;
    double actual;
    bool clamped;
};
MomentGap moment_gap_bound(const StateDistribution& p, const StateDistribution& q, int k);

struct VariationalReport {
    bool pass = true;
    double chi2 = 0.0;
    double max_ratio = 0.0;
    double lr_ratio = 0.0;  // ratio at g = p/q
    long skipped = 0;
};
using ProbeFn = std::function<double(long)>;
VariationalReport chi_variational_check(const StateDistribution& p, const StateDistribution& q,
                                        const std::vector<ProbeFn>& g_family);

// 1 <= n_0 = max(65, 2^(1/alpha)) <= n
bool in_validity_range(const RegimeSpec& spec);

double mean_queue_envelope(const RegimeSpec& spec, double t, double chi0, bool mean_field = false);
double tail_bound(const RegimeSpec& spec, double t, double x, double chi0, bool mean_field = false);

enum class Direction { upper, lower };
struct IdleBound {
    Direction direction;
    double value;
};
IdleBound idle_prob_bound(const RegimeSpec& spec, double t, double chi0, double kappa = 1.0);

struct VarianceCheck {
    double variance;
    double bound;
    bool pass;
};
VarianceCheck variance_bound_check(const RegimeSpec& spec, bool light_traffic = false);

struct BoundRow {
    long n;
    double alpha;
    double t;
    std::string quantity;
    double bound;
    double numerical;
    Direction direction;
    bool valid;
    bool in_range;
};
void write_bounds_csv(std::ostream& os, const std::vector<BoundRow>& rows);

// numerical side of the finite-time statistics on pi_t
double prob_scaled_excess(const StateDistribution& pi, const RegimeSpec& spec, double x);
double prob_idle(const StateDistribution& pi, long n);

}  // namespace bdmix
