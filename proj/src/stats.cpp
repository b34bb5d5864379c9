#include "bdmix/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "bdmix/io.hpp"
#include "bdmix/regimes.hpp"
#include "bdmix/transient.hpp"

namespace bdmix {

double mgf(const StateDistribution& dist, double theta, double center) {
    const long m = dist.q_max();
    double r = dist.tail_ratio;
    if (r > 0 && dist.tail_mass > 0 && !(r * std::exp(theta) < 1.0))
        fail("MGF diverges: geometric tail ratio * e^theta >= 1");
    std::vector<double> lt;
    lt.reserve(m + 2);
    for (long q = 0; q <= m; ++q) {
        double lp = dist.log_probs.empty() ? std::log(dist.probs[q]) : dist.log_probs[q];
        if (lp == -INFINITY) continue;
        lt.push_back(lp + theta * (static_cast<double>(q) - center));
    }
    if (dist.tail_mass > 0) {
        if (r > 0) {
            double lpm = dist.log_probs.empty() ? std::log(dist.probs[m]) : dist.log_probs[m];
            double x = r * std::exp(theta);
            lt.push_back(lpm + theta * (static_cast<double>(m) - center) + std::log(x / (1.0 - x)));
        } else {
            lt.push_back(std::log(dist.tail_mass) + theta * (static_cast<double>(m + 1) - center));
        }
    }
    double mx = -INFINITY;
    for (double x : lt) mx = std::max(mx, x);
    if (mx == -INFINITY) return 0.0;
    KahanSum s;
    for (double x : lt) s.add(std::exp(x - mx));
    return std::exp(mx + std::log(s.value()));
}

double moment(const StateDistribution& dist, int k) {
    require(k >= 0, "moment order must be nonnegative");
    const long m = dist.q_max();
    KahanSum s;
    for (long q = 0; q <= m; ++q) s.add(dist.probs[q] * std::pow(static_cast<double>(q), k));
    if (dist.tail_mass > 0) {
        double r = dist.tail_ratio;
        if (r > 0) {
            double base = dist.probs[m];
            double w = base;
            KahanSum t;
            for (long j = 1; j < 100000000L; ++j) {
                w *= r;
                double term = w * std::pow(static_cast<double>(m + j), k);
                t.add(term);
                if (term < 1e-20 * t.value() && static_cast<double>(j) * (1.0 - r) > static_cast<double>(k)) break;
            }
            s.add(t.value());
        } else {
            s.add(dist.tail_mass * std::pow(static_cast<double>(m + 1), k));
        }
    }
    return s.value();
}

bool in_validity_range(const RegimeSpec& spec) {
    double a = spec.alpha;
    if (!(a > 0)) return false;
    return static_cast<double>(spec.n) >= std::max(65.0, std::pow(2.0, 1.0 / a));
}

MgfSteady mgf_steady_bound(const RegimeSpec& spec, double delta) {
    require(delta > 0, "delta must be positive");
    if (!in_validity_range(spec)) fail("MGF bound needs n >= max(65, 2^(1/alpha))");
    BirthDeathChain ch = build_mmn(spec, choose_truncation(spec, 1e-13));
    StateDistribution nu = stationary(ch);
    double theta = spec.epsilon / (1.0 + delta);
    return {1.0 + 1.0 / delta, mgf(nu, theta, static_cast<double>(spec.n)), theta};
}

MomentGap moment_gap_bound(const StateDistribution& p, const StateDistribution& q, int k) {
    require(k >= 1, "moment order must be positive");
    double c = chi(p, q);
    double m2 = moment(q, 2 * k), m1 = moment(q, k);
    double var = m2 - m1 * m1;
    bool clamped = false;
    if (var < 0) {
        var = 0;
        clamped = true;
    }
    return {c * std::sqrt(var), std::fabs(moment(p, k) - m1), clamped};
}

VariationalReport chi_variational_check(const StateDistribution& p, const StateDistribution& q,
                                        const std::vector<ProbeFn>& g_family) {
    require(p.probs.size() == q.probs.size(), "common window required");
    VariationalReport rep;
    rep.chi2 = chi_square(p, q);
    const long m = q.q_max();
    double tol = 1e-12 * std::max(1.0, rep.chi2);
    auto ratio = [&](const std::vector<double>& g, double& out) {
        KahanSum ep, eq;
        for (long x = 0; x <= m; ++x) {
            ep.add(p.probs[x] * g[x]);
            eq.add(q.probs[x] * g[x]);
        }
        double mq = eq.value();
        KahanSum v, m2;
        for (long x = 0; x <= m; ++x) {
            v.add(q.probs[x] * sqr(g[x] - mq));
            m2.add(q.probs[x] * g[x] * g[x]);
        }
        // constant under q up to rounding
        if (!(v.value() > 1e-20 * m2.value()) || !(v.value() > 1e-300)) return false;
        out = sqr(ep.value() - mq) / v.value();
        return true;
    };
    std::vector<double> g(m + 1);
    for (const auto& fn : g_family) {
        for (long x = 0; x <= m; ++x) g[x] = fn(x);
        double r;
        if (!ratio(g, r)) {
            ++rep.skipped;
            continue;
        }
        rep.max_ratio = std::max(rep.max_ratio, r);
        if (r > rep.chi2 + tol) rep.pass = false;
    }
    for (long x = 0; x <= m; ++x) g[x] = q.probs[x] > 0 ? p.probs[x] / q.probs[x] : 0.0;
    double r = 0.0;
    if (ratio(g, r)) {
        rep.lr_ratio = r;
        if (std::fabs(r - rep.chi2) > 1e-10 * std::max(1.0, rep.chi2)) rep.pass = false;
    } else {
        rep.lr_ratio = 0.0;
    }
    return rep;
}

namespace {

double regime_rate(const RegimeSpec& spec, bool mean_field) {
    if (mean_field) return l_n(static_cast<double>(spec.n), spec.lambda).rate;
    return theorem1_rate(spec).rate;
}

double n_alpha(const RegimeSpec& spec) { return static_cast<double>(spec.n) / spec.excess; }

}  // namespace

double mean_queue_envelope(const RegimeSpec& spec, double t, double chi0, bool mean_field) {
    require(t >= 0 && chi0 >= 0, "t and chi0 must be nonnegative");
    double rate = regime_rate(spec, mean_field);
    double nd = static_cast<double>(spec.n);
    if (mean_field) return std::exp(-rate * t) * nd * chi0;
    return std::exp(-rate * t) * std::numbers::sqrt2 * (nd + n_alpha(spec)) * chi0;
}

double tail_bound(const RegimeSpec& spec, double t, double x, double chi0, bool mean_field) {
    require(x > 0, "x must be positive");
    double rate = regime_rate(spec, mean_field);
    double pre = 1.0 + std::exp(-rate * t) * chi0;
    double nd = static_cast<double>(spec.n);
    double a = spec.alpha;
    if (mean_field) {
        double c = spec.lambda / nd;
        double na1 = spec.excess / nd;  // n^(alpha-1)... with n^(1-alpha) = excess
        double f = std::exp(-(1.0 - c) * spec.excess / 2.0) + 2.0 / spec.excess +
                   8.0 * nd / (spec.excess * spec.excess) / (std::numbers::e * (1.0 - c));
        (void)na1;
        return pre * std::sqrt(f) * std::exp(-x / 2.0);
    }
    double core = std::sqrt(std::numbers::e * x) * std::exp(-x / 2.0);
    if (a < 0.5) {
        double n12a = spec.excess * spec.excess / nd;  // n^(1-2 alpha)
        core *= std::sqrt(0.5 * std::exp(-2.0 * n12a / 7.0) + 6.0 / n12a);
    }
    return pre * core;
}

IdleBound idle_prob_bound(const RegimeSpec& spec, double t, double chi0, double kappa) {
    if (is_halfin_whitt(spec.alpha)) fail("idle-server bound unsupported at alpha = 1/2");
    double nd = static_cast<double>(spec.n);
    double a = spec.alpha;
    MixingRateBound mr = theorem1_rate(spec);
    double decay = std::exp(-mr.rate * t) * chi0;
    if (a > 0.5) {
        double v = 4.0 * std::numbers::e * std::numbers::pi * std::pow(nd, 0.5 - a) +
                   2.0 * std::sqrt(std::numbers::e * std::numbers::pi) * std::pow(nd, 0.25 - a / 2.0) * decay;
        return {Direction::upper, v};
    }
    double v = 1.0 - kappa * std::pow(nd, a - 0.5) * std::exp(-std::pow(nd, 0.5 - a)) - decay;
    return {Direction::lower, v};
}

VarianceCheck variance_bound_check(const RegimeSpec& spec, bool light_traffic) {
    BirthDeathChain ch = build_mmn(spec, choose_truncation(spec, 1e-13));
    StateDistribution nu = stationary(ch);
    double m1 = moment(nu, 1), m2 = moment(nu, 2);
    double var = m2 - m1 * m1;
    double nd = static_cast<double>(spec.n);
    double bound = light_traffic ? nd * nd : 2.0 * sqr(n_alpha(spec) + nd);
    return {var, bound, var <= bound};
}

double prob_scaled_excess(const StateDistribution& pi, const RegimeSpec& spec, double x) {
    // unlocated tail mass counted as exceeding
    KahanSum s;
    for (long q = 0; q <= pi.q_max(); ++q)
        if (spec.epsilon * static_cast<double>(q - spec.n) > x) s.add(pi.probs[q]);
    s.add(pi.tail_mass);
    return s.value();
}

double prob_idle(const StateDistribution& pi, long n) {
    KahanSum s;
    for (long q = 0; q < std::min(n, pi.q_max() + 1); ++q) s.add(pi.probs[q]);
    return s.value();
}

void write_bounds_csv(std::ostream& os, const std::vector<BoundRow>& rows) {
    os << "n,alpha,t,quantity,bound,numerical,direction,valid,in_validity_range\n";
    for (const auto& r : rows)
        os << r.n << ',' << fmt17(r.alpha) << ',' << fmt17(r.t) << ',' << r.quantity << ',' << fmt17(r.bound) << ','
           << fmt17(r.numerical) << ',' << (r.direction == Direction::upper ? "upper" : "lower") << ','
           << fmt_bool(r.valid) << ',' << fmt_bool(r.in_range) << '\n';
}

}  // namespace bdmix
