#include "bdmix/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "bdmix/spectral.hpp"

namespace bdmix {

const char* method_name(LocalMethod m) {
    switch (m) {
        case LocalMethod::canonical_path: return "canonical_path";
        case LocalMethod::truncation: return "truncation";
        case LocalMethod::closed_form_super_hw: return "closed_form_super_hw";
    }
    return "canonical_path";
}

SuperHwConstants super_hw_constants(double n, double alpha) {
    SuperHwConstants k{};
    double na = std::pow(n, alpha);
    double nma = 1.0 / na;
    double A_log = n * std::log1p(-1.0 / sqr(na - 2.0));
    k.A = std::exp(A_log);
    double inner = 1.0 - 2.0 * nma - 1.0 / n;
    k.s = std::sqrt(inner);
    k.E = std::exp(1.0 / (12.0 * std::floor(n - 2.0 * n * nma)));
    double two_plus = 2.0 + na / n;
    k.L_K = k.A * k.s / (k.E * two_plus);
    k.U_K = k.E * k.s / (2.0 * k.A);
    k.Q_L = k.A * (1.0 - nma) * k.s / (k.E * two_plus);
    double knee = 1.0 + 1.0 / (4.0 * (na - 1.0));
    double e524 = std::exp(5.0 / (24.0 * n));
    k.U1 = knee * e524 * inner / ((1.0 - nma) * k.A * k.A);
    k.g1 = k.U1 / k.Q_L;
    double x = (n * nma * nma) / (1.0 - nma);
    k.g2 = 0.5 * sqr(x * std::exp(x)) * e524 * inner / (k.A * k.A * k.Q_L);
    k.g3 = knee * k.U_K + std::exp(x) / (1.0 - nma) * k.L_K * 2.0 * n * nma * nma;
    return k;
}

void super_hw_K(const RegimeSpec& spec, long& lo, long& hi) {
    lo = std::max(0L, static_cast<long>(std::floor(2.0 * spec.lambda)) - spec.n);
    hi = spec.n - 1;
}

//==============================================================================
// local constants
//==============================================================================

LocalPoincareBound canonical_path_constant(const BirthDeathChain& chain, long K_lo, long K_hi,
                                           const std::vector<double>& measure) {
    if (K_lo > K_hi || K_lo < 0 || K_hi > chain.q_max) fail("K must be a contiguous range inside the window");
    const long m = K_hi - K_lo + 1;
    if (static_cast<long>(measure.size()) != m) fail("measure must cover K");
    LocalPoincareBound lb;
    lb.method = LocalMethod::canonical_path;
    lb.K_lo = K_lo;
    lb.K_hi = K_hi;
    if (m == 1) return lb;
    double tot = 0.0;
    for (double x : measure) {
        if (!(x > 0)) fail("measure must be positive on K");
        tot += x;
    }
    std::vector<double> w(m);
    for (long i = 0; i < m; ++i) w[i] = measure[i] / tot;
    // prefix sums of mass and first moment (offset from K_lo)
    double M0 = 0.0, M1 = 0.0;
    for (long i = 0; i < m; ++i) {
        M0 += w[i];
        M1 += w[i] * static_cast<double>(i);
    }
    double l0 = 0.0, l1 = 0.0, best = 0.0;
    for (long i = 0; i + 1 < m; ++i) {
        l0 += w[i];
        l1 += w[i] * static_cast<double>(i);
        double r0 = M0 - l0, r1 = M1 - l1;
        double S = r1 * l0 - r0 * l1;
        double Q = w[i] * chain.birth[K_lo + i];
        if (!(Q > 0)) fail("edge with zero flow inside K");
        best = std::max(best, S / Q);
    }
    lb.c_local = best;
    return lb;
}

LocalPoincareBound canonical_path_constant(const BirthDeathChain& chain, long K_lo, long K_hi) {
    StateDistribution nu = stationary(chain);
    std::vector<double> m(nu.probs.begin() + K_lo, nu.probs.begin() + K_hi + 1);
    return canonical_path_constant(chain, K_lo, K_hi, m);
}

WeightedPoincare weighted_poincare_super_hw(const RegimeSpec& spec) {
    if (!(spec.alpha >= 0.5 && spec.alpha < 1.0)) fail("weighted Poincare constant needs alpha in [1/2, 1)");
    if (spec.n < 110) fail("weighted Poincare constant is valid for n >= 110 only");
    WeightedPoincare wp;
    double nd = static_cast<double>(spec.n);
    wp.k = super_hw_constants(nd, spec.alpha);
    double g1 = std::min(wp.k.g1, 384.0);
    double g2 = std::min(wp.k.g2, 395.93);
    wp.bound.method = LocalMethod::closed_form_super_hw;
    wp.bound.c_local = g1 * std::pow(nd, 2.0 - 4.0 * spec.alpha) + g2 * std::pow(nd, 3.0 - 6.0 * spec.alpha);
    long lo, hi;
    super_hw_K(spec, lo, hi);
    wp.bound.K_lo = lo;
    wp.bound.K_hi = hi;
    double inner = super_hw_b_inner(spec), knee = super_hw_b_knee(spec);
    for (long q = lo; q <= hi; ++q) wp.bound.weight.push_back(q == hi ? knee : inner);
    // exact tau mass against nu_K
    BirthDeathChain ch = build_mmn(spec, spec.n + 10);
    StateDistribution nu = stationary(ch);
    KahanSum zk, tb;
    for (long q = lo; q <= hi; ++q) {
        zk.add(nu.probs[q]);
        tb.add(nu.probs[q] * wp.bound.weight[q - lo]);
    }
    wp.tau_mass = tb.value() / zk.value();
    return wp;
}

LocalPoincareBound truncation_local_bound(double outer_c_p, const BirthDeathChain& chain, long K_lo, long K_hi) {
    if (K_lo > K_hi || K_lo < 0 || K_hi > chain.q_max) fail("K must be a contiguous range inside the window");
    require(outer_c_p > 0, "outer Poincare constant must be positive");
    LocalPoincareBound lb;
    lb.method = LocalMethod::truncation;
    lb.K_lo = K_lo;
    lb.K_hi = K_hi;
    lb.c_local = K_lo == K_hi ? 0.0 : outer_c_p;
    return lb;
}

//==============================================================================
// assembly
//==============================================================================

PoincareCertificate stitch(double gamma, double tau_mass, double c_b) {
    require(gamma > 0, "gamma must be positive");
    require(tau_mass >= 0 && c_b >= 0, "tau_mass and c_b must be nonnegative");
    PoincareCertificate c;
    c.c_p = (1.0 + tau_mass * c_b) / gamma;
    c.mixing_rate = 1.0 / c.c_p;
    c.provenance = tau_mass == 0.0 ? "singleton" : "stitch";
    c.gamma = gamma;
    c.tau_mass = tau_mass;
    c.c_local = c_b;
    return c;
}

PoincareCertificate singleton_certificate(double gamma) {
    require(gamma > 0, "gamma must be positive");
    PoincareCertificate c;
    c.c_p = 1.0 / gamma;
    c.mixing_rate = gamma;
    c.provenance = "singleton";
    c.gamma = gamma;
    return c;
}

PoincareCertificate singleton_certificate(const DriftCertificate& cert) {
    if (cert.K.size() != 1) fail("singleton certificate needs |K| = 1");
    return singleton_certificate(cert.gamma);
}

PoincareCertificate constant_b_certificate(double gamma, double B, double c_l) {
    require(gamma > 0, "gamma must be positive");
    require(B >= 0 && c_l >= 0, "B and C_L must be nonnegative");
    PoincareCertificate c;
    c.c_p = (1.0 + B * c_l) / gamma;
    c.mixing_rate = 1.0 / c.c_p;
    c.provenance = "constant_b";
    c.gamma = gamma;
    c.tau_mass = B;
    c.c_local = c_l;
    return c;
}

//==============================================================================
// probes
//==============================================================================

namespace {

struct Probe {
    std::string name;
    std::vector<double> f;
};

// seeded probe family over [lo, hi], constant outside
Probe make_probe(int i, long size, long lo, long hi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> N(0.0, 1.0);
    Probe p;
    p.f.assign(size, 0.0);
    long width = std::max(1L, hi - lo);
    auto clampq = [&](long q) { return std::clamp(q, lo, hi); };
    switch (i % 5) {
        case 0: {
            long k = lo + static_cast<long>(U(rng) * static_cast<double>(width));
            for (long q = 0; q < size; ++q) p.f[q] = clampq(q) <= k ? 1.0 : 0.0;
            p.name = "prefix:" + std::to_string(k);
            break;
        }
        case 1: {
            int deg = 1 + static_cast<int>(U(rng) * 6);
            std::vector<double> c(deg + 1);
            for (double& x : c) x = N(rng);
            for (long q = 0; q < size; ++q) {
                double x = 2.0 * static_cast<double>(clampq(q) - lo) / static_cast<double>(width) - 1.0;
                double t0 = 1.0, t1 = x, s = c[0];
                for (int j = 1; j <= deg; ++j) {
                    s += c[j] * t1;
                    double t2 = 2.0 * x * t1 - t0;
                    t0 = t1;
                    t1 = t2;
                }
                p.f[q] = s;
            }
            p.name = "cheb:" + std::to_string(deg);
            break;
        }
        case 2: {
            double th = (U(rng) * 6.0 - 3.0) / static_cast<double>(width);
            double mid = 0.5 * static_cast<double>(lo + hi);
            for (long q = 0; q < size; ++q) p.f[q] = std::exp(th * (static_cast<double>(clampq(q)) - mid));
            p.name = "exp:" + std::to_string(th);
            break;
        }
        case 3: {
            for (long q = 0; q < size; ++q) p.f[q] = 0.0;
            std::vector<double> noise(hi - lo + 1);
            for (double& x : noise) x = N(rng);
            for (long q = 0; q < size; ++q) p.f[q] = noise[clampq(q) - lo];
            p.name = "noise";
            break;
        }
        default: {
            std::vector<double> walk(hi - lo + 1);
            double s = 0.0;
            for (double& x : walk) {
                s += N(rng);
                x = s;
            }
            for (long q = 0; q < size; ++q) p.f[q] = walk[clampq(q) - lo];
            p.name = "walk";
            break;
        }
    }
    p.name += "#" + std::to_string(i);
    return p;
}

void effective_support(const StateDistribution& nu, long& lo, long& hi) {
    double mass = nu.window_mass();
    double c = 0.0;
    lo = 0;
    for (long q = 0; q <= nu.q_max(); ++q) {
        c += nu.probs[q] / mass;
        if (c > 1e-14) {
            lo = q;
            break;
        }
    }
    c = 0.0;
    hi = nu.q_max();
    for (long q = nu.q_max(); q >= 0; --q) {
        c += nu.probs[q] / mass;
        if (c > 1e-14) {
            hi = q;
            break;
        }
    }
    if (hi <= lo) hi = std::min(nu.q_max(), lo + 1);
}

// probes whose variance sits below double resolution of f are skipped
void record(ProbeReport& rep, double var, double rhs, double second_moment, const std::string& name) {
    if (!(var > 1e-200) || var <= 1e-20 * second_moment) return;
    double v = (var - rhs) / var;
    ++rep.n_checked;
    if (rep.n_checked == 1 || v > rep.worst) {
        rep.worst = v;
        rep.worst_probe = name;
    }
    if (v > 1e-9) rep.pass = false;
}

double second_moment(const StateDistribution& nu, const std::vector<double>& f) {
    KahanSum s;
    for (std::size_t q = 0; q < f.size(); ++q) s.add(nu.probs[q] * f[q] * f[q]);
    return s.value() / nu.window_mass();
}

}  // namespace

ProbeReport verify_poincare(const BirthDeathChain& chain, const PoincareCertificate& cert, int n_tests,
                            std::uint64_t seed) {
    ProbeReport rep;
    StateDistribution nu = stationary(chain);
    long lo, hi;
    effective_support(nu, lo, hi);
    std::mt19937_64 rng(seed);
    double mass = nu.window_mass();
    for (int i = 0; i < n_tests; ++i) {
        Probe p = make_probe(i, chain.size(), lo, hi, rng);
        double var = variance(nu, p.f);
        double form = dirichlet_form(chain, nu, p.f) / mass;
        record(rep, var, cert.c_p * form, second_moment(nu, p.f), p.name);
    }
    Eigenpair ep = second_eigenfunction(chain);
    record(rep, variance(nu, ep.f), cert.c_p * dirichlet_form(chain, nu, ep.f) / mass, second_moment(nu, ep.f),
           "eigenfunction");
    rep.gap = spectral_gap(chain).gap;
    rep.rate_ok = cert.mixing_rate <= rep.gap + 1e-9;
    if (!rep.rate_ok) rep.pass = false;
    return rep;
}

ProbeReport verify_local_poincare(const BirthDeathChain& chain, const LocalPoincareBound& lb,
                                  const std::vector<double>& measure, int n_tests, std::uint64_t seed) {
    ProbeReport rep;
    long m = lb.K_hi - lb.K_lo + 1;
    require(static_cast<long>(measure.size()) == m, "measure must cover K");
    if (m == 1) return rep;
    double tot = 0.0;
    for (double x : measure) tot += x;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < n_tests; ++i) {
        Probe p = make_probe(i, m, 0, m - 1, rng);
        KahanSum m1;
        for (long j = 0; j < m; ++j) m1.add(measure[j] / tot * p.f[j]);
        KahanSum v, e, s2;
        for (long j = 0; j < m; ++j) v.add(measure[j] / tot * sqr(p.f[j] - m1.value()));
        for (long j = 0; j < m; ++j) s2.add(measure[j] / tot * sqr(p.f[j]));
        for (long j = 0; j + 1 < m; ++j)
            e.add(measure[j] / tot * chain.birth[lb.K_lo + j] * sqr(p.f[j + 1] - p.f[j]));
        record(rep, v.value(), lb.c_local * e.value(), s2.value(), p.name);
    }
    return rep;
}

ProbeReport verify_weighted_poincare(const RegimeSpec& spec, const WeightedPoincare& wp, int n_tests,
                                     std::uint64_t seed) {
    ProbeReport rep;
    long q_max = choose_truncation(spec, 1e-12);
    BirthDeathChain ch = build_mmn(spec, q_max);
    StateDistribution nu = stationary(ch);
    long lo = wp.bound.K_lo, hi = wp.bound.K_hi;
    KahanSum zk, zt;
    for (long q = lo; q <= hi; ++q) {
        zk.add(nu.probs[q]);
        zt.add(nu.probs[q] * wp.bound.weight[q - lo]);
    }
    double nuK = zk.value(), T = zt.value();
    long slo, shi;
    effective_support(nu, slo, shi);
    slo = std::min(slo, lo);
    shi = std::max(shi, hi);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < n_tests; ++i) {
        Probe p = make_probe(i, ch.size(), slo, shi, rng);
        KahanSum m1;
        for (long q = lo; q <= hi; ++q) m1.add(nu.probs[q] * wp.bound.weight[q - lo] / T * p.f[q]);
        KahanSum v, s2;
        for (long q = lo; q <= hi; ++q) {
            double w = nu.probs[q] * wp.bound.weight[q - lo] / T;
            v.add(w * sqr(p.f[q] - m1.value()));
            s2.add(w * sqr(p.f[q]));
        }
        double form = dirichlet_form(ch, nu, p.f);
        record(rep, v.value(), wp.bound.c_local / nuK * form, s2.value(), p.name);
    }
    return rep;
}

RoughlyUniform roughly_uniform_bounds(const RegimeSpec& spec) {
    if (!(spec.alpha > 0.5 && spec.alpha < 1.0)) fail("roughly-uniform bounds need alpha in (1/2, 1)");
    if (spec.n < 110) fail("roughly-uniform bounds need n >= 110");
    RoughlyUniform ru;
    double nd = static_cast<double>(spec.n);
    SuperHwConstants k = super_hw_constants(nd, spec.alpha);
    ru.L_K = k.L_K;
    ru.U_K = k.U_K;
    super_hw_K(spec, ru.K_lo, ru.K_hi);
    BirthDeathChain ch = build_mmn(spec, spec.n + 10);
    StateDistribution nu = stationary(ch);
    KahanSum z;
    for (long q = ru.K_lo; q <= ru.K_hi; ++q) z.add(nu.probs[q]);
    double scale = spec.excess;  // n^(1-alpha)
    ru.min_scaled = INFINITY;
    ru.max_scaled = -INFINITY;
    for (long q = ru.K_lo; q <= ru.K_hi; ++q) {
        double v = nu.probs[q] / z.value() * scale;
        ru.min_scaled = std::min(ru.min_scaled, v);
        ru.max_scaled = std::max(ru.max_scaled, v);
    }
    ru.pass = ru.min_scaled >= ru.L_K && ru.max_scaled <= ru.U_K;
    return ru;
}

//==============================================================================
// pipelines
//==============================================================================

PoincareCertificate super_hw_pipeline(const RegimeSpec& spec, WeightedPoincare* detail) {
    DriftCertificate dc = super_hw_certificate(spec);
    if (spec.alpha >= 1.0) {
        PoincareCertificate c = singleton_certificate(dc.gamma);
        c.provenance = "singleton";
        return c;
    }
    WeightedPoincare wp = weighted_poincare_super_hw(spec);
    if (detail) *detail = wp;
    return stitch(dc.gamma, wp.tau_mass, wp.bound.c_local);
}

PoincareCertificate sub_hw_pipeline(const RegimeSpec& spec) {
    DriftCertificate dc = sub_hw_certificate(spec);
    if (dc.K.size() == 1) return singleton_certificate(dc);
    double lam = spec.lambda;
    double B = std::max(std::ceil(lam) + 2.0, 2.0 * lam);
    double c_l = 12.0 * sqr(lam + 1.0) / (lam * lam * lam);
    return constant_b_certificate(dc.gamma, B, c_l);
}

PoincareCertificate mean_field_pipeline(const RegimeSpec& spec, double z) {
    DriftCertificate dc = mean_field_certificate(spec, z);
    // truncated M/M/n on {0..n} inherits the M/M/inf constant 1/mu
    return constant_b_certificate(dc.gamma, dc.B_max(), 1.0 / spec.mu);
}

void write_poincare_csv_header(std::ostream& os) { os << "method,n,alpha,c_p,mixing_rate,gap_oracle,valid\n"; }

}  // namespace bdmix
