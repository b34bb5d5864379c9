#include "bdmix/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bdmix {

namespace {

// symmetric tridiagonal: diagonal a, squared off-diagonals e2 (size m)
struct Tridiag {
    std::vector<double> a;
    std::vector<double> e2;
    // optional semi-infinite constant tail glued after the last row
    bool closed = false;
    double tail_d = 0.0;
    double tail_c2 = 0.0;
    double ess = INFINITY;  // bottom of the tail's spectrum

    long count(double x) const {
        const std::size_t m = a.size();
        long neg = 0;
        long double p = static_cast<long double>(a[0]) - x;
        const long double tiny = 1e-300L;
        for (std::size_t i = 0;; ++i) {
            if (i + 1 == m && closed) {
                long double dx = static_cast<long double>(tail_d) - x;
                long double rp = 0.5L * (dx + std::sqrt(dx * dx - 4.0L * tail_c2));
                p -= static_cast<long double>(tail_c2) / rp;
            }
            if (p < 0) ++neg;
            if (i + 1 == m) break;
            if (p == 0) p = tiny;
            p = static_cast<long double>(a[i + 1]) - x - static_cast<long double>(e2[i]) / p;
        }
        return neg;
    }

    double upper() const {
        double u = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            double r = a[i];
            if (i > 0) r += std::sqrt(e2[i - 1]);
            if (i + 1 < a.size()) r += std::sqrt(e2[i]);
            u = std::max(u, r);
        }
        return u;
    }
};

Tridiag reflecting(const BirthDeathChain& c) {
    Tridiag t;
    const long m = c.q_max;
    t.a.resize(m + 1);
    t.e2.resize(m);
    for (long q = 0; q <= m; ++q) t.a[q] = c.birth[q] + c.death[q];
    for (long q = 0; q < m; ++q) t.e2[q] = c.birth[q] * c.death[q + 1];
    return t;
}

// smallest x with count(x) >= k+1, inside [lo, hi]
double bisect(const Tridiag& t, long k, double lo, double hi, double tol, double& width) {
    for (int it = 0; it < 400; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (t.count(mid) >= k + 1)
            hi = mid;
        else
            lo = mid;
        double w = hi - lo;
        if (w < tol && w < 1e-9 * std::max(std::fabs(hi), 1e-300)) break;
        if (w < 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(hi)) break;
    }
    width = hi - lo;
    return 0.5 * (lo + hi);
}

std::vector<double> sqrt_nu(const StateDistribution& nu) {
    std::vector<double> s(nu.probs.size());
    for (std::size_t q = 0; q < s.size(); ++q)
        s[q] = nu.log_probs.empty() ? std::sqrt(nu.probs[q]) : std::exp(0.5 * nu.log_probs[q]);
    return s;
}

}  // namespace

long sturm_count(const BirthDeathChain& chain, double x) { return reflecting(chain).count(x); }

SpectralResult spectral_gap(const BirthDeathChain& chain, const SpectralOptions& opt) {
    require(chain.q_max >= 1, "spectral gap needs at least two states");
    for (long q = 0; q < chain.q_max; ++q)
        if (!(chain.birth[q] > 0 && chain.death[q + 1] > 0)) fail("chain not irreducible on the window");
    SpectralResult res;
    const double Lam = chain.max_rate();
    const double tol = std::max(opt.abs_tol, 1e-12 * Lam);
    bool closure = opt.tail_closure && (chain.kind == ChainKind::mmn || chain.kind == ChainKind::mm1) &&
                   chain.q_max >= chain.n;

    Tridiag t;
    if (closure) {
        // beyond n the chain is homogeneous; a short window plus the exact tail suffices
        long w = std::min(chain.q_max, chain.n + 64);
        double nmu = static_cast<double>(chain.n) * chain.mu;
        t.a.resize(w + 1);
        t.e2.resize(w);
        for (long q = 0; q <= w; ++q) t.a[q] = chain.lambda + chain.death[q];
        for (long q = 0; q < w; ++q) t.e2[q] = chain.lambda * chain.death[q + 1];
        t.closed = true;
        t.tail_d = chain.lambda + nmu;
        t.tail_c2 = chain.lambda * nmu;
        RegimeSpec s;
        s.n = chain.n;
        s.mu = chain.mu;
        s.lambda = chain.lambda;
        s.excess = chain.excess;
        t.ess = s.sqrt_gap();
        res.q_max_used = w;
    } else {
        t = reflecting(chain);
        res.q_max_used = chain.q_max;
    }

    // smallest eigenvalue must be 0
    double z_tol = std::max(1e-9, 1e-12 * Lam);
    double probe = closure ? std::min(z_tol, 0.5 * t.ess) : z_tol;
    if (t.count(-z_tol) != 0 || t.count(probe) < 1)
        fail_convergence("smallest eigenvalue is not 0: broken chain");
    double w0 = 0.0;
    res.lambda0 = bisect(t, 0, -z_tol, probe, tol, w0);

    if (closure) {
        double edge = t.ess * (1.0 - 1e-8);
        if (t.count(edge) <= 1) {
            res.gap = t.ess;
            res.at_essential = true;
            res.residual = 0.0;
        } else {
            double w = 0.0;
            res.gap = bisect(t, 1, 0.0, edge, tol, w);
            res.residual = 0.5 * w;
        }
    } else {
        double hi = t.upper() * (1.0 + 1e-12) + 1e-300;
        if (t.count(hi) < 2) fail_convergence("fewer than two eigenvalues bracketed");
        double w = 0.0;
        res.gap = bisect(t, 1, 0.0, hi, tol, w);
        res.residual = 0.5 * w;
        if (!(w <= std::max(tol, 1e-8 * res.gap))) fail_convergence("bisection did not converge");
    }
    if (chain.kind == ChainKind::mm1 || chain.kind == ChainKind::mmn) {
        RegimeSpec s;
        s.n = chain.n;
        s.mu = chain.mu;
        s.lambda = chain.lambda;
        s.excess = chain.excess;
        res.beta_hat_lb = beta_hat_lower_bound(s);
    }
    return res;
}

Eigenpair second_eigenfunction(const BirthDeathChain& chain) {
    SpectralOptions o;
    o.tail_closure = false;
    double lam1 = spectral_gap(chain, o).gap;
    StateDistribution nu = stationary(chain);
    std::vector<double> s = sqrt_nu(nu);
    const long m = chain.q_max;
    Tridiag t = reflecting(chain);
    double mass = nu.window_mass();
    double mean = 0.0;
    for (long q = 0; q <= m; ++q) mean += q * nu.probs[q] / mass;
    std::vector<double> v(m + 1);
    for (long q = 0; q <= m; ++q) v[q] = (q - mean) * s[q];
    double snorm2 = 0.0;
    for (double x : s) snorm2 += x * x;

    auto deflate_normalize = [&](std::vector<double>& x) {
        double dot = 0.0;
        for (long q = 0; q <= m; ++q) dot += x[q] * s[q];
        for (long q = 0; q <= m; ++q) x[q] -= dot / snorm2 * s[q];
        double nn = 0.0;
        for (double y : x) nn += y * y;
        nn = std::sqrt(nn);
        for (double& y : x) y /= nn;
    };
    deflate_normalize(v);
    // inverse iteration, Thomas solve of (T - sigma) x = v
    double sigma = lam1 * (1.0 - 1e-13);
    std::vector<double> piv(m + 1), y(m + 1);
    for (int it = 0; it < 4; ++it) {
        piv[0] = t.a[0] - sigma;
        y[0] = v[0];
        for (long q = 1; q <= m; ++q) {
            double p = piv[q - 1];
            if (p == 0) p = 1e-300;
            double l = -std::sqrt(t.e2[q - 1]) / p;
            piv[q] = t.a[q] - sigma + l * std::sqrt(t.e2[q - 1]);
            y[q] = v[q] - l * y[q - 1];
        }
        std::vector<double> x(m + 1);
        x[m] = y[m] / (piv[m] == 0 ? 1e-300 : piv[m]);
        for (long q = m - 1; q >= 0; --q) {
            double p = piv[q] == 0 ? 1e-300 : piv[q];
            x[q] = (y[q] + std::sqrt(t.e2[q]) * x[q + 1]) / p;
        }
        deflate_normalize(x);
        v.swap(x);
    }
    Eigenpair ep;
    ep.value = lam1;
    ep.f.resize(m + 1);
    double last = 0.0;
    for (long q = 0; q <= m; ++q) {
        long double inv = nu.log_probs.empty() ? 1.0L / std::sqrt(static_cast<long double>(nu.probs[q]))
                                               : std::exp(-0.5L * static_cast<long double>(nu.log_probs[q]));
        double f = static_cast<double>(static_cast<long double>(v[q]) * inv);
        if (!std::isfinite(f)) f = last;
        ep.f[q] = f;
        last = f;
    }
    return ep;
}

double dirichlet_form(const BirthDeathChain& chain, const StateDistribution& nu, const std::vector<double>& f) {
    require(static_cast<long>(f.size()) == chain.size(), "f must be defined on {0..q_max}");
    KahanSum s;
    for (long q = 0; q < chain.q_max; ++q) {
        double d = f[q + 1] - f[q];
        if (d != 0.0) s.add(nu.probs[q] * chain.birth[q] * d * d);
    }
    return s.value();
}

double dirichlet_form(const BirthDeathChain& chain, const std::vector<double>& f) {
    return dirichlet_form(chain, stationary(chain), f);
}

double generator_form(const BirthDeathChain& chain, const StateDistribution& nu, const std::vector<double>& f) {
    std::vector<double> Lf = generator_apply(chain, f);
    KahanSum s;
    for (long q = 0; q <= chain.q_max; ++q) s.add(-nu.probs[q] * f[q] * Lf[q]);
    return s.value();
}

double variance(const StateDistribution& dist, const std::vector<double>& f) {
    require(f.size() == dist.probs.size(), "f must match the distribution window");
    double mass = dist.window_mass();
    KahanSum m1;
    for (std::size_t q = 0; q < f.size(); ++q) m1.add(dist.probs[q] * f[q]);
    double mean = m1.value() / mass;
    KahanSum v;
    for (std::size_t q = 0; q < f.size(); ++q) v.add(dist.probs[q] * sqr(f[q] - mean));
    return v.value() / mass;
}

double rayleigh(const BirthDeathChain& chain, const StateDistribution& nu, const std::vector<double>& f) {
    double var = variance(nu, f);
    if (!(var > 0)) fail("rayleigh quotient undefined for constant f");
    return dirichlet_form(chain, nu, f) / nu.window_mass() / var;
}

double rayleigh(const BirthDeathChain& chain, const std::vector<double>& f) {
    return rayleigh(chain, stationary(chain), f);
}

double beta_hat_lower_bound(const RegimeSpec& spec) {
    double a = spec.lambda / spec.mu;
    double nd = static_cast<double>(spec.n);
    return std::min(0.5 * std::sqrt(a / nd) * spec.mu, spec.sqrt_gap());
}

double van_doorn_fstar(const RegimeSpec& spec) {
    double best = INFINITY;
    double sl = std::sqrt(spec.lambda);
    for (long k = 1; k <= spec.n; ++k) {
        double kd = static_cast<double>(k) * spec.mu;
        double km1 = static_cast<double>(k - 1) * spec.mu;
        double v = sqr(sl - std::sqrt(kd)) + sl * (kd - km1) / (std::sqrt(kd) + std::sqrt(km1));
        best = std::min(best, v);
    }
    return best;
}

double van_doorn_bound(const RegimeSpec& spec) { return std::min(van_doorn_fstar(spec), spec.sqrt_gap()); }

}  // namespace bdmix
