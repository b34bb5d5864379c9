#include "bdmix/bdchain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "bdmix/io.hpp"

namespace bdmix {

namespace {

constexpr long kMaxTruncation = 100000000L;

long double log_sum_exp(const std::vector<long double>& v, long double extra = -INFINITY) {
    long double m = extra;
    for (long double x : v) m = std::max(m, x);
    if (m == -INFINITY) return m;
    long double s = (extra == -INFINITY) ? 0.0L : std::exp(extra - m);
    for (long double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace

//==============================================================================
// RegimeSpec
//==============================================================================

RegimeSpec RegimeSpec::from_alpha(long n, double alpha, double mu) {
    require(n >= 1, "n must be a positive integer");
    require(alpha > 0 && std::isfinite(alpha), "alpha must be a positive real");
    require(mu > 0, "mu must be positive");
    RegimeSpec s;
    s.n = n;
    s.alpha = alpha;
    s.mu = mu;
    double nd = static_cast<double>(n);
    s.excess = mu * std::pow(nd, 1.0 - alpha);
    s.lambda = mu * nd - s.excess;
    require(s.lambda > 0, "alpha gives a nonpositive arrival rate (n^(1-alpha) >= n)");
    s.epsilon = s.excess / (mu * nd);
    s.alpha_given = true;
    return s;
}

RegimeSpec RegimeSpec::from_lambda(long n, double lambda, double mu) {
    require(n >= 1, "n must be a positive integer");
    require(lambda > 0 && std::isfinite(lambda), "lambda must be positive");
    require(mu > 0, "mu must be positive");
    double nd = static_cast<double>(n);
    if (lambda >= nd * mu) fail("unstable: lambda >= n*mu");
    RegimeSpec s;
    s.n = n;
    s.lambda = lambda;
    s.mu = mu;
    s.excess = nd * mu - lambda;
    s.epsilon = s.excess / (nd * mu);
    s.alpha = (n >= 2) ? 1.0 - std::log(s.excess / mu) / std::log(nd)
                       : std::numeric_limits<double>::quiet_NaN();
    s.alpha_given = false;
    return s;
}

double RegimeSpec::sqrt_gap() const {
    double nm = static_cast<double>(n) * mu;
    return sqr(excess / (std::sqrt(nm) + std::sqrt(lambda)));
}

bool RegimeSpec::lambda_is_integer(double tol) const {
    return std::fabs(lambda - std::round(lambda)) <= tol;
}

const char* kind_name(ChainKind k) {
    switch (k) {
        case ChainKind::mm1: return "mm1";
        case ChainKind::mmn: return "mmn";
        case ChainKind::mminf: return "mminf";
        case ChainKind::custom: return "custom";
    }
    return "custom";
}

double BirthDeathChain::max_rate() const {
    double m = 0.0;
    for (long q = 0; q <= q_max; ++q) m = std::max(m, birth[q] + death[q]);
    return m;
}

StateDistribution StateDistribution::dirac(long q_max, long q) {
    require(q >= 0 && q <= q_max, "dirac state outside the window");
    StateDistribution d;
    d.probs.assign(q_max + 1, 0.0);
    d.probs[q] = 1.0;
    return d;
}

StateDistribution StateDistribution::uniform(long q_max, long lo, long hi) {
    require(lo >= 0 && lo <= hi && hi <= q_max, "uniform range outside the window");
    StateDistribution d;
    d.probs.assign(q_max + 1, 0.0);
    double w = 1.0 / static_cast<double>(hi - lo + 1);
    for (long q = lo; q <= hi; ++q) d.probs[q] = w;
    return d;
}

//==============================================================================
// construction
//==============================================================================

BirthDeathChain build_mmn(const RegimeSpec& spec, long q_max) {
    require(spec.n >= 1 && spec.mu > 0 && spec.lambda > 0, "invalid regime spec");
    double nmu = static_cast<double>(spec.n) * spec.mu;
    if (spec.lambda >= nmu) fail("unstable: lambda >= n*mu");
    if (q_max < spec.n) fail("q_max < n would cut the service knee");
    if (q_max > kMaxTruncation) fail("q_max exceeds the 1e8 state guard");
    BirthDeathChain c;
    c.q_max = q_max;
    c.kind = spec.n == 1 ? ChainKind::mm1 : ChainKind::mmn;
    c.n = spec.n;
    c.lambda = spec.lambda;
    c.mu = spec.mu;
    c.excess = spec.excess;
    c.birth.assign(q_max + 1, spec.lambda);
    c.birth[q_max] = 0.0;
    c.death.resize(q_max + 1);
    for (long q = 0; q <= q_max; ++q)
        c.death[q] = spec.mu * static_cast<double>(std::min(q, spec.n));
    return c;
}

BirthDeathChain build_mminf(double lambda, double mu, long q_max) {
    require(lambda > 0 && mu > 0, "lambda and mu must be positive");
    require(q_max >= 1 && q_max <= kMaxTruncation, "q_max out of range");
    double a = lambda / mu;
    if (static_cast<double>(q_max) < 4.0 * a) fail("q_max must be at least 4*lambda/mu");
    if (poisson_log_tail(a, q_max) > std::log(1e-12))
        fail("q_max too small: Poisson mass beyond q_max exceeds 1e-12");
    BirthDeathChain c;
    c.q_max = q_max;
    c.kind = ChainKind::mminf;
    c.lambda = lambda;
    c.mu = mu;
    c.birth.assign(q_max + 1, lambda);
    c.birth[q_max] = 0.0;
    c.death.resize(q_max + 1);
    for (long q = 0; q <= q_max; ++q) c.death[q] = mu * static_cast<double>(q);
    return c;
}

BirthDeathChain build_custom(std::vector<double> birth, std::vector<double> death) {
    require(!birth.empty() && birth.size() == death.size(), "birth/death profiles must match");
    long q_max = static_cast<long>(birth.size()) - 1;
    require(death[0] == 0.0, "death(0) must be 0");
    for (long q = 0; q < q_max; ++q)
        require(birth[q] > 0.0 && death[q + 1] > 0.0, "chain must be irreducible on the window");
    BirthDeathChain c;
    c.q_max = q_max;
    c.kind = ChainKind::custom;
    c.birth = std::move(birth);
    c.death = std::move(death);
    c.birth[q_max] = 0.0;
    return c;
}

//==============================================================================
// stationary law
//==============================================================================

double poisson_log_tail(double a, long m) {
    require(a > 0, "Poisson mean must be positive");
    if (m < 0) return 0.0;
    long double la = std::log(static_cast<long double>(a));
    auto logpmf = [&](long k) {
        return -static_cast<long double>(a) + k * la - std::lgamma(static_cast<long double>(k) + 1.0L);
    };
    if (static_cast<double>(m) < a) {
        // complement of the cdf; tail is not small here
        long double s = 0.0L;
        for (long k = 0; k <= m; ++k) s += std::exp(logpmf(k));
        long double t = 1.0L - s;
        return t > 0 ? static_cast<double>(std::log(t)) : -INFINITY;
    }
    long double first = logpmf(m + 1);
    long double s = 1.0L, term = 1.0L;
    for (long k = m + 2;; ++k) {
        term *= static_cast<long double>(a) / static_cast<long double>(k);
        s += term;
        if (term < 1e-22L * s) break;
    }
    return static_cast<double>(first + std::log(s));
}

double mmn_log_nu_at_n(const RegimeSpec& spec) {
    double a = spec.lambda / spec.mu;
    long n = spec.n;
    std::vector<long double> terms;
    terms.reserve(n + 1);
    long double la = std::log(static_cast<long double>(a));
    for (long k = 0; k < n; ++k) terms.push_back(k * la - std::lgamma(static_cast<long double>(k) + 1.0L));
    long double top = n * la - std::lgamma(static_cast<long double>(n) + 1.0L);
    // 1/(1-rho) = n mu / excess
    long double geo = std::log(static_cast<long double>(n) * spec.mu / spec.excess);
    long double log_nu0 = -log_sum_exp(terms, top + geo);
    return static_cast<double>(log_nu0 + top);
}

StateDistribution stationary(const BirthDeathChain& chain) {
    const long m = chain.q_max;
    std::vector<long double> L(m + 1);
    L[0] = 0.0L;
    for (long q = 0; q < m; ++q) {
        if (!(chain.birth[q] > 0.0 && chain.death[q + 1] > 0.0)) fail("chain not irreducible on the window");
        L[q + 1] = L[q] + std::log(static_cast<long double>(chain.birth[q])) -
                   std::log(static_cast<long double>(chain.death[q + 1]));
    }
    long double tail_log = -INFINITY;
    double ratio = 0.0;
    if (chain.kind == ChainKind::mmn || chain.kind == ChainKind::mm1) {
        // geometric tail nu(m) * rho/(1-rho)
        tail_log = L[m] + std::log(static_cast<long double>(chain.lambda) / chain.excess);
        ratio = chain.lambda / (static_cast<double>(chain.n) * chain.mu);
    } else if (chain.kind == ChainKind::mminf) {
        long double a = static_cast<long double>(chain.lambda) / chain.mu;
        long double term = 0.0L, s = 0.0L;
        long double lterm = L[m];
        for (long k = m + 1;; ++k) {
            lterm += std::log(a) - std::log(static_cast<long double>(k));
            term = std::exp(lterm - L[m]);
            s += term;
            if (term < 1e-25L * s || k > m + 100000) break;
        }
        tail_log = L[m] + std::log(s);
    }
    long double logZ = log_sum_exp(L, tail_log);
    StateDistribution d;
    d.probs.resize(m + 1);
    d.log_probs.resize(m + 1);
    for (long q = 0; q <= m; ++q) {
        long double lp = L[q] - logZ;
        d.log_probs[q] = static_cast<double>(lp);
        d.probs[q] = static_cast<double>(std::exp(lp));
    }
    d.tail_mass = tail_log == -INFINITY ? 0.0 : static_cast<double>(std::exp(tail_log - logZ));
    d.tail_ratio = ratio;
    return d;
}

std::vector<double> generator_apply(const BirthDeathChain& chain, const std::vector<double>& f) {
    require(static_cast<long>(f.size()) == chain.size(), "f must be defined on {0..q_max}");
    const long m = chain.q_max;
    std::vector<double> out(m + 1);
    for (long q = 0; q <= m; ++q) {
        double v = 0.0;
        if (q < m) v += chain.birth[q] * (f[q + 1] - f[q]);
        if (q > 0) v += chain.death[q] * (f[q - 1] - f[q]);
        out[q] = v;
    }
    return out;
}

//==============================================================================
// truncation
//==============================================================================

long choose_truncation(const RegimeSpec& spec, double mass_tol) {
    if (!(mass_tol > 0 && mass_tol <= 1e-6)) fail("mass_tol must lie in (0, 1e-6]");
    double nmu = static_cast<double>(spec.n) * spec.mu;
    if (!(spec.lambda > 0 && spec.lambda < nmu)) fail("unstable: lambda >= n*mu");
    double log_rho = std::log1p(-spec.excess / nmu);
    double R = std::log(mass_tol) - mmn_log_nu_at_n(spec) - std::log(spec.lambda / spec.excess);
    double k_real = R / log_rho;
    double k = k_real < 0 ? 0.0 : std::floor(k_real) + 1.0;
    double m = static_cast<double>(spec.n) + k;
    m = std::max(m, static_cast<double>(spec.n + 10));
    if (m > static_cast<double>(kMaxTruncation)) fail("truncation level would exceed 1e8 states");
    return static_cast<long>(m);
}

long choose_truncation_mminf(double lambda, double mu, double mass_tol) {
    if (!(mass_tol > 0 && mass_tol <= 1e-6)) fail("mass_tol must lie in (0, 1e-6]");
    double a = lambda / mu;
    long m = static_cast<long>(std::ceil(4.0 * a));
    double lt = std::log(mass_tol);
    while (poisson_log_tail(a, m) >= lt) {
        ++m;
        if (m > kMaxTruncation) fail("truncation level would exceed 1e8 states");
    }
    return std::max(m, 1L);
}

void write_stationary_csv(std::ostream& os, const StateDistribution& dist) {
    os << "q,prob,log_prob\n";
    for (long q = 0; q <= dist.q_max(); ++q) {
        double lp = dist.log_probs.empty() ? std::log(dist.probs[q]) : dist.log_probs[q];
        os << q << ',' << fmt17(dist.probs[q]) << ',' << fmt17(lp) << '\n';
    }
}

}  // namespace bdmix
