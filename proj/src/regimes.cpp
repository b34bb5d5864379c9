#include "bdmix/regimes.hpp"

#include <algorithm>
#include <cmath>

#include "bdmix/poincare.hpp"
#include "bdmix/spectral.hpp"

namespace bdmix {

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::super_nds: return "super_nds";
        case Regime::super_hw: return "super_hw";
        case Regime::halfin_whitt: return "halfin_whitt";
        case Regime::sub_hw: return "sub_hw";
        case Regime::sub_hw_integer: return "sub_hw_integer";
        case Regime::mean_field: return "mean_field";
    }
    return "super_nds";
}

bool is_halfin_whitt(double alpha) { return std::fabs(alpha - 0.5) <= 1e-12; }

double c_n(double n, double alpha) {
    if (alpha >= 1.0) return 1.0;
    if (!(alpha > 0.5)) fail("C_n is defined for alpha > 1/2");
    if (n < 110) fail("C_n is valid for n >= 110");
    return 1.0 / (1.0 + 3.48 * (384.0 * std::pow(n, 2.0 - 4.0 * alpha) + 395.93 * std::pow(n, 3.0 - 6.0 * alpha)));
}

namespace {

double sub_gamma(double n, double excess) { return 1.0 - n / (excess * (excess + 1.0)); }

}  // namespace

double d_n(double n, double alpha, bool lambda_is_integer) {
    if (!(alpha > 0 && alpha < 0.5)) fail("D_n is defined for alpha in (0, 1/2)");
    double e = std::pow(n, 1.0 - alpha);
    double lam = n - e;
    if (lam < 3.0) fail("D_n needs lambda >= 3");
    double g = sub_gamma(n, e);
    if (lambda_is_integer) return g;
    return g / (1.0 + 24.0 * sqr(lam + 1.0) / (lam * lam));
}

double h_n(double n) {
    if (n < 110) fail("H_n is valid for n >= 110");
    SuperHwConstants k = super_hw_constants(n, 0.5);
    double g1 = std::min(k.g1, 384.0), g2 = std::min(k.g2, 395.93), g3 = std::min(k.g3, 3.48);
    return 1.0 / (4.0 * (1.0 + g3 * (g1 + g2)));
}

LnResult l_n(double n, double lambda, bool sqrt_z) {
    if (!(lambda > 0 && lambda < n)) fail("L_n needs 0 < lambda < n");
    double z = sqrt_z ? std::sqrt(n / lambda) : std::min(1.0 + 1.0 / std::log(n), 0.5 * (1.0 + n / lambda));
    double r = n / (lambda * z) - 1.0;
    if (!(r > 0 && z > 1)) fail("z outside (1, n/lambda)");
    double cp = 1.0 + 1.0 / r + 1.0 / (lambda * (z - 1.0) * r);
    return {1.0 / cp, z};
}

double zeta_spectral_bound(const RegimeSpec& spec) { return beta_hat_lower_bound(spec); }

MixingRateBound theorem1_rate(const RegimeSpec& spec) {
    if (spec.n < 2) fail("Theorem-1 rates need n >= 2");
    if (std::fabs(spec.mu - 1.0) > 1e-15) fail("Theorem-1 rates are stated for mu = 1");
    double nd = static_cast<double>(spec.n);
    double a = spec.alpha_given ? spec.alpha : 1.0 - std::log(spec.excess) / std::log(nd);
    MixingRateBound m;
    m.provenance = "theorem";
    if (a >= 1.0) {
        m.regime = Regime::super_nds;
        m.constant_name = "none";
        m.constant = 1.0;
        m.asymptote = 1.0;
        m.rate = spec.sqrt_gap();
    } else if (a > 0.5 && !is_halfin_whitt(a)) {
        m.regime = Regime::super_hw;
        m.constant_name = "C_n";
        m.asymptote = 1.0;
        if (spec.n >= 110) {
            m.constant = c_n(nd, a);
            m.rate = m.constant * spec.sqrt_gap();
        } else {
            m.rate = zeta_spectral_bound(spec);
            m.constant = m.rate / spec.sqrt_gap();
            m.provenance = "fallback:zeta (n < 110)";
        }
    } else if (is_halfin_whitt(a)) {
        m.regime = Regime::halfin_whitt;
        m.constant_name = "H_n";
        m.asymptote = 1.0 / 1781.0;
        if (spec.n < 110) fail("Halfin-Whitt rate needs n >= 110");
        m.constant = h_n(nd);
        m.rate = m.constant;
    } else {
        bool integer = spec.lambda_is_integer(1e-9);
        m.regime = integer ? Regime::sub_hw_integer : Regime::sub_hw;
        m.constant_name = integer ? "Dbar_n" : "D_n";
        m.asymptote = integer ? 1.0 : 1.0 / 25.0;
        if (spec.lambda >= 3.0) {
            double g = sub_gamma(nd, spec.excess);
            m.constant = integer ? g : g / (1.0 + 24.0 * sqr(spec.lambda + 1.0) / sqr(spec.lambda));
            m.rate = m.constant;
        } else {
            m.rate = zeta_spectral_bound(spec);
            m.constant = m.rate;
            m.provenance = "fallback:zeta (lambda < 3)";
        }
    }
    return m;
}

double mixing_time_bound(const RegimeSpec& spec, double chi0, double eps) {
    require(eps > 0 && chi0 >= 0, "eps must be positive and chi0 nonnegative");
    if (eps >= chi0) return 0.0;
    double nd = static_cast<double>(spec.n);
    double a = spec.alpha_given ? spec.alpha : 1.0 - std::log(spec.excess) / std::log(nd);
    double L = std::log(chi0 / eps);
    if (a >= 1.0) return 4.0 * std::pow(nd, 2.0 * a - 1.0) * L;
    if (is_halfin_whitt(a)) return L / h_n(nd);
    if (a > 0.5) return 4.0 / c_n(nd, a) * std::pow(nd, 2.0 * a - 1.0) * L;
    return L / theorem1_rate(spec).constant;
}

}  // namespace bdmix
