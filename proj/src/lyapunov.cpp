#include "bdmix/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "bdmix/io.hpp"

namespace bdmix {

const char* tag_name(LyapunovTag t) {
    switch (t) {
        case LyapunovTag::super_hw: return "super_hw";
        case LyapunovTag::sub_hw_integer: return "sub_hw_integer";
        case LyapunovTag::sub_hw_fractional: return "sub_hw_fractional";
        case LyapunovTag::mean_field: return "mean_field";
        case LyapunovTag::mminf: return "mminf";
        case LyapunovTag::custom: return "custom";
    }
    return "custom";
}

//==============================================================================
// V
//==============================================================================

double LyapunovFunction::log_value(long q) const {
    switch (tag) {
        case LyapunovTag::super_hw:
            return theta * std::fabs(static_cast<double>(q - (n - 1)));
        case LyapunovTag::sub_hw_integer:
        case LyapunovTag::sub_hw_fractional: {
            double e = static_cast<double>(n) - lambda;
            if (q > n) return std::log(e) + theta * static_cast<double>(q - n);
            if (tag == LyapunovTag::sub_hw_fractional) {
                double fl = std::floor(lambda), r = lambda - fl;
                if (q == static_cast<long>(fl)) return std::log1p(r);
                if (q == static_cast<long>(fl) + 1) return std::log(2.0 - r);
            }
            double d = std::fabs(static_cast<double>(q) - lambda);
            return d == 0.0 ? -INFINITY : std::log(d);
        }
        case LyapunovTag::mean_field:
            return q >= n ? static_cast<double>(q - n) * std::log(z) : 0.0;
        case LyapunovTag::mminf: {
            double d = std::fabs(static_cast<double>(q) - center);
            return d == 0.0 ? -INFINITY : std::log(d);
        }
        case LyapunovTag::custom:
            require(q >= 0 && q < static_cast<long>(table.size()), "V undefined at state");
            return table[q] > 0 ? std::log(table[q]) : -INFINITY;
    }
    return 0.0;
}

double LyapunovFunction::log_ratio(long q, int dir) const {
    switch (tag) {
        case LyapunovTag::super_hw:
            if (dir > 0) return q >= n - 1 ? theta : -theta;
            return q >= n ? -theta : theta;
        case LyapunovTag::sub_hw_integer:
        case LyapunovTag::sub_hw_fractional:
            if (dir > 0 && q >= n) return theta;
            if (dir < 0 && q > n) return -theta;
            break;
        case LyapunovTag::mean_field:
            if (dir > 0) return q >= n ? std::log(z) : 0.0;
            return q > n ? -std::log(z) : 0.0;
        default:
            break;
    }
    return log_value(q + dir) - log_value(q);
}

LyapunovFunction LyapunovFunction::super_hw(long n, double lambda) {
    require(n >= 1 && lambda > 0 && lambda < static_cast<double>(n), "super-HW V needs 0 < lambda < n");
    LyapunovFunction v;
    v.tag = LyapunovTag::super_hw;
    v.n = n;
    v.lambda = lambda;
    v.theta = 0.5 * std::log1p((static_cast<double>(n) - lambda) / lambda);
    v.center = static_cast<double>(n - 1);
    return v;
}

LyapunovFunction LyapunovFunction::sub_hw(long n, double lambda) {
    require(lambda > 0 && lambda < static_cast<double>(n), "sub-HW V needs 0 < lambda < n");
    LyapunovFunction v;
    bool integer = std::fabs(lambda - std::round(lambda)) <= 1e-9;
    v.tag = integer ? LyapunovTag::sub_hw_integer : LyapunovTag::sub_hw_fractional;
    v.n = n;
    v.lambda = integer ? std::round(lambda) : lambda;
    double e = static_cast<double>(n) - v.lambda;
    v.theta = std::log1p(1.0 / e);
    v.zeta = std::exp(std::log(e) - v.theta * e);
    v.center = v.lambda;
    return v;
}

LyapunovFunction LyapunovFunction::mean_field(long n, double lambda, double z) {
    LyapunovFunction v;
    v.tag = LyapunovTag::mean_field;
    v.n = n;
    v.lambda = lambda;
    v.z = z;
    v.theta = std::log(z);
    return v;
}

LyapunovFunction LyapunovFunction::mminf(double lambda, double mu) {
    LyapunovFunction v;
    v.tag = LyapunovTag::mminf;
    v.lambda = lambda;
    v.center = lambda / mu;
    return v;
}

LyapunovFunction LyapunovFunction::custom(std::vector<double> values) {
    LyapunovFunction v;
    v.tag = LyapunovTag::custom;
    for (double x : values) require(x >= 0 && std::isfinite(x), "custom V must be finite and nonnegative");
    v.table = std::move(values);
    return v;
}

//==============================================================================
// certificate
//==============================================================================

double DriftCertificate::b_at(long q) const {
    auto it = std::lower_bound(K.begin(), K.end(), q);
    if (it == K.end() || *it != q) return 0.0;
    return b[it - K.begin()];
}

bool DriftCertificate::in_K(long q) const { return std::binary_search(K.begin(), K.end(), q); }

double DriftCertificate::B_max() const {
    double m = 0.0;
    for (double x : b) m = std::max(m, x);
    return m;
}

namespace {

void require_unit_mu(const RegimeSpec& spec) {
    require(std::fabs(spec.mu - 1.0) < 1e-15, "catalog certificates are stated for mu = 1; rescale time");
}

// L V(q) / V(q), V(q) > 0
double drift_ratio(const BirthDeathChain& c, const LyapunovFunction& V, long q) {
    double r = 0.0;
    if (c.birth[q] > 0) r += c.birth[q] * std::expm1(V.log_ratio(q, +1));
    if (q > 0 && c.death[q] > 0) r += c.death[q] * std::expm1(V.log_ratio(q, -1));
    return r;
}

// L V(q) when V(q) = 0
double drift_at_zero(const BirthDeathChain& c, const LyapunovFunction& V, long q) {
    double s = 0.0;
    if (c.birth[q] > 0) s += c.birth[q] * V.value(q + 1);
    if (q > 0 && c.death[q] > 0) s += c.death[q] * V.value(q - 1);
    return s;
}

}  // namespace

double super_hw_b_knee(const RegimeSpec& spec) {
    double e = spec.excess;  // n^(1-alpha)
    double na = static_cast<double>(spec.n) / e;  // n^alpha
    return e * (1.0 + 1.0 / (4.0 * (na - 1.0)));
}

double super_hw_b_inner(const RegimeSpec& spec) {
    double nd = static_cast<double>(spec.n);
    double e = spec.excess;
    double x = (e * e / nd) / (1.0 - e / nd);
    return x * std::exp(x);
}

DriftCertificate super_hw_certificate(const RegimeSpec& spec) {
    require_unit_mu(spec);
    if (!(spec.alpha > 0.5)) fail("super-HW certificate needs alpha > 1/2");
    if (spec.n < 2) fail("super-HW certificate needs n >= 2");
    DriftCertificate c;
    c.regime = "super_hw";
    c.n = spec.n;
    c.alpha = spec.alpha;
    c.V = LyapunovFunction::super_hw(spec.n, spec.lambda);
    long lo = std::max(0L, static_cast<long>(std::floor(2.0 * spec.lambda)) - spec.n);
    long hi = spec.n - 1;
    std::vector<long> K;
    for (long q = lo; q <= hi; ++q) K.push_back(q);
    if (spec.n > 7) {
        c.gamma = spec.sqrt_gap();
        double inner = super_hw_b_inner(spec);
        for (long q : K) {
            c.K.push_back(q);
            c.b.push_back(q == hi ? super_hw_b_knee(spec) : inner);
        }
    } else {
        BirthDeathChain ch = build_mmn(spec, spec.n + 16);
        ExtractedDrift ex = extract_drift(ch, c.V, K);
        c.gamma = ex.gamma;
        c.K = ex.K;
        c.b = ex.b;
    }
    return c;
}

DriftCertificate sub_hw_certificate(const RegimeSpec& spec) {
    require_unit_mu(spec);
    double nd = static_cast<double>(spec.n);
    double alpha_n = 1.0 - std::log(spec.excess) / std::log(nd);
    if (!(alpha_n > 0 && alpha_n < 0.5)) fail("sub-HW certificate needs alpha in (0, 1/2)");
    if (spec.lambda < 3.0) fail("sub-HW certificate needs lambda >= 3");
    DriftCertificate c;
    c.regime = "sub_hw";
    c.n = spec.n;
    c.alpha = alpha_n;
    c.V = LyapunovFunction::sub_hw(spec.n, spec.lambda);
    double e = nd - c.V.lambda;
    c.gamma = 1.0 - nd / (e * (e + 1.0));
    if (c.V.tag == LyapunovTag::sub_hw_integer) {
        c.regime = "sub_hw_integer";
        c.K = {static_cast<long>(c.V.lambda)};
        c.b = {2.0 * c.V.lambda};
    } else {
        c.regime = "sub_hw_fractional";
        long fl = static_cast<long>(std::floor(spec.lambda));
        if (fl + 2 >= spec.n) fail("sub-HW set K must lie below n");
        double B = static_cast<double>(fl + 1) + 2.0;
        c.K = {fl - 1, fl, fl + 1, fl + 2};
        c.b.assign(4, B);
    }
    return c;
}

DriftCertificate mean_field_certificate(const RegimeSpec& spec, double z) {
    require_unit_mu(spec);
    double nd = static_cast<double>(spec.n);
    if (!(z > 1.0 && z < nd / spec.lambda)) fail("z must lie in (1, n/lambda)");
    DriftCertificate c;
    c.regime = "mean_field";
    c.n = spec.n;
    c.alpha = spec.alpha;
    c.V = LyapunovFunction::mean_field(spec.n, spec.lambda, z);
    double zm1 = z - 1.0;
    c.gamma = spec.lambda * zm1 * (nd / (spec.lambda * z) - 1.0);
    double B = c.gamma + spec.lambda * zm1;
    for (long q = 0; q <= spec.n; ++q) {
        c.K.push_back(q);
        c.b.push_back(B);
    }
    return c;
}

DriftCertificate mminf_certificate(double lambda, double mu) {
    require(lambda > 0 && mu > 0, "lambda and mu must be positive");
    double c0 = lambda / mu;
    if (std::fabs(c0 - std::round(c0)) > 1e-9 || std::round(c0) < 1)
        fail("M/M/inf certificate needs lambda/mu to be a positive integer; the fractional case is an open conjecture");
    DriftCertificate c;
    c.regime = "mminf";
    c.V = LyapunovFunction::mminf(lambda, mu);
    c.V.center = std::round(c0);
    c.gamma = mu;
    c.K = {static_cast<long>(c.V.center)};
    // L V at the center: lambda*1 + (lambda/mu)*mu*1
    c.b = {lambda + c.V.center * mu};
    return c;
}

DriftReport certify_drift(const BirthDeathChain& chain, const DriftCertificate& cert, double tol) {
    DriftReport rep;
    rep.slack = -INFINITY;
    const double g = cert.gamma;
    for (long q = 0; q < chain.q_max; ++q) {
        double lv = cert.V.log_value(q);
        double bq = cert.b_at(q);
        double s;
        if (lv == -INFINITY) {
            s = drift_at_zero(chain, cert.V, q) - bq;
        } else {
            double r = drift_ratio(chain, cert.V, q);
            if (lv > 700.0) {
                s = (r + g) / std::max(g, 1e-300) - bq / g * std::exp(-lv);
            } else {
                double V = std::exp(lv);
                s = (V * (r + g) - bq) / std::max(1.0, g * V);
            }
        }
        if (s > rep.slack || rep.worst_state < 0) {
            rep.slack = s;
            rep.worst_state = q;
        }
    }
    rep.pass = rep.slack <= tol;
    return rep;
}

void attach_report(DriftCertificate& cert, const DriftReport& rep) {
    cert.slack = rep.slack;
    cert.certified = rep.pass;
}

ExtractedDrift extract_drift(const BirthDeathChain& chain, const LyapunovFunction& V, const std::vector<long>& K) {
    std::vector<long> Ks = K;
    std::sort(Ks.begin(), Ks.end());
    double g = INFINITY;
    for (long q = 0; q < chain.q_max; ++q) {
        if (std::binary_search(Ks.begin(), Ks.end(), q)) continue;
        if (V.log_value(q) == -INFINITY) fail("V must be positive off K (zero at state " + std::to_string(q) + ")");
        g = std::min(g, -drift_ratio(chain, V, q));
    }
    if (!(g > 0)) throw Error(ErrorKind::validity, "no negative drift outside K");
    ExtractedDrift ex;
    ex.gamma = g;
    for (long q : Ks) {
        if (q >= chain.q_max) continue;
        double lv = V.log_value(q);
        double need = lv == -INFINITY ? drift_at_zero(chain, V, q)
                                      : std::exp(lv) * (drift_ratio(chain, V, q) + g);
        if (need > 0) {
            ex.K.push_back(q);
            // nudge up so the certificate survives a tol = 1e-12 recheck
            ex.b.push_back(need * (1.0 + 1e-13));
        }
    }
    return ex;
}

void write_certificate_csv_header(std::ostream& os) { os << "regime,n,alpha,gamma,K_lo,K_hi,B_max,slack,pass\n"; }

void write_certificate_csv_row(std::ostream& os, const DriftCertificate& c) {
    os << c.regime << ',' << c.n << ',' << fmt17(c.alpha) << ',' << fmt17(c.gamma) << ',' << c.K_lo() << ','
       << c.K_hi() << ',' << fmt17(c.B_max()) << ',' << fmt17(c.slack) << ',' << fmt_bool(c.certified) << '\n';
}

}  // namespace bdmix
