#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bdmix/bdchain.hpp"

namespace bdmix {

enum class LyapunovTag { super_hw, sub_hw_integer, sub_hw_fractional, mean_field, mminf, custom };

const char* tag_name(LyapunovTag t);

// V kept in log form; log_ratio is analytic where the closed form allows it
struct LyapunovFunction {
    LyapunovTag tag = LyapunovTag::custom;
    long n = 0;
    double lambda = 0.0;
    double theta = 0.0;
    double zeta = 0.0;
    double z = 0.0;
    double center = 0.0;
    std::vector<double> table;  // custom values, indexed by q

    double log_value(long q) const;
    double value(long q) const { return std::exp(log_value(q)); }
    // log V(q+dir) - log V(q), dir = +1 or -1
    double log_ratio(long q, int dir) const;

    static LyapunovFunction super_hw(long n, double lambda);
    static LyapunovFunction sub_hw(long n, double lambda);
    static LyapunovFunction mean_field(long n, double lambda, double z);
    static LyapunovFunction mminf(double lambda, double mu);
    static LyapunovFunction custom(std::vector<double> values);
};

struct DriftCertificate {
    std::string regime;
    LyapunovFunction V;
    double gamma = 0.0;
    std::vector<long> K;     // sorted
    std::vector<double> b;   // b[i] at K[i]
    double slack = INFINITY;
    bool certified = false;
    long n = 0;
    double alpha = 0.0;

    double b_at(long q) const;
    bool in_K(long q) const;
    long K_lo() const { return K.empty() ? -1 : K.front(); }
    long K_hi() const { return K.empty() ? -1 : K.back(); }
    double B_max() const;
};

struct DriftReport {
    bool pass = false;
    double slack = 0.0;  // max of (LV + gamma V - b)/max(1, gamma V)
    long worst_state = -1;
};

DriftCertificate super_hw_certificate(const RegimeSpec& spec);
DriftCertificate sub_hw_certificate(const RegimeSpec& spec);
DriftCertificate mean_field_certificate(const RegimeSpec& spec, double z);
DriftCertificate mminf_certificate(double lambda, double mu);

DriftReport certify_drift(const BirthDeathChain& chain, const DriftCertificate& cert, double tol = 1e-9);
// fills cert.slack / cert.certified from certify_drift
void attach_report(DriftCertificate& cert, const DriftReport& rep);

struct ExtractedDrift {
    double gamma = 0.0;
    std::vector<long> K;
    std::vector<double> b;
};
ExtractedDrift extract_drift(const BirthDeathChain& chain, const LyapunovFunction& V, const std::vector<long>& K);

// closed-form b on K \ {n-1} for the super-HW certificate (n > 7)
double super_hw_b_inner(const RegimeSpec& spec);
double super_hw_b_knee(const RegimeSpec& spec);

void write_certificate_csv_header(std::ostream& os);
void write_certificate_csv_row(std::ostream& os, const DriftCertificate& cert);

}  // namespace bdmix
