#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bdmix/bdchain.hpp"
#include "bdmix/lyapunov.hpp"

namespace bdmix {

enum class LocalMethod { canonical_path, truncation, closed_form_super_hw };

const char* method_name(LocalMethod m);

struct LocalPoincareBound {
    double c_local = 0.0;
    LocalMethod method = LocalMethod::canonical_path;
    long K_lo = 0, K_hi = 0;
    std::vector<double> weight;  // b on K, optional
};

struct PoincareCertificate {
    double c_p = 0.0;
    double mixing_rate = 0.0;
    std::string provenance;  // singleton / stitch / constant_b / regime formula
    double gamma = 0.0;
    double tau_mass = 0.0;
    double c_local = 0.0;
};

// closed-form pieces of the weighted Poincare constant (super-HW)
struct SuperHwConstants {
    double A, s, E, L_K, U_K, Q_L, U1, g1, g2, g3;
};
SuperHwConstants super_hw_constants(double n, double alpha);

LocalPoincareBound canonical_path_constant(const BirthDeathChain& chain, long K_lo, long K_hi,
                                           const std::vector<double>& measure);
// measure = stationary law restricted to K
LocalPoincareBound canonical_path_constant(const BirthDeathChain& chain, long K_lo, long K_hi);

struct WeightedPoincare {
    LocalPoincareBound bound;  // c_local = C_b
    SuperHwConstants k;
    double tau_mass = 0.0;     // exact sum of b * nu_K
};
WeightedPoincare weighted_poincare_super_hw(const RegimeSpec& spec);

LocalPoincareBound truncation_local_bound(double outer_c_p, const BirthDeathChain& chain, long K_lo, long K_hi);

PoincareCertificate stitch(double gamma, double tau_mass, double c_b);
PoincareCertificate singleton_certificate(double gamma);
PoincareCertificate singleton_certificate(const DriftCertificate& cert);
PoincareCertificate constant_b_certificate(double gamma, double B, double c_l);

struct ProbeReport {
    bool pass = true;
    double worst = 0.0;  // max of Var - C * form, with Var scaled to 1
    std::string worst_probe;
    long n_checked = 0;
    double gap = 0.0;
    bool rate_ok = true;
};

// global check: Var_nu f <= C_P E(f,f), plus mixing_rate <= gap
ProbeReport verify_poincare(const BirthDeathChain& chain, const PoincareCertificate& cert, int n_tests,
                            std::uint64_t seed);
// local check on K: Var_m f <= C_L sum_{k,k+1 in K} m(k) birth(k) (df)^2
ProbeReport verify_local_poincare(const BirthDeathChain& chain, const LocalPoincareBound& lb,
                                  const std::vector<double>& measure, int n_tests, std::uint64_t seed);
// weighted check: Var_tau f <= (C_b / nu(K)) <f, -L f>_nu, tau normalized on K
ProbeReport verify_weighted_poincare(const RegimeSpec& spec, const WeightedPoincare& wp, int n_tests,
                                     std::uint64_t seed);

struct RoughlyUniform {
    double L_K = 0.0, U_K = 0.0;
    double min_scaled = 0.0, max_scaled = 0.0;  // min/max of nu_K(x) n^(1-alpha)
    long K_lo = 0, K_hi = 0;
    bool pass = false;
};
RoughlyUniform roughly_uniform_bounds(const RegimeSpec& spec);

// full regime pipelines
PoincareCertificate super_hw_pipeline(const RegimeSpec& spec, WeightedPoincare* detail = nullptr);
PoincareCertificate sub_hw_pipeline(const RegimeSpec& spec);
PoincareCertificate mean_field_pipeline(const RegimeSpec& spec, double z);

// super-HW K = {[floor(2 lambda) - n]^+ .. n-1}
void super_hw_K(const RegimeSpec& spec, long& lo, long& hi);

void write_poincare_csv_header(std::ostream& os);

}  // namespace bdmix
