#pragma once

#include <string>

#include "bdmix/bdchain.hpp"

namespace bdmix {

enum class Regime { super_nds, super_hw, halfin_whitt, sub_hw, sub_hw_integer, mean_field };

const char* regime_name(Regime r);

struct MixingRateBound {
    double rate = 0.0;
    Regime regime = Regime::super_nds;
    std::string constant_name;  // C_n, D_n, Dbar_n, H_n, L_n or none
    double constant = 1.0;
    double asymptote = 1.0;
    std::string provenance;     // theorem / fallback
};

double c_n(double n, double alpha);
double d_n(double n, double alpha, bool lambda_is_integer);
double h_n(double n);

struct LnResult {
    double rate;
    double z;
};
LnResult l_n(double n, double lambda, bool sqrt_z = false);

MixingRateBound theorem1_rate(const RegimeSpec& spec);
double zeta_spectral_bound(const RegimeSpec& spec);
double mixing_time_bound(const RegimeSpec& spec, double chi0, double eps);

bool is_halfin_whitt(double alpha);

}  // namespace bdmix
