#pragma once

#include <vector>

#include "bdmix/bdchain.hpp"

namespace bdmix {

struct SpectralResult {
    double gap = 0.0;
    double beta_hat_lb = 0.0;
    long q_max_used = 0;
    double residual = 0.0;   // half-width of the final bisection bracket
    double lambda0 = 0.0;    // smallest eigenvalue, ~0
    bool at_essential = false;  // gap sits on the bottom of the continuous spectrum
};

struct SpectralOptions {
    // mm1/mmn: close the window with the exact geometric tail (infinite chain)
    bool tail_closure = true;
    double abs_tol = 1e-10;
};

SpectralResult spectral_gap(const BirthDeathChain& chain, const SpectralOptions& opt = {});

// number of eigenvalues of the reflecting window matrix strictly below x
long sturm_count(const BirthDeathChain& chain, double x);

// second eigenfunction of the reflecting window chain, original coordinates
struct Eigenpair {
    double value = 0.0;
    std::vector<double> f;
};
Eigenpair second_eigenfunction(const BirthDeathChain& chain);

double dirichlet_form(const BirthDeathChain& chain, const StateDistribution& nu, const std::vector<double>& f);
double dirichlet_form(const BirthDeathChain& chain, const std::vector<double>& f);
// <f, -L f>_nu, for the reversibility check
double generator_form(const BirthDeathChain& chain, const StateDistribution& nu, const std::vector<double>& f);

// variance under the window law (probs renormalized to the window)
double variance(const StateDistribution& dist, const std::vector<double>& f);
double rayleigh(const BirthDeathChain& chain, const StateDistribution& nu, const std::vector<double>& f);
double rayleigh(const BirthDeathChain& chain, const std::vector<double>& f);

double beta_hat_lower_bound(const RegimeSpec& spec);
double van_doorn_bound(const RegimeSpec& spec);
// min over 1<=k<=n of the finite-k van Doorn terms
double van_doorn_fstar(const RegimeSpec& spec);

}  // namespace bdmix
