#pragma once

#include <iosfwd>
#include <vector>

#include "bdmix/bdchain.hpp"

namespace bdmix {

// pi_t = pi0 e^{tL} by uniformization; lost Poisson mass goes to tail_mass
StateDistribution evolve(const BirthDeathChain& chain, const StateDistribution& pi0, double t, double tol = 1e-12);

// divergences treat tail_mass as one extra atom beyond the window
double chi_square(const StateDistribution& p, const StateDistribution& q);
double chi(const StateDistribution& p, const StateDistribution& q);
double tv_distance(const StateDistribution& p, const StateDistribution& q);

struct DecayRow {
    double t;
    double chi;
    double chi_square;
    double tv;
    double mass_deficit;
};

std::vector<DecayRow> decay_trace(const BirthDeathChain& chain, const StateDistribution& pi0,
                                  const std::vector<double>& t_grid, double tol = 1e-12);

void write_decay_csv(std::ostream& os, const std::vector<DecayRow>& rows);

}  // namespace bdmix
