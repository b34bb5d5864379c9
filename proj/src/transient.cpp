#include "bdmix/transient.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "bdmix/io.hpp"

namespace bdmix {

namespace {

constexpr double kCostGuard = 1e7;

// log Poisson(a) pmf at its mode floor(a), stable for huge a
double log_pmf_at_mode(double a, long m) {
    if (m < 50) return -a + m * std::log(a) - std::lgamma(static_cast<double>(m) + 1.0);
    double md = static_cast<double>(m);
    double f = a - md;
    double corr = 1.0 / (12.0 * md) - 1.0 / (360.0 * md * md * md) + 1.0 / (1260.0 * std::pow(md, 5));
    return -f + md * std::log1p(f / md) - 0.5 * std::log(2.0 * std::numbers::pi * md) - corr;
}

struct PoissonWindow {
    long left = 0;
    std::vector<double> w;  // weights for k = left .. left+w.size()-1
    double total = 0.0;
};

PoissonWindow poisson_window(double a, double tol) {
    long m = static_cast<long>(std::floor(a));
    double lwm = log_pmf_at_mode(a, m);
    std::vector<double> right{1.0};
    double cut = 0.25 * tol;
    // right side
    for (long k = m;; ++k) {
        double wk = right.back();
        double r = a / static_cast<double>(k + 1);
        if (r < 1.0) {
            double bound = std::exp(lwm) * wk * r / (1.0 - r);
            if (bound < cut) break;
        }
        right.push_back(wk * r);
    }
    std::vector<double> left;
    long L = m;
    double wk = 1.0;
    while (L > 0) {
        double r = static_cast<double>(L) / a;
        double bound = std::exp(lwm) * wk * r / (1.0 - r);
        if (r < 1.0 && bound < cut) break;
        wk *= r;
        left.push_back(wk);
        --L;
    }
    PoissonWindow pw;
    pw.left = L;
    pw.w.reserve(left.size() + right.size());
    for (auto it = left.rbegin(); it != left.rend(); ++it) pw.w.push_back(*it);
    pw.w.insert(pw.w.end(), right.begin(), right.end());
    double scale = std::exp(lwm);
    KahanSum s;
    for (double& x : pw.w) {
        x *= scale;
        s.add(x);
    }
    pw.total = s.value();
    return pw;
}

}  // namespace

StateDistribution evolve(const BirthDeathChain& chain, const StateDistribution& pi0, double t, double tol) {
    if (!(tol > 0 && tol <= 1e-6)) fail("tol must lie in (0, 1e-6]");
    if (!(t >= 0) || !std::isfinite(t)) fail("t must be a nonnegative real");
    if (pi0.q_max() != chain.q_max) fail("pi0 must be supported on {0..q_max}");
    if (t == 0.0) return pi0;
    const long m = chain.q_max;
    double Lam = chain.max_rate();
    if (Lam == 0.0) return pi0;
    double a = Lam * t;
    if (a > kCostGuard)
        fail("t*Lambda = " + fmt17(a) + " exceeds 1e7; use a larger tol or split the horizon into checkpointed steps");

    std::vector<double> up(m + 1), down(m + 1), stay(m + 1);
    for (long q = 0; q <= m; ++q) {
        up[q] = chain.birth[q] / Lam;
        down[q] = chain.death[q] / Lam;
        stay[q] = 1.0 - up[q] - down[q];
    }
    PoissonWindow pw = poisson_window(a, tol);
    long R = pw.left + static_cast<long>(pw.w.size()) - 1;

    std::vector<double> v = pi0.probs, nxt(m + 1);
    std::vector<KahanSum> acc(m + 1);
    for (long k = 0; k <= R; ++k) {
        if (k >= pw.left) {
            double wk = pw.w[k - pw.left];
            for (long q = 0; q <= m; ++q) acc[q].add(wk * v[q]);
        }
        if (k == R) break;
        for (long q = 0; q <= m; ++q) {
            double x = v[q] * stay[q];
            if (q > 0) x += v[q - 1] * up[q - 1];
            if (q < m) x += v[q + 1] * down[q + 1];
            nxt[q] = x;
        }
        v.swap(nxt);
    }
    StateDistribution out;
    out.probs.resize(m + 1);
    for (long q = 0; q <= m; ++q) out.probs[q] = std::max(0.0, acc[q].value());
    double win_in = pi0.window_mass();
    out.tail_mass = pi0.tail_mass + std::max(0.0, (1.0 - pw.total) * win_in);
    return out;
}

double chi_square(const StateDistribution& p, const StateDistribution& q) {
    if (p.probs.size() != q.probs.size()) fail("chi_square needs a common index window");
    KahanSum s;
    for (std::size_t x = 0; x < p.probs.size(); ++x) {
        double px = p.probs[x], qx = q.probs[x];
        if (qx <= 0.0) {
            bool qlog = !q.log_probs.empty() && q.log_probs[x] > -INFINITY;
            if (px > 0.0 && !qlog)
                throw Error(ErrorKind::validity,
                            "absolute continuity violated at state " + std::to_string(x));
            if (px == 0.0) continue;
        }
        double d = px - qx;
        if (d == 0.0) continue;
        if (qx < 1e-300 && !q.log_probs.empty())
            s.add(std::exp(2.0 * std::log(std::fabs(d)) - q.log_probs[x]));
        else
            s.add(d * d / qx);
    }
    if (q.tail_mass > 0.0) s.add(sqr(p.tail_mass - q.tail_mass) / q.tail_mass);
    return std::max(0.0, s.value());
}

double chi(const StateDistribution& p, const StateDistribution& q) { return std::sqrt(chi_square(p, q)); }

double tv_distance(const StateDistribution& p, const StateDistribution& q) {
    if (p.probs.size() != q.probs.size()) fail("tv_distance needs a common index window");
    KahanSum s;
    for (std::size_t x = 0; x < p.probs.size(); ++x) s.add(std::fabs(p.probs[x] - q.probs[x]));
    s.add(std::fabs(p.tail_mass - q.tail_mass));
    return std::min(1.0, 0.5 * s.value());
}

std::vector<DecayRow> decay_trace(const BirthDeathChain& chain, const StateDistribution& pi0,
                                  const std::vector<double>& t_grid, double tol) {
    std::vector<DecayRow> rows;
    if (t_grid.empty()) return rows;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] >= 0)) fail("t_grid must be nonnegative");
        if (i && t_grid[i] < t_grid[i - 1]) fail("t_grid must be ascending");
    }
    StateDistribution nu = stationary(chain);
    StateDistribution cur = pi0;
    double t_cur = 0.0;
    for (double t : t_grid) {
        cur = evolve(chain, cur, t - t_cur, tol);
        t_cur = t;
        double c2 = chi_square(cur, nu);
        rows.push_back({t, std::sqrt(c2), c2, tv_distance(cur, nu), cur.tail_mass});
    }
    return rows;
}

void write_decay_csv(std::ostream& os, const std::vector<DecayRow>& rows) {
    os << "t,chi,chi_square,tv,mass_deficit\n";
    for (const auto& r : rows)
        os << fmt17(r.t) << ',' << fmt17(r.chi) << ',' << fmt17(r.chi_square) << ',' << fmt17(r.tv) << ','
           << fmt17(r.mass_deficit) << '\n';
}

}  // namespace bdmix
