#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bdmix/bdchain.hpp"
#include "bdmix/io.hpp"
#include "bdmix/lyapunov.hpp"
#include "bdmix/poincare.hpp"
#include "bdmix/regimes.hpp"
#include "bdmix/spectral.hpp"
#include "bdmix/stats.hpp"
#include "bdmix/transient.hpp"

using namespace bdmix;
using json = nlohmann::ordered_json;

namespace {

const char* kVersion = "0.1.0";

struct Opts {
    long n = 0;
    double alpha = NAN;
    double lambda = NAN;
    double mu = 1.0;
    long qmax = 0;
    double mass_tol = 1e-12;
    double tol = 1e-12;
    std::string t_grid = "0:10:1";
    std::string init = "dirac:0";
    double delta = 1.0;
    std::uint64_t seed = 1;
    std::string format = "csv";
    std::string out;
    std::string model = "mmn";
    double z = NAN;
    double kappa = 1.0;
    int probes = 200;
    bool mean_field = false;
    // sweep
    bool table1 = false;
    std::string ns = "110,500,2000";
    std::string alphas = "0.25,0.5,0.75,1,2";
    int jobs = 1;
};

template <class T>
std::vector<T> split_list(const std::string& s) {
    std::vector<T> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        std::size_t pos = 0;
        double x = 0;
        try {
            x = std::stod(tok, &pos);
        } catch (...) {
            fail("bad list entry: " + tok);
        }
        if (pos != tok.size()) fail("bad list entry: " + tok);
        v.push_back(static_cast<T>(x));
    }
    if (v.empty()) fail("empty list: " + s);
    return v;
}

std::vector<double> parse_grid(const std::string& s) {
    double lo, hi, step;
    char c1, c2;
    std::stringstream ss(s);
    if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !ss.eof())
        fail("--t-grid expects lo:hi:step");
    if (!(step > 0) || hi < lo || lo < 0) fail("--t-grid needs 0 <= lo <= hi and step > 0");
    long m = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    if (m > 1000000) fail("--t-grid has too many points");
    std::vector<double> g;
    for (long k = 0; k <= m; ++k) g.push_back(lo + static_cast<double>(k) * step);
    return g;
}

StateDistribution parse_init(const std::string& s, long q_max) {
    auto colon = s.find(':');
    if (colon == std::string::npos) fail("--init expects dirac:<q> or uniform:<lo>,<hi>");
    std::string kind = s.substr(0, colon), rest = s.substr(colon + 1);
    if (kind == "dirac") {
        auto v = split_list<long>(rest);
        if (v.size() != 1) fail("--init dirac:<q>");
        if (v[0] < 0 || v[0] > q_max) fail("--init state outside the truncation window");
        return StateDistribution::dirac(q_max, v[0]);
    }
    if (kind == "uniform") {
        auto v = split_list<long>(rest);
        if (v.size() != 2 || v[0] < 0 || v[1] < v[0] || v[1] > q_max) fail("--init uniform:<lo>,<hi> inside the window");
        return StateDistribution::uniform(q_max, v[0], v[1]);
    }
    fail("unknown --init kind: " + kind);
}

RegimeSpec make_spec(const Opts& o) {
    bool has_a = !std::isnan(o.alpha), has_l = !std::isnan(o.lambda);
    if (has_a && has_l) fail("--alpha and --lambda are mutually exclusive");
    if (o.n < 1) fail("--n must be >= 1");
    if (has_l) return RegimeSpec::from_lambda(o.n, o.lambda, o.mu);
    if (has_a) return RegimeSpec::from_alpha(o.n, o.alpha, o.mu);
    fail("one of --alpha or --lambda is required");
}

BirthDeathChain make_chain(const Opts& o, RegimeSpec* spec_out) {
    if (o.model == "mminf") {
        if (std::isnan(o.lambda)) fail("mminf needs --lambda");
        long q = o.qmax > 0 ? o.qmax : choose_truncation_mminf(o.lambda, o.mu, o.mass_tol);
        return build_mminf(o.lambda, o.mu, q);
    }
    if (o.model != "mmn") fail("--model must be mmn or mminf");
    RegimeSpec s = make_spec(o);
    if (spec_out) *spec_out = s;
    long q = o.qmax > 0 ? o.qmax : choose_truncation(s, o.mass_tol);
    return build_mmn(s, q);
}

// cells that parse as numbers or booleans become typed json values
json cell_value(const std::string& c) {
    if (c == "true") return true;
    if (c == "false") return false;
    if (c == "nan" || c == "inf" || c == "-inf") return c;
    if (!c.empty()) {
        char* end = nullptr;
        double x = std::strtod(c.c_str(), &end);
        if (end && *end == '\0') {
            if (c.find_first_of(".eE") == std::string::npos) return static_cast<long long>(x);
            return x;
        }
    }
    return c;
}

Table table_from_csv(const std::string& csv) {
    Table t;
    std::stringstream ss(csv);
    std::string line;
    bool first = true;
    while (std::getline(ss, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (first)
            t.header = cells;
        else
            t.add(cells);
        first = false;
    }
    return t;
}

json meta_record(const std::string& cmd, const Opts& o, const std::map<std::string, std::string>& flags) {
    json m;
    m["version"] = kVersion;
    m["command"] = cmd;
    m["seed"] = o.seed;
    json f = json::object();
    for (const auto& [k, v] : flags) f[k] = v;
    m["flags"] = f;
    return m;
}

void emit(const std::string& cmd, const Opts& o, const std::map<std::string, std::string>& flags,
          const std::string& csv) {
    std::string text;
    if (o.format == "csv") {
        text = csv;
    } else {
        Table t = table_from_csv(csv);
        json doc;
        doc["meta"] = meta_record(cmd, o, flags);
        json rows = json::array();
        for (const auto& r : t.rows) {
            json rec = json::object();
            for (std::size_t i = 0; i < t.header.size() && i < r.size(); ++i) rec[t.header[i]] = cell_value(r[i]);
            rows.push_back(rec);
        }
        doc["rows"] = rows;
        text = doc.dump(2) + "\n";
    }
    if (o.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(o.out, std::ios::binary);
        if (!f) fail("cannot open --out path: " + o.out);
        f << text;
    }
}

int cmd_stationary(const Opts& o, std::ostream& os) {
    BirthDeathChain ch = make_chain(o, nullptr);
    StateDistribution nu = stationary(ch);
    write_stationary_csv(os, nu);
    return 0;
}

int cmd_transient(const Opts& o, std::ostream& os) {
    BirthDeathChain ch = make_chain(o, nullptr);
    StateDistribution nu = stationary(ch);
    StateDistribution p0 = parse_init(o.init, ch.q_max);
    auto rows = decay_trace(ch, p0, parse_grid(o.t_grid), o.tol);
    write_decay_csv(os, rows);
    return 0;
}

int cmd_gap(const Opts& o, std::ostream& os) {
    RegimeSpec s;
    BirthDeathChain ch = make_chain(o, &s);
    SpectralResult r = spectral_gap(ch);
    os << "model,n,lambda,mu,q_max,gap,half_width,at_essential,beta_hat_lb\n";
    os << kind_name(ch.kind) << ',' << ch.n << ',' << fmt17(ch.lambda) << ',' << fmt17(ch.mu) << ',' << r.q_max_used
       << ',' << fmt17(r.gap) << ',' << fmt17(r.residual) << ',' << fmt_bool(r.at_essential) << ','
       << fmt17(r.beta_hat_lb) << '\n';
    return 0;
}

DriftCertificate catalog_certificate(const Opts& o, const RegimeSpec& s) {
    if (o.mean_field) {
        double z = std::isnan(o.z) ? 0.5 * (1.0 + static_cast<double>(s.n) / s.lambda) : o.z;
        return mean_field_certificate(s, z);
    }
    double nd = static_cast<double>(s.n);
    double a = s.alpha_given ? s.alpha : 1.0 - std::log(s.excess) / std::log(nd);
    if (a > 0.5 || is_halfin_whitt(a)) return super_hw_certificate(s);
    return sub_hw_certificate(s);
}

int cmd_drift(const Opts& o, std::ostream& os) {
    DriftCertificate c;
    BirthDeathChain ch;
    if (o.model == "mminf") {
        ch = make_chain(o, nullptr);
        c = mminf_certificate(o.lambda, o.mu);
    } else {
        RegimeSpec s = make_spec(o);
        c = catalog_certificate(o, s);
        long need = std::max<long>(c.K_hi() + 2, choose_truncation(s, o.mass_tol));
        ch = build_mmn(s, o.qmax > 0 ? o.qmax : need);
    }
    DriftReport rep = certify_drift(ch, c, 1e-9);
    attach_report(c, rep);
    write_certificate_csv_header(os);
    write_certificate_csv_row(os, c);
    return rep.pass ? 0 : 3;
}

int cmd_certify(const Opts& o, std::ostream& os) {
    BirthDeathChain ch;
    PoincareCertificate pc;
    long n = 0;
    double alpha = NAN;
    if (o.model == "mminf") {
        ch = make_chain(o, nullptr);
        pc = singleton_certificate(mminf_certificate(o.lambda, o.mu));
    } else {
        RegimeSpec s;
        ch = make_chain(o, &s);
        n = s.n;
        alpha = s.alpha;
        if (o.mean_field) {
            double z = std::isnan(o.z) ? 0.5 * (1.0 + static_cast<double>(s.n) / s.lambda) : o.z;
            pc = mean_field_pipeline(s, z);
        } else if (s.n == 1) {
            pc = singleton_certificate(s.sqrt_gap());
        } else {
            double a = s.alpha_given ? s.alpha : 1.0 - std::log(s.excess) / std::log(static_cast<double>(s.n));
            if (is_halfin_whitt(a)) {
                double h = theorem1_rate(s).rate;
                pc.c_p = 1.0 / h;
                pc.mixing_rate = h;
                pc.provenance = "h_n";
            } else if (a > 0.5)
                pc = super_hw_pipeline(s);
            else
                pc = sub_hw_pipeline(s);
        }
    }
    ProbeReport pr = verify_poincare(ch, pc, o.probes, o.seed);
    bool valid = pr.pass && pr.rate_ok;
    write_poincare_csv_header(os);
    os << pc.provenance << ',' << n << ',' << fmt17(alpha) << ',' << fmt17(pc.c_p) << ',' << fmt17(pc.mixing_rate)
       << ',' << fmt17(pr.gap) << ',' << fmt_bool(valid) << '\n';
    return valid ? 0 : 3;
}

int cmd_bounds(const Opts& o, std::ostream& os) {
    RegimeSpec s = make_spec(o);
    long q = o.qmax > 0 ? o.qmax : choose_truncation(s, std::min(o.mass_tol, 1e-13));
    BirthDeathChain ch = build_mmn(s, q);
    StateDistribution nu = stationary(ch);
    StateDistribution p0 = parse_init(o.init, ch.q_max);
    double c0 = chi(p0, nu);
    bool in_range = in_validity_range(s);
    double mean_nu = moment(nu, 1);
    std::vector<BoundRow> rows;
    auto add = [&](double t, const std::string& name, double bound, double num, Direction d) {
        bool ok = d == Direction::upper ? num <= bound : num >= bound;
        rows.push_back({s.n, s.alpha, t, name, bound, num, d, ok, in_range});
    };
    if (in_range) {
        MgfSteady m = mgf_steady_bound(s, o.delta);
        add(INFINITY, "mgf_steady", m.bound, m.value, Direction::upper);
    }
    {
        VarianceCheck v = variance_bound_check(s, o.mean_field);
        add(INFINITY, o.mean_field ? "variance_light_traffic" : "variance", v.bound, v.variance, Direction::upper);
    }
    StateDistribution pt = p0;
    double t_prev = 0.0;
    for (double t : parse_grid(o.t_grid)) {
        pt = evolve(ch, pt, t - t_prev, o.tol);
        t_prev = t;
        add(t, "mean_queue", mean_queue_envelope(s, t, c0, o.mean_field), std::fabs(moment(pt, 1) - mean_nu),
            Direction::upper);
        for (double x : {1.0, 2.0, 4.0}) {
            double num;
            if (o.mean_field) {
                KahanSum acc;
                for (long k = 0; k <= pt.q_max(); ++k)
                    if (static_cast<double>(k - s.n) > x) acc.add(pt.probs[k]);
                acc.add(pt.tail_mass);
                num = acc.value();
            } else {
                num = prob_scaled_excess(pt, s, x);
            }
            std::string name = "tail_x" + fmt17(x);
            add(t, name, tail_bound(s, t, x, c0, o.mean_field), num, Direction::upper);
        }
        if (!is_halfin_whitt(s.alpha) && !o.mean_field) {
            IdleBound ib = idle_prob_bound(s, t, c0, o.kappa);
            add(t, ib.direction == Direction::upper ? "idle_upper" : "idle_lower", ib.value, prob_idle(pt, s.n),
                ib.direction);
        }
    }
    write_bounds_csv(os, rows);
    bool all = true;
    for (const auto& r : rows)
        if (!r.valid && r.quantity != "idle_lower") all = false;
    return all ? 0 : 3;
}

struct SweepRow {
    long n;
    double alpha;
    std::string line;
    bool valid;
};

std::pair<std::string, std::string> table1_labels(Regime r) {
    switch (r) {
        case Regime::super_nds: return {"two_sided_exp", "singleton"};
        case Regime::super_hw: return {"two_sided_exp", "canonical_path"};
        case Regime::halfin_whitt: return {"two_sided_exp", "canonical_path"};
        case Regime::sub_hw: return {"linear_exp", "canonical_path"};
        case Regime::sub_hw_integer: return {"linear_exp", "singleton"};
        case Regime::mean_field: return {"constant_exp", "truncation"};
    }
    return {"", ""};
}

SweepRow sweep_point(long n, double alpha, bool table1) {
    RegimeSpec s = RegimeSpec::from_alpha(n, alpha);
    MixingRateBound mr = theorem1_rate(s);
    // the tail closure only looks at {0..n+64}
    BirthDeathChain ch = build_mmn(s, n + 64);
    SpectralResult g = spectral_gap(ch);
    bool valid = mr.rate <= g.gap + 1e-9;
    std::ostringstream os;
    os << n << ',' << fmt17(alpha) << ',' << regime_name(mr.regime) << ',' << fmt17(mr.rate) << ','
       << mr.constant_name << ',' << fmt17(mr.constant) << ',' << fmt17(g.gap) << ',' << fmt17(mr.rate / g.gap);
    if (table1) {
        auto [v, f] = table1_labels(mr.regime);
        os << ',' << v << ',' << f << ',' << mr.provenance;
    }
    os << ',' << fmt_bool(valid) << '\n';
    return {n, alpha, os.str(), valid};
}

int cmd_sweep(const Opts& o, std::ostream& os) {
    auto ns = split_list<long>(o.ns);
    auto as = split_list<double>(o.alphas);
    if (o.jobs < 1) fail("--jobs must be >= 1");
    std::vector<std::pair<long, double>> pts;
    for (long n : ns)
        for (double a : as) pts.emplace_back(n, a);
    std::sort(pts.begin(), pts.end());
    std::vector<SweepRow> rows(pts.size());
    std::vector<std::string> errors(pts.size());
    std::vector<int> kinds(pts.size(), 0);
    std::mutex mu;
    std::size_t next = 0;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lk(mu);
                if (next >= pts.size()) return;
                i = next++;
            }
            try {
                rows[i] = sweep_point(pts[i].first, pts[i].second, o.table1);
            } catch (const Error& e) {
                errors[i] = e.what();
                kinds[i] = static_cast<int>(e.kind());
            } catch (const std::exception& e) {
                errors[i] = e.what();
                kinds[i] = 4;
            }
        }
    };
    std::vector<std::thread> th;
    int nj = std::min<int>(o.jobs, static_cast<int>(pts.size()));
    for (int j = 0; j < nj; ++j) th.emplace_back(worker);
    for (auto& t : th) t.join();
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (kinds[i]) throw Error(static_cast<ErrorKind>(kinds[i]), errors[i]);
    os << "n,alpha,regime,bound_rate,constant,constant_value,gap_oracle,ratio";
    if (o.table1) os << ",lyapunov,finite_set,provenance";
    os << ",valid\n";
    bool all = true;
    for (const auto& r : rows) {
        os << r.line;
        all = all && r.valid;
    }
    return all ? 0 : 3;
}

void error_record(int code, const std::string& kind, const std::string& msg) {
    json e;
    e["error"] = kind;
    e["exit_code"] = code;
    e["message"] = msg;
    std::cerr << e.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"birth-death mixing toolkit"};
    app.require_subcommand(1);
    Opts o;
    std::map<std::string, std::string> given;

    auto common = [&](CLI::App* c, bool chain) {
        if (chain) {
            c->add_option("--n", o.n, "servers");
            auto a = c->add_option("--alpha", o.alpha, "lambda = n - n^(1-alpha)");
            auto l = c->add_option("--lambda", o.lambda, "arrival rate");
            a->excludes(l);
            c->add_option("--mu", o.mu, "service rate");
            c->add_option("--qmax", o.qmax, "truncation level");
            c->add_option("--mass-tol", o.mass_tol, "truncation mass tolerance");
            c->add_option("--tol", o.tol, "uniformization tolerance");
            c->add_option("--t-grid", o.t_grid, "lo:hi:step");
            c->add_option("--init", o.init, "dirac:<q> | uniform:<lo>,<hi>");
            c->add_option("--delta", o.delta, "MGF slack");
            c->add_option("--model", o.model, "mmn | mminf")->check(CLI::IsMember({"mmn", "mminf"}));
            c->add_option("--z", o.z, "mean-field parameter");
            c->add_option("--kappa", o.kappa, "idle lower-bound constant");
            c->add_option("--probes", o.probes, "random test functions");
            c->add_flag("--mean-field", o.mean_field, "mean-field analysis");
        }
        c->add_option("--seed", o.seed, "RNG seed");
        c->add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
        c->add_option("--out", o.out, "output path");
    };
    auto* st = app.add_subcommand("stationary", "stationary law");
    auto* tr = app.add_subcommand("transient", "chi-square decay trace");
    auto* gp = app.add_subcommand("gap", "spectral gap oracle");
    auto* dr = app.add_subcommand("drift", "drift certificate check");
    auto* ce = app.add_subcommand("certify", "Poincare certificate and mixing rate");
    auto* bd = app.add_subcommand("bounds", "finite-time statistics vs numerics");
    auto* sw = app.add_subcommand("sweep", "rate bound vs gap over an (n, alpha) grid");
    for (auto* c : {st, tr, gp, dr, ce, bd}) common(c, true);
    common(sw, false);
    sw->add_flag("--table1", o.table1, "regime table columns");
    sw->add_option("--ns", o.ns, "comma list of n");
    sw->add_option("--alphas", o.alphas, "comma list of alpha");
    sw->add_option("--jobs", o.jobs, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        error_record(2, "flag_error", e.what());
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    for (const auto* opt : sub->get_options())
        if (opt->count() > 0 && !opt->get_lnames().empty()) {
            std::string v;
            for (const auto& r : opt->results()) v += (v.empty() ? "" : " ") + r;
            given[opt->get_lnames().front()] = v;
        }

    std::ostringstream buf;
    try {
        int rc = 0;
        std::string name = sub->get_name();
        if (name == "stationary") rc = cmd_stationary(o, buf);
        else if (name == "transient") rc = cmd_transient(o, buf);
        else if (name == "gap") rc = cmd_gap(o, buf);
        else if (name == "drift") rc = cmd_drift(o, buf);
        else if (name == "certify") rc = cmd_certify(o, buf);
        else if (name == "bounds") rc = cmd_bounds(o, buf);
        else rc = cmd_sweep(o, buf);
        emit(name, o, given, buf.str());
        if (rc == 3) error_record(3, "validity", "a bound exceeded its oracle");
        return rc;
    } catch (const Error& e) {
        int code = static_cast<int>(e.kind());
        const char* kind = code == 2 ? "flag_error" : code == 3 ? "validity" : "nonconvergence";
        error_record(code, kind, e.what());
        return code;
    } catch (const std::exception& e) {
        error_record(4, "nonconvergence", e.what());
        return 4;
    }
}
