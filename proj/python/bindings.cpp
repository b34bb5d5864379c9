#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bdmix/bdchain.hpp"
#include "bdmix/lyapunov.hpp"
#include "bdmix/poincare.hpp"
#include "bdmix/regimes.hpp"
#include "bdmix/spectral.hpp"
#include "bdmix/stats.hpp"
#include "bdmix/transient.hpp"

namespace py = pybind11;
using namespace bdmix;

namespace {

RegimeSpec spec_of(long n, py::object alpha, py::object lambda, double mu) {
    if (!alpha.is_none() && !lambda.is_none()) fail("alpha and lambda are mutually exclusive");
    if (!alpha.is_none()) return RegimeSpec::from_alpha(n, alpha.cast<double>(), mu);
    if (!lambda.is_none()) return RegimeSpec::from_lambda(n, lambda.cast<double>(), mu);
    fail("one of alpha or lambda is required");
}

BirthDeathChain chain_of(const RegimeSpec& s, long q_max, double mass_tol) {
    return build_mmn(s, q_max > 0 ? q_max : choose_truncation(s, mass_tol));
}

}  // namespace

PYBIND11_MODULE(_bdmix, m) {
    m.doc() = "birth-death mixing toolkit";

    py::register_exception<Error>(m, "BdmixError", PyExc_ValueError);

    py::class_<RegimeSpec>(m, "RegimeSpec")
        .def_static("from_alpha", &RegimeSpec::from_alpha, py::arg("n"), py::arg("alpha"), py::arg("mu") = 1.0)
        .def_static("from_lambda", &RegimeSpec::from_lambda, py::arg("n"), py::arg("lam"), py::arg("mu") = 1.0)
        .def_readonly("n", &RegimeSpec::n)
        .def_readonly("alpha", &RegimeSpec::alpha)
        .def_readonly("lam", &RegimeSpec::lambda)
        .def_readonly("mu", &RegimeSpec::mu)
        .def_readonly("excess", &RegimeSpec::excess)
        .def("sqrt_gap", &RegimeSpec::sqrt_gap);

    m.def(
        "stationary",
        [](long n, py::object alpha, py::object lambda, double mu, long q_max, double mass_tol) {
            RegimeSpec s = spec_of(n, alpha, lambda, mu);
            StateDistribution d = stationary(chain_of(s, q_max, mass_tol));
            return py::make_tuple(d.probs, d.tail_mass);
        },
        py::arg("n"), py::arg("alpha") = py::none(), py::arg("lam") = py::none(), py::arg("mu") = 1.0,
        py::arg("q_max") = 0, py::arg("mass_tol") = 1e-12);

    m.def(
        "spectral_gap",
        [](long n, py::object alpha, py::object lambda, double mu, long q_max) {
            RegimeSpec s = spec_of(n, alpha, lambda, mu);
            return spectral_gap(chain_of(s, q_max, 1e-12)).gap;
        },
        py::arg("n"), py::arg("alpha") = py::none(), py::arg("lam") = py::none(), py::arg("mu") = 1.0,
        py::arg("q_max") = 0);

    m.def(
        "mminf_gap",
        [](double lambda, double mu) {
            return spectral_gap(build_mminf(lambda, mu, choose_truncation_mminf(lambda, mu))).gap;
        },
        py::arg("lam"), py::arg("mu") = 1.0);

    m.def(
        "decay_trace",
        [](long n, py::object alpha, py::object lambda, long q0, std::vector<double> t_grid) {
            RegimeSpec s = spec_of(n, alpha, lambda, 1.0);
            BirthDeathChain ch = chain_of(s, 0, 1e-12);
            auto rows = decay_trace(ch, StateDistribution::dirac(ch.q_max, q0), t_grid);
            py::list out;
            for (const auto& r : rows) {
                py::dict d;
                d["t"] = r.t;
                d["chi"] = r.chi;
                d["chi_square"] = r.chi_square;
                d["tv"] = r.tv;
                d["mass_deficit"] = r.mass_deficit;
                out.append(d);
            }
            return out;
        },
        py::arg("n"), py::arg("alpha") = py::none(), py::arg("lam") = py::none(), py::arg("q0") = 0,
        py::arg("t_grid") = std::vector<double>{});

    m.def(
        "theorem1_rate",
        [](long n, double alpha) {
            MixingRateBound r = theorem1_rate(RegimeSpec::from_alpha(n, alpha));
            py::dict d;
            d["rate"] = r.rate;
            d["regime"] = regime_name(r.regime);
            d["constant_name"] = r.constant_name;
            d["constant"] = r.constant;
            d["provenance"] = r.provenance;
            return d;
        },
        py::arg("n"), py::arg("alpha"));

    m.def(
        "certify_drift",
        [](long n, double alpha) {
            RegimeSpec s = RegimeSpec::from_alpha(n, alpha);
            DriftCertificate c = alpha < 0.5 ? sub_hw_certificate(s) : super_hw_certificate(s);
            BirthDeathChain ch = build_mmn(s, std::max<long>(c.K_hi() + 2, choose_truncation(s, 1e-12)));
            DriftReport r = certify_drift(ch, c);
            py::dict d;
            d["regime"] = c.regime;
            d["gamma"] = c.gamma;
            d["K"] = c.K;
            d["b"] = c.b;
            d["pass"] = r.pass;
            d["slack"] = r.slack;
            d["worst_state"] = r.worst_state;
            return d;
        },
        py::arg("n"), py::arg("alpha"));

    m.def("c_n", &c_n, py::arg("n"), py::arg("alpha"));
    m.def("d_n", &d_n, py::arg("n"), py::arg("alpha"), py::arg("lambda_is_integer") = false);
    m.def("h_n", &h_n, py::arg("n"));
    m.def(
        "mixing_time_bound",
        [](long n, double alpha, double chi0, double eps) {
            return mixing_time_bound(RegimeSpec::from_alpha(n, alpha), chi0, eps);
        },
        py::arg("n"), py::arg("alpha"), py::arg("chi0"), py::arg("eps"));
    m.def(
        "mgf_steady_bound",
        [](long n, double alpha, double delta) {
            MgfSteady r = mgf_steady_bound(RegimeSpec::from_alpha(n, alpha), delta);
            return py::make_tuple(r.value, r.bound);
        },
        py::arg("n"), py::arg("alpha"), py::arg("delta"));
}
