#include "gmwb/config.hpp"
#include "gmwb/oracle.hpp"
#include "gmwb/pricing.hpp"
#include "gmwb/risk.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace gmwb;

PYBIND11_MODULE(_gmwb, mod) {
    mod.doc() = "Monte Carlo pricing of VIX-linked GMWB rider fees";
    mod.attr("__version__") = GMWB_VERSION;

    py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(mod, "DomainError", PyExc_ValueError);
    py::register_exception<BracketError>(mod, "BracketError", PyExc_RuntimeError);

    py::enum_<Measure>(mod, "Measure").value("Q", Measure::Q).value("P", Measure::P);
    py::enum_<JumpFeeTerm>(mod, "JumpFeeTerm")
        .value("UNSCALED", JumpFeeTerm::Unscaled)
        .value("SCALED", JumpFeeTerm::ScaledByMultiplier);
    py::enum_<MemoryMode>(mod, "MemoryMode")
        .value("SINGLE_PASS", MemoryMode::SinglePass)
        .value("ANCESTRY_REPLAY", MemoryMode::AncestryReplay);
    py::enum_<RootMethod>(mod, "RootMethod")
        .value("BISECTION", RootMethod::Bisection)
        .value("ILLINOIS", RootMethod::Illinois);

    py::class_<MarketParamsQ>(mod, "MarketParams")
        .def(py::init<>())
        .def_readwrite("nu", &MarketParamsQ::nu)
        .def_readwrite("rho_rev", &MarketParamsQ::rho_rev)
        .def_readwrite("kappa", &MarketParamsQ::kappa)
        .def_readwrite("v0", &MarketParamsQ::v0)
        .def_readwrite("rho", &MarketParamsQ::rho)
        .def_readwrite("lambda_", &MarketParamsQ::lambda)
        .def_readwrite("delta", &MarketParamsQ::delta)
        .def_readwrite("chi", &MarketParamsQ::chi)
        .def_readwrite("r", &MarketParamsQ::r);

    py::class_<RiskPremia>(mod, "RiskPremia")
        .def(py::init<>())
        .def(py::init([](double s, double v, double j) { return RiskPremia{s, v, j}; }), py::arg("eta_s"),
             py::arg("eta_v"), py::arg("eta_j"))
        .def_readwrite("eta_s", &RiskPremia::eta_s)
        .def_readwrite("eta_v", &RiskPremia::eta_v)
        .def_readwrite("eta_j", &RiskPremia::eta_j);

    py::class_<FeeStructure>(mod, "FeeStructure")
        .def(py::init<>())
        .def_readwrite("q", &FeeStructure::q)
        .def_readwrite("c_bar", &FeeStructure::c_bar)
        .def_readwrite("m", &FeeStructure::m)
        .def_readwrite("jump_term", &FeeStructure::jump_term);

    py::class_<ContractSpec>(mod, "Contract")
        .def_static("constant_rate", &ContractSpec::constant_rate, py::arg("f0"), py::arg("rate"))
        .def_static("accumulation", &ContractSpec::accumulation, py::arg("f0"), py::arg("term"))
        .def_static("yearly", &ContractSpec::yearly, py::arg("f0"), py::arg("rates"))
        .def_readonly("f0", &ContractSpec::f0)
        .def("maturity", &ContractSpec::maturity)
        .def("withdrawal_rate", &ContractSpec::withdrawal_rate);

    py::class_<DerivedConstants>(mod, "DerivedConstants")
        .def_readonly("phi", &DerivedConstants::phi)
        .def_readonly("A", &DerivedConstants::A)
        .def_readonly("B", &DerivedConstants::B)
        .def_readonly("alpha0", &DerivedConstants::alpha0)
        .def_readonly("alpha", &DerivedConstants::alpha)
        .def_readonly("mu", &DerivedConstants::mu)
        .def_property_readonly("n", [](const DerivedConstants& d) { return d.kernel.n; });

    py::class_<SimConfig>(mod, "SimConfig")
        .def(py::init<>())
        .def_readwrite("market", &SimConfig::market)
        .def_readwrite("premia", &SimConfig::premia)
        .def_readwrite("measure", &SimConfig::measure)
        .def_readwrite("fee", &SimConfig::fee)
        .def_readwrite("contract", &SimConfig::contract)
        .def_readwrite("n_paths", &SimConfig::n_paths)
        .def_readwrite("h", &SimConfig::h)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("epsilon", &SimConfig::epsilon)
        .def_readwrite("branching", &SimConfig::branching)
        .def_readwrite("sub_steps", &SimConfig::sub_steps)
        .def_readwrite("bridge_levels", &SimConfig::bridge_levels)
        .def_readwrite("memory", &SimConfig::memory)
        .def_readwrite("threads", &SimConfig::threads)
        .def_readwrite("batches", &SimConfig::batches)
        .def("validate", &SimConfig::validate);

    py::class_<Estimate>(mod, "Estimate")
        .def_readonly("value", &Estimate::value)
        .def_readonly("std_error", &Estimate::std_error)
        .def_readonly("batches", &Estimate::batches)
        .def("__repr__", [](const Estimate& e) {
            return "Estimate(" + std::to_string(e.value) + " +- " + std::to_string(e.std_error) + ")";
        });

    py::class_<FeePayout>(mod, "FeePayout")
        .def_readonly("fee", &FeePayout::fee)
        .def_readonly("payout", &FeePayout::payout)
        .def_readonly("net", &FeePayout::net);

    py::class_<FairFeeResult>(mod, "FairFeeResult")
        .def_readonly("c_bar", &FairFeeResult::c_bar)
        .def_readonly("std_error", &FairFeeResult::std_error)
        .def_readonly("liability", &FairFeeResult::liability)
        .def_readonly("evaluations", &FairFeeResult::evaluations);

    py::class_<LossSummary>(mod, "LossSummary")
        .def_readonly("mean", &LossSummary::mean)
        .def_readonly("variance", &LossSummary::variance)
        .def_readonly("cte", &LossSummary::cte)
        .def_readonly("var", &LossSummary::var)
        .def_readonly("zeta", &LossSummary::zeta);

    mod.def("derive_constants", &derive_constants, py::arg("market"), py::arg("fee"));
    mod.def("condition_c", py::overload_cast<const MarketParamsQ&>(&condition_c), py::arg("market"));
    mod.def("config_from_json", [](const std::string& text) { return parse_config(text).sim; }, py::arg("text"),
            "The `sim` part of a JSON run configuration.");

    mod.def("net_liability", py::overload_cast<const SimConfig&>(&net_liability), py::arg("config"),
            py::call_guard<py::gil_scoped_release>());
    mod.def("fee_and_payout", py::overload_cast<const SimConfig&>(&fee_and_payout), py::arg("config"),
            py::call_guard<py::gil_scoped_release>());
    mod.def(
        "fair_base_fee",
        [](double m, const SimConfig& c, double lo, double hi, double tol, RootMethod method, bool stop_within_error) {
            FairFeeOptions o;
            o.lo = lo;
            o.hi = hi;
            o.tol = tol;
            o.method = method;
            o.stop_within_error = stop_within_error;
            return fair_base_fee(m, c, o);
        },
        py::arg("m"), py::arg("config"), py::arg("lo") = 0.0, py::arg("hi") = 0.05, py::arg("tol") = 1e-5,
        py::arg("method") = RootMethod::Bisection, py::arg("stop_within_error") = true,
        py::call_guard<py::gil_scoped_release>());
    mod.def(
        "loss_summary",
        [](const SimConfig& c, double zeta) { return summary(LossDistribution(loss_samples(c)), zeta); },
        py::arg("config"), py::arg("zeta") = 0.9, py::call_guard<py::gil_scoped_release>());
    mod.def(
        "loss_samples",
        [](const SimConfig& c) {
            std::vector<std::tuple<double, double, std::uint32_t>> out;
            for (const LossSample& s : loss_samples(c)) out.emplace_back(s.value, s.weight, s.batch);
            return out;
        },
        py::arg("config"), "(loss, weight, batch) triples.");
    mod.def(
        "euler_net_liability",
        [](const SimConfig& c, double h_e) { return net_liability(euler_simulate({c, h_e}).result); },
        py::arg("config"), py::arg("h_e") = 1e-3, py::call_guard<py::gil_scoped_release>());
}
