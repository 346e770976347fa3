#include <optional>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "riskgraph/cli.hpp"
#include "riskgraph/dist.hpp"

namespace py = pybind11;
using namespace riskgraph;

namespace {

dist::ZinbParams zinb(double pi, double n, double p) {
    dist::ZinbParams q{pi, n, p};
    dist::validate(q);
    return q;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "riskgraph core: zero-inflated count distributions and the run pipeline";

    m.def(
        "zinb_loglik",
        [](double pi, double n, double p, long long y) {
            return dist::zinb_loglik(zinb(pi, n, p), y);
        },
        py::arg("pi"), py::arg("n"), py::arg("p"), py::arg("y"),
        "log P(Y = y) under ZINB(pi, n, p)");
    m.def(
        "zinb_mean", [](double pi, double n, double p) { return dist::zinb_mean(zinb(pi, n, p)); },
        py::arg("pi"), py::arg("n"), py::arg("p"));
    m.def(
        "zinb_variance",
        [](double pi, double n, double p) { return dist::zinb_variance(zinb(pi, n, p)); },
        py::arg("pi"), py::arg("n"), py::arg("p"));
    m.def(
        "zinb_p_zero",
        [](double pi, double n, double p) { return dist::zinb_p_zero(zinb(pi, n, p)); },
        py::arg("pi"), py::arg("n"), py::arg("p"));
    m.def(
        "zinb_entropy",
        [](double pi, double n, double p) { return dist::zinb_entropy(zinb(pi, n, p)); },
        py::arg("pi"), py::arg("n"), py::arg("p"));
    m.def(
        "zinb_quantile",
        [](double pi, double n, double p, double q) {
            return dist::zinb_quantile(zinb(pi, n, p), q);
        },
        py::arg("pi"), py::arg("n"), py::arg("p"), py::arg("q"));
    m.def(
        "nb_loglik",
        [](double n, double p, long long y) {
            dist::NbParams q{n, p};
            dist::validate(q);
            return dist::nb_loglik(q, y);
        },
        py::arg("n"), py::arg("p"), py::arg("y"));
    m.def(
        "gauss_loglik",
        [](double mu, double sigma, double y) {
            dist::GaussParams q{mu, sigma};
            dist::validate(q);
            return dist::gauss_loglik(q, y);
        },
        py::arg("mu"), py::arg("sigma"), py::arg("y"));

    m.def(
        "run_command",
        [](const std::string& name, const std::string& config_path,
           const std::optional<std::string>& out_dir) {
            return cli::run_command(name, config_path, out_dir);
        },
        py::arg("name"), py::arg("config_path"), py::arg("out_dir") = std::nullopt,
        "Run a riskgraph subcommand (ingest|synth|train|evaluate|predict); returns the exit code");
}
