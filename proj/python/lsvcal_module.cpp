// thin python surface over the calibration library; quotes travel as
// (log_strike, maturity, price[, input_iv]) tuples and configs as JSON text
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lsvcal/calibrate.hpp"
#include "lsvcal/config.hpp"
#include "lsvcal/cost.hpp"
#include "lsvcal/forward.hpp"
#include "lsvcal/heston.hpp"

namespace py = pybind11;
using namespace lsv;

namespace {

using QuoteTuple = std::tuple<double, double, double>;

std::vector<QuoteRow> rows_from_tuples(const std::vector<QuoteTuple>& quotes) {
    std::vector<QuoteRow> rows;
    rows.reserve(quotes.size());
    for (const auto& [lk, mat, price] : quotes) {
        QuoteRow r;
        r.log_strike = lk;
        r.strike = std::exp(lk);
        r.maturity = mat;
        r.price = price;
        rows.push_back(r);
    }
    return rows;
}

py::dict run_calibration(const std::string& config_json, const std::vector<QuoteTuple>& quotes) {
    RunConfig cfg = parse_config(config_json);
    CalibrationProblem prob = build_problem(cfg, rows_from_tuples(quotes));
    auto report = validate_problem(prob);
    if (!report.ok()) {
        std::string msg = "invalid problem:";
        for (const auto& v : report.violations) msg += "\n  " + v;
        throw input_error(msg);
    }
    OptimSettings settings;
    settings.max_iter = cfg.max_iter;
    settings.memory = cfg.lbfgs_memory;
    settings.c1 = cfg.ls_c1;
    CalibrationResult res = calibrate(prob, settings);

    double max_err = 0.0;
    for (std::size_t i = 0; i < prob.quotes.size(); ++i)
        max_err = std::max(max_err, std::abs(res.model_prices[i] - prob.quotes[i].price));

    py::dict out;
    out["status"] = res.status;
    out["converged"] = res.converged;
    out["J"] = res.J;
    out["grad_inf"] = res.grad_inf;
    out["iterations"] = res.trace.empty() ? 0 : res.trace.back().iter;
    out["total_hjb_solves"] = res.total_hjb_solves;
    out["lambda"] = res.lambda_star;
    out["model_prices"] = res.model_prices;
    out["max_abs_price_error"] = max_err;
    return out;
}

}  // namespace

PYBIND11_MODULE(_lsvcal, m) {
    m.doc() = "volatility-surface calibration bindings";

    m.def(
        "heston_call_price",
        [](double kappa, double theta, double xi, double eta_bar, double rate, double z0,
           double v0, double strike, double maturity) {
            return heston_call_price({kappa, theta, xi, eta_bar, rate}, {z0, v0}, strike, maturity);
        },
        py::arg("kappa"), py::arg("theta"), py::arg("xi"), py::arg("eta_bar"), py::arg("rate"),
        py::arg("z0"), py::arg("v0"), py::arg("strike"), py::arg("maturity"));

    m.def("bs_call_price", &bs_call_price, py::arg("spot"), py::arg("strike"), py::arg("maturity"),
          py::arg("rate"), py::arg("vol"));
    m.def("implied_vol", &implied_vol, py::arg("price"), py::arg("spot"), py::arg("strike"),
          py::arg("maturity"), py::arg("rate"));

    m.def(
        "cost_value",
        [](double x, double x_bar, double s, double p, double scale) {
            return cost_value(x, x_bar, s, cost_coefficients(p, scale));
        },
        py::arg("x"), py::arg("x_bar"), py::arg("s"), py::arg("p") = 4.0, py::arg("scale") = 1.0);
    m.def(
        "conjugate_argmax",
        [](double q, double x_bar, double s, double p, double scale) {
            return conjugate_argmax(q, x_bar, s, cost_coefficients(p, scale));
        },
        py::arg("q"), py::arg("x_bar"), py::arg("s"), py::arg("p") = 4.0, py::arg("scale") = 1.0);

    m.def("default_config_json", [] { return serialize_config(default_config()); });

    m.def(
        "generate_quotes",
        [](const std::string& config_json) {
            RunConfig cfg = parse_config(config_json);
            auto rows = generate_quotes(cfg);
            std::vector<std::tuple<double, double, double, double>> out;
            out.reserve(rows.size());
            for (const auto& r : rows) out.emplace_back(r.log_strike, r.maturity, r.price, r.input_iv);
            return out;
        },
        py::arg("config_json"));

    m.def("calibrate", &run_calibration, py::arg("config_json"), py::arg("quotes"));

    py::register_exception<input_error>(m, "InputError");
    py::register_exception<numerical_error>(m, "NumericalError");
}
