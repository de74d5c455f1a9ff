#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsvcal/calibrate.hpp"
#include "lsvcal/config.hpp"
#include "lsvcal/fieldio.hpp"
#include "lsvcal/forward.hpp"
#include "lsvcal/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoConverge = 2;
constexpr int kExitInput = 3;
constexpr int kExitNumerical = 4;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string fmt_short(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw lsv::input_error("cannot write file: " + p.string());
    return out;
}

void write_lambda_csv(const fs::path& path, const lsv::CalibrationProblem& prob,
                      const lsv::LambdaVector& lam) {
    auto out = open_out(path);
    out << "index,maturity,strike,lambda\n";
    for (std::size_t i = 0; i < lam.size(); ++i)
        out << i << ',' << fmt(prob.quotes[i].maturity) << ',' << fmt(prob.quotes[i].strike)
            << ',' << fmt(lam[i]) << '\n';
}

void write_trace_csv(const fs::path& path, const std::vector<lsv::IterationRecord>& trace) {
    auto out = open_out(path);
    out << "iter,J,grad_inf,step,hjb_solves\n";
    for (const auto& r : trace)
        out << r.iter << ',' << fmt(r.J) << ',' << fmt(r.grad_inf) << ',' << fmt(r.step) << ','
            << r.hjb_solves << '\n';
}

void write_repricing_csv(const fs::path& path, const std::vector<lsv::RepricingRow>& rows) {
    auto out = open_out(path);
    out << "maturity,strike,log_strike,market_price,model_price,abs_error,input_iv,model_iv,iv_error\n";
    for (const auto& r : rows)
        out << fmt(r.maturity) << ',' << fmt(r.strike) << ',' << fmt(std::log(r.strike)) << ','
            << fmt(r.market_price) << ',' << fmt(r.model_price) << ','
            << fmt(std::abs(r.market_price - r.model_price)) << ',' << fmt(r.input_iv) << ','
            << fmt(r.model_iv) << ',' << fmt(r.model_iv - r.input_iv) << '\n';
}

int cmd_generate(const std::string& config_path, const std::string& out_path) {
    lsv::RunConfig cfg = lsv::load_config(config_path);
    auto rows = lsv::generate_quotes(cfg);
    lsv::save_quotes(rows, out_path);
    std::cout << "wrote " << rows.size() << " quotes to " << out_path << "\n";
    return kExitOk;
}

int cmd_calibrate(const std::string& config_path, const std::string& quotes_path,
                  const std::string& out_dir, bool snap, int threads_flag, bool verbose,
                  bool dump_phi) {
    lsv::RunConfig cfg = lsv::load_config(config_path);
    if (snap) cfg.snap_maturities = true;
    if (threads_flag > 0) cfg.threads = threads_flag;
    cfg.threads = lsv::resolve_threads(cfg.threads);

    auto rows = lsv::load_quotes(quotes_path);
    lsv::CalibrationProblem prob = lsv::build_problem(cfg, rows);
    auto report = lsv::validate_problem(prob);
    if (!report.ok()) {
        for (const auto& v : report.violations) std::cerr << "invalid input: " << v << "\n";
        return kExitInput;
    }

    fs::create_directories(out_dir);
    lsv::save_config(cfg, (fs::path(out_dir) / "effective_config.json").string());
    {
        std::vector<lsv::QuoteRow> used;
        for (const auto& q : prob.quotes) {
            lsv::QuoteRow r;
            r.strike = q.strike;
            r.log_strike = std::log(q.strike);
            r.maturity = q.maturity;
            r.price = q.price;
            r.input_iv = std::numeric_limits<double>::quiet_NaN();
            used.push_back(r);
        }
        lsv::save_quotes(used, (fs::path(out_dir) / "quotes_used.csv").string());
    }

    lsv::OptimSettings settings;
    settings.max_iter = cfg.max_iter;
    settings.memory = cfg.lbfgs_memory;
    settings.c1 = cfg.ls_c1;
    settings.verbose = verbose;

    lsv::CalibrationResult res = lsv::calibrate(prob, settings);

    write_lambda_csv(fs::path(out_dir) / "lambda.csv", prob, res.lambda_star);
    write_trace_csv(fs::path(out_dir) / "trace.csv", res.trace);
    write_repricing_csv(fs::path(out_dir) / "repricing.csv", res.repricing);
    lsv::save_field(res.sigma2, prob.grid, prob.tgrid.dt, (fs::path(out_dir) / "sigma2.field").string());
    lsv::save_field(res.eta, prob.grid, prob.tgrid.dt, (fs::path(out_dir) / "eta.field").string());
    if (dump_phi) {
        lsv::HjbSolution sol = lsv::solve_hjb(prob, res.lambda_star, true);
        lsv::save_field(sol.phi_path, prob.grid, prob.tgrid.dt, (fs::path(out_dir) / "phi.field").string());
    }

    double max_err = 0.0;
    for (const auto& r : res.repricing)
        max_err = std::max(max_err, std::abs(r.market_price - r.model_price));

    json summary;
    summary["status"] = res.status;
    summary["converged"] = res.converged;
    summary["J"] = res.J;
    summary["grad_inf"] = res.grad_inf;
    summary["iterations"] = res.trace.empty() ? 0 : res.trace.back().iter;
    summary["total_hjb_solves"] = res.total_hjb_solves;
    summary["max_abs_price_error"] = max_err;
    summary["epsilon"] = prob.epsilon;
    summary["quotes"] = prob.quotes.size();
    {
        auto out = open_out(fs::path(out_dir) / "summary.json");
        out << summary.dump(2) << "\n";
    }

    std::cout << "status: " << res.status << "  J=" << fmt_short(res.J)
              << "  |grad|_inf=" << fmt_short(res.grad_inf)
              << "  iterations=" << (res.trace.empty() ? 0 : res.trace.back().iter) << "\n";
    return res.converged ? kExitOk : kExitNoConverge;
}

int cmd_price(const std::string& config_path, const std::string& bundle_dir,
              const std::string& quotes_path, const std::string& out_path, int threads_flag) {
    lsv::RunConfig cfg = lsv::load_config(config_path);
    if (threads_flag > 0) cfg.threads = threads_flag;
    cfg.threads = lsv::resolve_threads(cfg.threads);

    auto rows = lsv::load_quotes(quotes_path);
    lsv::CalibrationProblem prob = lsv::build_problem(cfg, rows);
    auto report = lsv::validate_problem(prob);
    if (!report.ok()) {
        for (const auto& v : report.violations) std::cerr << "invalid input: " << v << "\n";
        return kExitInput;
    }

    lsv::FieldFile ff = lsv::load_field((fs::path(bundle_dir) / "sigma2.field").string());
    lsv::check_field_matches(ff, prob.grid, prob.tgrid.dt);
    if (ff.field.n_slices < prob.tgrid.nt)
        throw lsv::input_error("sigma2 field has fewer slices than the time grid");

    auto fwd = lsv::forward_prices(prob, ff.field);
    auto out = open_out(out_path);
    out << "maturity,strike,log_strike,backward_price,forward_price,gap\n";
    for (std::size_t i = 0; i < prob.quotes.size(); ++i) {
        double bw = lsv::price_backward(prob, ff.field, prob.quotes[i]);
        out << fmt(prob.quotes[i].maturity) << ',' << fmt(prob.quotes[i].strike) << ','
            << fmt(std::log(prob.quotes[i].strike)) << ',' << fmt(bw) << ',' << fmt(fwd[i]) << ','
            << fmt(bw - fwd[i]) << '\n';
    }
    std::cout << "priced " << prob.quotes.size() << " quotes to " << out_path << "\n";
    return kExitOk;
}

int cmd_report(const std::string& bundle_dir, const std::string& out_dir) {
    fs::path bundle(bundle_dir);
    for (const char* member : {"repricing.csv", "sigma2.field", "eta.field"})
        if (!fs::exists(bundle / member))
            throw lsv::input_error("bundle is missing " + std::string(member));

    // group repricing rows by maturity into per-smile plot files
    std::ifstream in(bundle / "repricing.csv");
    std::string line;
    std::getline(in, line);  // header
    std::map<std::string, std::vector<std::string>> smiles;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        smiles[line.substr(0, comma)].push_back(line);
    }

    fs::create_directories(out_dir);
    for (const auto& [mat, rows] : smiles) {
        std::string label = fmt_short(std::strtod(mat.c_str(), nullptr));
        auto out = open_out(fs::path(out_dir) / ("smile_T" + label + ".csv"));
        out << "maturity,strike,log_strike,market_price,model_price,abs_error,input_iv,model_iv,iv_error\n";
        for (const auto& r : rows) out << r << '\n';
    }

    // surface slices at evenly spaced times (plot data: z rows, v columns)
    for (const char* name : {"sigma2", "eta"}) {
        lsv::FieldFile ff = lsv::load_field((bundle / (std::string(name) + ".field")).string());
        int ns = ff.field.n_slices;
        for (int frac = 0; frac <= 4; ++frac) {
            int k = std::min(ns - 1, frac * (ns - 1) / 4);
            double t = k * ff.dt;
            auto out = open_out(fs::path(out_dir) /
                                (std::string(name) + "_t" + fmt_short(t) + ".csv"));
            out << "z\\v";
            for (double v : ff.vaxis) out << ',' << fmt_short(v);
            out << '\n';
            const double* s = ff.field.slice(k);
            for (int i = 0; i < ff.field.nz; ++i) {
                out << fmt_short(ff.zaxis[i]);
                for (int j = 0; j < ff.field.nv; ++j)
                    out << ',' << fmt(s[static_cast<std::size_t>(i) * ff.field.nv + j]);
                out << '\n';
            }
        }
    }
    std::cout << "report written to " << out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"local-stochastic volatility calibration to European option quotes"};
    app.require_subcommand(1);

    std::string config_path, quotes_path, out_path, bundle_dir;
    int threads = 0;
    bool snap = false, verbose = false, dump_phi = false;

    auto* gen = app.add_subcommand("generate", "price a synthetic quote ladder");
    gen->add_option("--config", config_path, "config file")->required();
    gen->add_option("--out", out_path, "output quotes csv")->required();

    auto* cal = app.add_subcommand("calibrate", "calibrate the volatility surface to quotes");
    cal->add_option("--config", config_path, "config file")->required();
    cal->add_option("--quotes", quotes_path, "quotes csv")->required();
    cal->add_option("--out", out_path, "output bundle directory")->required();
    cal->add_flag("--snap-maturities", snap, "snap off-grid maturities to the nearest time node");
    cal->add_option("--threads", threads, "worker threads (LSVCAL_THREADS overrides)");
    cal->add_flag("--verbose", verbose, "per-iteration progress");
    cal->add_flag("--dump-phi", dump_phi, "also write the phi field of the final solve");

    auto* pri = app.add_subcommand("price", "price quotes under a calibrated surface");
    pri->add_option("--config", config_path, "config file")->required();
    pri->add_option("--bundle", bundle_dir, "calibration bundle directory")->required();
    pri->add_option("--quotes", quotes_path, "quotes csv")->required();
    pri->add_option("--out", out_path, "output prices csv")->required();
    pri->add_option("--threads", threads, "worker threads (LSVCAL_THREADS overrides)");

    auto* rep = app.add_subcommand("report", "emit smile tables and surface slices from a bundle");
    rep->add_option("--bundle", bundle_dir, "calibration bundle directory")->required();
    rep->add_option("--out", out_path, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (gen->parsed()) return cmd_generate(config_path, out_path);
        if (cal->parsed())
            return cmd_calibrate(config_path, quotes_path, out_path, snap, threads, verbose, dump_phi);
        if (pri->parsed()) return cmd_price(config_path, bundle_dir, quotes_path, out_path, threads);
        if (rep->parsed()) return cmd_report(bundle_dir, out_path);
    } catch (const lsv::input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const lsv::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitInput;
}
