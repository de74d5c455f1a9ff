#include "lsvcal/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "lsvcal/cost.hpp"
#include "lsvcal/heston.hpp"

namespace lsv {

using nlohmann::json;

namespace {

json heston_to_json(const HestonParams& h) {
    return json{{"kappa", h.kappa}, {"theta", h.theta}, {"xi", h.xi},
                {"eta_bar", h.eta_bar}, {"rate", h.rate}};
}

HestonParams heston_from_json(const json& j) {
    HestonParams h;
    h.kappa = j.at("kappa").get<double>();
    h.theta = j.at("theta").get<double>();
    h.xi = j.at("xi").get<double>();
    h.eta_bar = j.at("eta_bar").get<double>();
    h.rate = j.at("rate").get<double>();
    return h;
}

}  // namespace

RunConfig default_config() {
    RunConfig cfg;
    cfg.data_heston = {2.0, 0.09, 0.10, -0.6, 0.05};
    cfg.model_heston = cfg.data_heston;
    cfg.spot.z0 = std::log(100.0);
    cfg.spot.v0 = 0.04;
    double sv = std::sqrt(cfg.spot.v0);
    cfg.domain = DomainSpec{cfg.spot.z0 - 4.0 * sv, cfg.spot.z0 + 4.0 * sv, 51,
                            0.0, 0.5, 51, 1.0, 100};
    cfg.quotes.maturities = {0.2, 0.4, 0.6, 0.8, 1.0};
    cfg.quotes.n_strikes = 13;
    cfg.quotes.log_strike_min = 4.3172;
    cfg.quotes.log_strike_max = 4.8292;
    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    json j;
    j["data_heston"] = heston_to_json(cfg.data_heston);
    j["model_heston"] = heston_to_json(cfg.model_heston);
    j["spot"] = {{"z0", cfg.spot.z0}, {"v0", cfg.spot.v0}};
    j["domain"] = {{"z_min", cfg.domain.z_min}, {"z_max", cfg.domain.z_max}, {"nz", cfg.domain.nz},
                   {"v_min", cfg.domain.v_min}, {"v_max", cfg.domain.v_max}, {"nv", cfg.domain.nv},
                   {"t_max", cfg.domain.t_max}, {"nt", cfg.domain.nt}};
    j["cost"] = {{"p", cfg.cost_p}, {"scale", cfg.cost_scale}};
    j["adi"] = {{"theta", cfg.adi_theta}};
    j["optimizer"] = {{"epsilon", cfg.epsilon}, {"max_iter", cfg.max_iter},
                      {"memory", cfg.lbfgs_memory}, {"ls_c1", cfg.ls_c1}};
    j["threads"] = cfg.threads;
    j["snap_maturities"] = cfg.snap_maturities;
    j["quotes"] = {{"maturities", cfg.quotes.maturities}, {"n_strikes", cfg.quotes.n_strikes},
                   {"log_strike_min", cfg.quotes.log_strike_min},
                   {"log_strike_max", cfg.quotes.log_strike_max}};
    return j.dump(2) + "\n";
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw input_error(std::string("config parse error: ") + e.what());
    }
    try {
        RunConfig cfg;
        cfg.data_heston = heston_from_json(j.at("data_heston"));
        cfg.model_heston = heston_from_json(j.at("model_heston"));
        cfg.spot.z0 = j.at("spot").at("z0").get<double>();
        cfg.spot.v0 = j.at("spot").at("v0").get<double>();
        const auto& d = j.at("domain");
        cfg.domain.z_min = d.at("z_min").get<double>();
        cfg.domain.z_max = d.at("z_max").get<double>();
        cfg.domain.nz = d.at("nz").get<int>();
        cfg.domain.v_min = d.at("v_min").get<double>();
        cfg.domain.v_max = d.at("v_max").get<double>();
        cfg.domain.nv = d.at("nv").get<int>();
        cfg.domain.t_max = d.at("t_max").get<double>();
        cfg.domain.nt = d.at("nt").get<int>();
        cfg.cost_p = j.at("cost").at("p").get<double>();
        cfg.cost_scale = j.at("cost").at("scale").get<double>();
        cfg.adi_theta = j.at("adi").at("theta").get<double>();
        const auto& o = j.at("optimizer");
        cfg.epsilon = o.at("epsilon").get<double>();
        cfg.max_iter = o.at("max_iter").get<int>();
        cfg.lbfgs_memory = o.at("memory").get<int>();
        cfg.ls_c1 = o.at("ls_c1").get<double>();
        cfg.threads = j.value("threads", 1);
        cfg.snap_maturities = j.value("snap_maturities", false);
        const auto& q = j.at("quotes");
        cfg.quotes.maturities = q.at("maturities").get<std::vector<double>>();
        cfg.quotes.n_strikes = q.at("n_strikes").get<int>();
        cfg.quotes.log_strike_min = q.at("log_strike_min").get<double>();
        cfg.quotes.log_strike_max = q.at("log_strike_max").get<double>();
        return cfg;
    } catch (const json::exception& e) {
        throw input_error(std::string("config field error: ") + e.what());
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void save_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write config file: " + path);
    out << serialize_config(cfg);
}

namespace {
std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}
}  // namespace

void save_quotes(const std::vector<QuoteRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write quotes file: " + path);
    out << "strike,log_strike,maturity,price,input_iv\n";
    for (const auto& r : rows)
        out << fmt(r.strike) << ',' << fmt(r.log_strike) << ',' << fmt(r.maturity) << ','
            << fmt(r.price) << ',' << fmt(r.input_iv) << '\n';
}

std::vector<QuoteRow> load_quotes(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open quotes file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw input_error("quotes file is empty: " + path);

    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char ch : s) {
            if (ch == ',') {
                out.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur += ch;
            }
        }
        out.push_back(cur);
        return out;
    };

    auto header = split(line);
    int c_strike = -1, c_logk = -1, c_mat = -1, c_price = -1, c_iv = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "strike") c_strike = static_cast<int>(c);
        else if (header[c] == "log_strike") c_logk = static_cast<int>(c);
        else if (header[c] == "maturity") c_mat = static_cast<int>(c);
        else if (header[c] == "price") c_price = static_cast<int>(c);
        else if (header[c] == "input_iv") c_iv = static_cast<int>(c);
    }
    if (c_mat < 0 || c_price < 0 || (c_strike < 0 && c_logk < 0))
        throw input_error("quotes file " + path +
                          " line 1: header must contain maturity, price and strike or log_strike");

    std::vector<QuoteRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split(line);
        auto cell = [&](int c) -> double {
            if (c < 0 || c >= static_cast<int>(cells.size()) || cells[c].empty())
                return std::numeric_limits<double>::quiet_NaN();
            try {
                std::size_t pos = 0;
                double v = std::stod(cells[c], &pos);
                if (pos != cells[c].size()) throw std::invalid_argument("trailing characters");
                return v;
            } catch (const std::exception&) {
                throw input_error("quotes file " + path + " line " + std::to_string(lineno) +
                                  ": cannot parse '" + cells[c] + "'");
            }
        };
        QuoteRow r;
        r.log_strike = cell(c_logk);
        r.strike = cell(c_strike);
        if (std::isnan(r.log_strike) && std::isnan(r.strike))
            throw input_error("quotes file " + path + " line " + std::to_string(lineno) +
                              ": missing strike");
        if (std::isnan(r.log_strike)) r.log_strike = std::log(r.strike);
        else r.strike = std::exp(r.log_strike);  // log_strike wins when both are present
        r.maturity = cell(c_mat);
        r.price = cell(c_price);
        if (std::isnan(r.maturity) || std::isnan(r.price))
            throw input_error("quotes file " + path + " line " + std::to_string(lineno) +
                              ": missing maturity or price");
        r.input_iv = cell(c_iv);
        rows.push_back(r);
    }
    return rows;
}

std::vector<QuoteRow> generate_quotes(const RunConfig& cfg) {
    if (cfg.quotes.maturities.empty()) throw input_error("no maturities in quote spec");
    if (cfg.quotes.n_strikes < 1) throw input_error("quote spec needs at least one strike");
    if (!(cfg.quotes.log_strike_max >= cfg.quotes.log_strike_min))
        throw input_error("quote spec strike bounds are inverted");

    const double S0 = std::exp(cfg.spot.z0);
    std::vector<QuoteRow> rows;
    for (double T : cfg.quotes.maturities) {
        for (int s = 0; s < cfg.quotes.n_strikes; ++s) {
            double lk = cfg.quotes.n_strikes == 1
                            ? cfg.quotes.log_strike_min
                            : cfg.quotes.log_strike_min +
                                  (cfg.quotes.log_strike_max - cfg.quotes.log_strike_min) * s /
                                      (cfg.quotes.n_strikes - 1);
            QuoteRow r;
            r.log_strike = lk;
            r.strike = std::exp(lk);
            r.maturity = T;
            r.price = heston_call_price(cfg.data_heston, cfg.spot, r.strike, T);
            r.input_iv = implied_vol(r.price, S0, r.strike, T, cfg.data_heston.rate);
            rows.push_back(r);
        }
    }
    return rows;
}

CalibrationProblem build_problem(const RunConfig& cfg, const std::vector<QuoteRow>& rows) {
    CalibrationProblem p;
    p.heston = cfg.model_heston;
    p.spot = cfg.spot;
    Grids grids = build_grids(cfg.domain, cfg.spot);
    p.grid = std::move(grids.grid);
    p.tgrid = std::move(grids.tgrid);
    p.cost = cost_coefficients(cfg.cost_p, cfg.cost_scale);
    p.epsilon = cfg.epsilon;
    p.adi_theta = cfg.adi_theta;
    p.threads = cfg.threads;
    for (const auto& r : rows) {
        OptionQuote q;
        q.kind = PayoffKind::call;
        q.strike = r.strike;
        q.maturity = r.maturity;
        q.price = r.price;
        if (cfg.snap_maturities && maturity_step_index(p.tgrid, q.maturity) < 0) {
            int k = static_cast<int>(std::lround(q.maturity / p.tgrid.dt));
            k = std::max(1, std::min(k, p.tgrid.nt));
            q.maturity = k * p.tgrid.dt;
        }
        p.quotes.push_back(std::move(q));
    }
    return p;
}

}  // namespace lsv
