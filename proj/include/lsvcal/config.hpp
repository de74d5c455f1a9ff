#pragma once

#include <string>
#include <vector>

#include "lsvcal/types.hpp"

namespace lsv {

// strike ladder per maturity used by the generate command
struct QuoteSpec {
    std::vector<double> maturities;
    int n_strikes = 13;
    double log_strike_min = 0.0;
    double log_strike_max = 0.0;
};

struct RunConfig {
    HestonParams data_heston;   // generator parameters (synthetic quotes)
    HestonParams model_heston;  // reference parameters used by the calibration
    SpotState spot;
    DomainSpec domain;
    double cost_p = 4.0;
    double cost_scale = 1.0;
    double adi_theta = 0.5;
    double epsilon = 1e-4;
    int max_iter = 500;
    int lbfgs_memory = 10;
    double ls_c1 = 1e-4;
    int threads = 1;
    bool snap_maturities = false;
    QuoteSpec quotes;
};

RunConfig default_config();

std::string serialize_config(const RunConfig& cfg);       // JSON text
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);

// quotes file: CSV with header strike,log_strike,maturity,price,input_iv.
// Readers accept either strike column (log_strike wins when both are present);
// parse failures name the offending line.
struct QuoteRow {
    double strike = 0.0;
    double log_strike = 0.0;
    double maturity = 0.0;
    double price = 0.0;
    double input_iv = 0.0;  // NaN allowed
};

void save_quotes(const std::vector<QuoteRow>& rows, const std::string& path);
std::vector<QuoteRow> load_quotes(const std::string& path);

// strike ladder -> analytically priced synthetic quotes under data_heston
std::vector<QuoteRow> generate_quotes(const RunConfig& cfg);

// assemble a validated problem from config + quote rows; optionally snap
// off-grid maturities to the nearest time node instead of rejecting them
CalibrationProblem build_problem(const RunConfig& cfg, const std::vector<QuoteRow>& rows);

}  // namespace lsv
