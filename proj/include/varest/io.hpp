#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "varest/harness.hpp"
#include "varest/simgen.hpp"

namespace varest {

struct RawDataset {
    Matrix x;
    Vector y;
};

/// Header `y,x1,...,xp` then one observation per line. Blank lines are ignored.
/// Malformed content throws ParseError carrying the 1-based line number.
RawDataset read_dataset_csv(std::istream& in);
void write_dataset_csv(std::ostream& out, const Matrix& x, const Vector& y);

/// JSON object with optional `p`, `mean` (array, default zeros), `covariance`
/// ("identity" or nested arrays), `fourth_moments` (number or array, default 3),
/// `independent_columns` and `gaussian` flags.
CovariateModel read_model_json(std::istream& in);
void write_model_json(std::ostream& out, const CovariateModel& model);

/// JSON object whose keys match the ScenarioConfig fields; missing keys keep `base` values.
/// The keys found in the file are appended to *present_keys when non-null.
ScenarioConfig read_scenario_json(std::istream& in, ScenarioConfig base = {},
                                  std::vector<std::string>* present_keys = nullptr);

/// `rep,estimator,tau2_hat,sigma2_hat,var_hat,wall_ms`, values at 17 significant digits so
/// that a parsed file reproduces the in-memory records exactly. Failed records carry `nan`.
void write_records_csv(std::ostream& out, const std::vector<RepRecord>& records);
std::vector<RepRecord> read_records_csv(std::istream& in);

/// `estimator,mean,bias,se,rmse,rmse_sd` at 6 significant digits.
void write_summary_csv(std::ostream& out, const std::vector<SummaryStats>& stats);

/// `estimator,status,tau2_hat,sigma2_hat,var_hat,aux` rows for the estimate command; aux
/// entries are `key=value` joined by '|'.
void write_estimates_csv(std::ostream& out, const std::vector<EstimatorOutcome>& outcomes);

/// Whitespace-aligned rendering of a summary for terminals.
std::string format_summary_table(const std::vector<SummaryStats>& stats);

}  // namespace varest
