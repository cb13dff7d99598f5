#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include <nlohmann/json.hpp>
#include "tripcast/domain.h"
#include "tripcast/error.h"

namespace tripcast {

// Zone × covariate table produced by normalize_sea.
struct CovariateTable {
  int year = 0;
  std::vector<std::string> zone_ids;
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // rows = zones, cols = names
  std::vector<std::pair<std::string, std::string>> excluded;  // (zone, reason)
  std::vector<std::string> incomplete;  // covariates dropped for missing values

  std::optional<Eigen::Index> column(const std::string& name) const;
  /// Columns in the given order; throws DataError naming the first missing
  /// covariate.
  Eigen::MatrixXd select(std::span<const std::string> columns) const;
  std::optional<Eigen::Index> row(const std::string& zone_id) const;
};

/// Turns raw SEA records of one year into model covariates: employment and
/// group-quarter counts become percentages of population, income and vehicle
/// averages pass through, and population density is population per km² of
/// zone area (falling back to a supplied density column when the area is
/// unknown). Zones with zero population are excluded with a flag.
CovariateTable normalize_sea(std::span<const SeaRecord> records, int year,
                             const std::map<std::string, double>& zone_area_km2 = {});

/// Pearson correlation of two equally long samples (NaN when either is
/// constant).
double pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationPair {
  std::string a;
  std::string b;
  double rho = 0.0;
};

struct ScreeningReport {
  std::vector<std::string> names;  // non-constant covariates, rho order
  Eigen::MatrixXd rho;
  std::vector<CorrelationPair> flagged;  // |rho| >= threshold
  std::vector<std::string> dropped;
  std::vector<std::string> constant;
  std::vector<std::string> retained;  // table order, minus dropped/constant
  double threshold = 0.5;
};

/// Pairwise Pearson screening. For each flagged pair the member listed
/// earliest in `drop_priority` is dropped; pairs with neither member listed
/// are only reported. Requires at least 3 zones.
ScreeningReport correlation_screen(const CovariateTable& table, double threshold = 0.5,
                                   const std::vector<std::string>& drop_priority = {
                                       "population_density"});

class RankDeficientError : public DataError {
 public:
  RankDeficientError(std::vector<std::string> columns, const std::string& what)
      : DataError(what), columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

/// Ordinary least squares with an intercept prepended to `covariates`.
/// Standard errors use the unbiased residual variance; p-values are
/// two-sided Student-t with n - k - 1 degrees of freedom. Throws
/// RankDeficientError naming a linearly dependent column set, DataError when
/// there are fewer than k + 2 rows.
RegressionModel fit_ols(const Eigen::MatrixXd& covariates, const Eigen::VectorXd& y,
                        const std::vector<std::string>& names);

struct TripPrediction {
  std::vector<std::string> zone_ids;
  Eigen::VectorXd values;  // clamped at 0
  Eigen::VectorXd raw;
  std::size_t clamped = 0;
};

/// Linear prediction per zone; negative predictions are clamped to 0 and
/// counted. Throws DataError naming a missing covariate.
TripPrediction predict_trips(const RegressionModel& model, const CovariateTable& table);

// Serialization -------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

void write_model_csv(std::ostream& out, const RegressionModel& model);
nlohmann::json model_to_json(const RegressionModel& model);
RegressionModel model_from_json(const nlohmann::json& j);
nlohmann::json models_to_json(std::span<const RegressionModel> models);
std::vector<RegressionModel> models_from_json(const nlohmann::json& doc);

/// Side-by-side coefficient table (coefficient with significance stars, SE
/// in parentheses, adjusted R² and F at the bottom).
std::string format_model_table(std::span<const RegressionModel> models);

void write_screening(std::ostream& out, const ScreeningReport& report);
void write_covariates(std::ostream& out, const CovariateTable& table);

/// Coefficients and standard errors of four fitted reference models
/// (production/attraction × weekday/weekend), used as fixtures. Only
/// coefficients, standard errors, adjusted R² and F are known; t and p values
/// are left NaN.
const std::vector<RegressionModel>& reference_trip_generation_models();
const RegressionModel& reference_model(Direction direction, DayType day_type);

}  // namespace tripcast
