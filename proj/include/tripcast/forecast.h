#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <nlohmann/json.hpp>
#include "tripcast/domain.h"
#include "tripcast/tripgen.h"

namespace tripcast {

// Predicted trip ends of one (year, day type).
struct YearForecast {
  int year = 0;
  DayType day_type = DayType::kWeekday;
  std::vector<std::string> zone_ids;
  Eigen::VectorXd production;
  Eigen::VectorXd attraction;
  std::size_t clamped = 0;  // negative predictions set to 0

  double total_production() const { return production.sum(); }
  double total_attraction() const { return attraction.sum(); }
};

struct GrowthRecord {
  DayType day_type = DayType::kWeekday;
  Direction direction = Direction::kProduction;
  int year_a = 0;
  int year_b = 0;
  double total_a = 0.0;
  double total_b = 0.0;
  double decadal_growth = 0.0;  // fraction, 0.045 = 4.5% per decade
};

struct ForecastSet {
  std::vector<YearForecast> entries;  // sorted by (day_type, year)
  std::vector<GrowthRecord> growth;   // consecutive years plus first→last

  const YearForecast& at(int year, DayType day_type) const;
  std::vector<int> years() const;
};

/// Growth per decade implied by totals at two years:
/// (V_b / V_a)^(10 / (b - a)) - 1. Requires a < b and V_a > 0.
double decadal_growth(double value_a, int year_a, double value_b, int year_b);

/// Applies the fitted production and attraction models to every requested
/// year's covariate table. A day type is forecast when both of its models are
/// present. Throws DataError for a year without a table or a missing
/// covariate.
ForecastSet forecast_generation(std::span<const RegressionModel> models,
                                const std::map<int, CovariateTable>& tables,
                                std::span<const int> years);

/// Gravity-distributes each forecast with the base-year cost matrix and the
/// calibrated β of its day type. Zones in the cost matrix without a forecast
/// get zero trip ends; a forecast zone missing from the cost matrix is a
/// DataError.
std::vector<ODMatrix> forecast_distribution(const ForecastSet& forecasts, const CostMatrix& cost,
                                            std::span<const GravityModel> models);

// Square flow matrix with labelled rows/columns.
struct FlowMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd cells;
};

/// Sums zone cells into county cells; counties sorted by id. Throws DataError
/// for an unmapped zone.
FlowMatrix aggregate_flows(const ODMatrix& odm,
                           const std::map<std::string, std::string>& zone_county);

/// Group sum of a zone vector into counties (sorted ids).
std::map<std::string, double> aggregate_by_county(
    const std::vector<std::string>& zone_ids, const Eigen::VectorXd& values,
    const std::map<std::string, std::string>& zone_county);

struct FlowChange {
  std::vector<std::string> ids;
  Eigen::MatrixXd base;
  Eigen::MatrixXd target;
  Eigen::MatrixXd absolute;
  Eigen::MatrixXd percent;  // NaN where base <= 0
};

FlowChange flow_change(const FlowMatrix& base, const FlowMatrix& target);

/// Percent change, or NaN when the base is not positive.
double percent_change(double base, double target);

struct ComparisonReport {
  std::vector<std::string> zone_ids;
  std::vector<double> predicted;
  std::vector<double> reference;
  std::vector<double> ratio;  // predicted / reference, NaN where reference <= 0
  double rho = 0.0;
  double slope = 0.0;      // predicted = intercept + slope · reference
  double intercept = 0.0;
};

/// Pairs zones present in both maps. Throws DataError with fewer than 3
/// pairs or constant reference or predicted values.
ComparisonReport compare_models(const std::map<std::string, double>& predicted,
                                const std::map<std::string, double>& reference);

/// Linear interpolation between (year_a, value_a) and (year_b, value_b).
/// Throws invalid_argument when year_a >= year_b or target lies outside.
double interpolate_years(int year_a, double value_a, int year_b, double value_b, int target);

// Exports --------------------------------------------------------------------

void write_forecast(std::ostream& out, const ForecastSet& set);
void write_growth(std::ostream& out, std::span<const GrowthRecord> growth);
void write_flows(std::ostream& out, const FlowMatrix& flows);
void write_flow_change(std::ostream& out, const FlowChange& change);
/// Zone-level production/attraction change between two forecasts of one day
/// type.
void write_generation_change(std::ostream& out, const YearForecast& base,
                             const YearForecast& target);
void write_comparison(std::ostream& out, const ComparisonReport& report);
std::string comparison_summary(const ComparisonReport& report, const std::string& title);

/// GeoJSON layer with a `ratio` property per zone (target/base production),
/// omitted where undefined.
nlohmann::json ratio_layer(std::span<const Zone> zones, const YearForecast& base,
                           const YearForecast& target);

}  // namespace tripcast
