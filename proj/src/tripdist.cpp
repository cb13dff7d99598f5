#include "tripcast/tripdist.h"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "tripcast/csv.h"
#include "tripcast/error.h"
#include "tripcast/parallel.h"

namespace tripcast {

Eigen::MatrixXd gravity_distribute(const Eigen::VectorXd& production,
                                   const Eigen::VectorXd& attraction,
                                   const Eigen::MatrixXd& cost, double beta) {
  const Eigen::Index n = production.size();
  if (attraction.size() != n || cost.rows() != n || cost.cols() != n)
    throw std::invalid_argument("gravity_distribute: shape mismatch");
  if (!(beta >= 0.0)) throw std::invalid_argument("gravity_distribute: beta must be >= 0");
  for (Eigen::Index j = 0; j < n; ++j)
    if (!(attraction(j) >= 0.0))
      throw std::invalid_argument("gravity_distribute: negative attraction");
  if (!(cost.array() > 0.0).all())
    throw std::invalid_argument("gravity_distribute: costs must be positive");

  // log A_j - β log D_ij, normalized with log-sum-exp per row.
  Eigen::VectorXd log_a(n);
  for (Eigen::Index j = 0; j < n; ++j)
    log_a(j) = attraction(j) > 0 ? std::log(attraction(j))
                                 : -std::numeric_limits<double>::infinity();

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (production(i) == 0.0) continue;
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      w(j) = log_a(j) - beta * std::log(cost(i, j));
      top = std::max(top, w(j));
    }
    if (!std::isfinite(top)) throw DataError("undistributable production");
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      w(j) = std::exp(w(j) - top);
      total += w(j);
    }
    out.row(i) = (production(i) / total) * w.transpose();
  }
  return out;
}

double distribution_mse(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& observed) {
  if (predicted.rows() != observed.rows() || predicted.cols() != observed.cols())
    throw std::invalid_argument("distribution_mse: shape mismatch");
  if (predicted.size() == 0) return 0.0;
  return (predicted - observed).squaredNorm() / static_cast<double>(predicted.size());
}

std::vector<double> beta_grid(const BetaSearch& s) {
  if (!(s.step > 0)) throw ConfigError("beta step must be positive");
  if (!(s.range_min >= 0) || s.range_max < s.range_min)
    throw ConfigError("beta range must satisfy 0 <= min <= max");
  std::vector<double> grid;
  for (long k = 0;; ++k) {
    const double b = std::round((s.range_min + static_cast<double>(k) * s.step) * 1e9) / 1e9;
    if (b > s.range_max + 1e-9) break;
    grid.push_back(b);
  }
  return grid;
}

GravityModel calibrate_beta(const Eigen::VectorXd& production, const Eigen::VectorXd& attraction,
                            const Eigen::MatrixXd& cost, const Eigen::MatrixXd& observed,
                            const BetaSearch& search, int workers) {
  GravityModel model;
  model.range_min = search.range_min;
  model.range_max = search.range_max;
  model.grid = beta_grid(search);
  model.mse.assign(model.grid.size(), 0.0);
  parallel_for(model.grid.size(), workers, [&](std::size_t k) {
    model.mse[k] =
        distribution_mse(gravity_distribute(production, attraction, cost, model.grid[k]), observed);
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k < model.grid.size(); ++k)
    if (model.mse[k] < model.mse[best]) best = k;
  model.beta = model.grid[best];
  return model;
}

void write_beta_curve(std::ostream& out, const GravityModel& model) {
  csv::Writer w(out);
  w.row({"beta", "mse"});
  for (std::size_t k = 0; k < model.grid.size(); ++k) {
    w.field(model.grid[k]).field(model.mse[k]);
    w.end_row();
  }
}

nlohmann::json gravity_to_json(const GravityModel& m) {
  const bool mean = m.aggregation.statistic == CostStatistic::kMean;
  const bool time = m.aggregation.measure == CostMeasure::kTravelTime;
  return {{"format", "tripcast.gravity"},
          {"version", kGravityFormatVersion},
          {"beta", m.beta},
          {"aggregation", {{"statistic", mean ? "mean" : "median"},
                           {"measure", time ? "travel_time" : "path_length"}}},
          {"day_type", to_string(m.day_type)},
          {"range", {m.range_min, m.range_max}},
          {"grid", m.grid},
          {"mse", m.mse}};
}

GravityModel gravity_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "tripcast.gravity")
      throw DataError("not a gravity model document");
    if (doc.at("version").get<int>() != kGravityFormatVersion)
      throw DataError("unsupported gravity model version");
    GravityModel m;
    m.beta = doc.at("beta").get<double>();
    const auto& agg = doc.at("aggregation");
    m.aggregation = parse_cost_aggregation(agg.at("statistic").get<std::string>(),
                                           agg.at("measure").get<std::string>());
    m.day_type = parse_day_type(doc.at("day_type").get<std::string>());
    if (doc.contains("range")) {
      m.range_min = doc["range"].at(0).get<double>();
      m.range_max = doc["range"].at(1).get<double>();
    }
    if (doc.contains("grid")) m.grid = doc["grid"].get<std::vector<double>>();
    if (doc.contains("mse")) m.mse = doc["mse"].get<std::vector<double>>();
    if (m.grid.size() != m.mse.size()) throw DataError("gravity model JSON: grid/mse length differ");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("gravity model JSON: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("gravity model JSON: ") + e.what());
  }
}

}  // namespace tripcast
