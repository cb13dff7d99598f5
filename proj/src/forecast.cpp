#include "tripcast/forecast.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tripcast/csv.h"
#include "tripcast/error.h"
#include "tripcast/ingest.h"
#include "tripcast/tripdist.h"

namespace tripcast {

const YearForecast& ForecastSet::at(int year, DayType day_type) const {
  for (const auto& e : entries)
    if (e.year == year && e.day_type == day_type) return e;
  throw DataError("no " + std::string(to_string(day_type)) + " forecast for year " +
                  std::to_string(year));
}

std::vector<int> ForecastSet::years() const {
  std::set<int> ys;
  for (const auto& e : entries) ys.insert(e.year);
  return {ys.begin(), ys.end()};
}

double decadal_growth(double value_a, int year_a, double value_b, int year_b) {
  if (year_b <= year_a) throw std::invalid_argument("decadal_growth: years must increase");
  if (!(value_a > 0)) throw std::invalid_argument("decadal_growth: base total must be positive");
  return std::pow(value_b / value_a, 10.0 / static_cast<double>(year_b - year_a)) - 1.0;
}

namespace {

const RegressionModel* find_model(std::span<const RegressionModel> models, Direction dir,
                                  DayType day) {
  for (const auto& m : models)
    if (m.direction == dir && m.day_type == day) return &m;
  return nullptr;
}

void add_growth(ForecastSet& set, DayType day, const YearForecast& a, const YearForecast& b) {
  for (Direction dir : {Direction::kProduction, Direction::kAttraction}) {
    GrowthRecord g;
    g.day_type = day;
    g.direction = dir;
    g.year_a = a.year;
    g.year_b = b.year;
    g.total_a = dir == Direction::kProduction ? a.total_production() : a.total_attraction();
    g.total_b = dir == Direction::kProduction ? b.total_production() : b.total_attraction();
    g.decadal_growth = g.total_a > 0 ? decadal_growth(g.total_a, a.year, g.total_b, b.year) : NAN;
    set.growth.push_back(g);
  }
}

}  // namespace

ForecastSet forecast_generation(std::span<const RegressionModel> models,
                                const std::map<int, CovariateTable>& tables,
                                std::span<const int> years) {
  std::vector<int> ys(years.begin(), years.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  for (int y : ys)
    if (!tables.count(y)) throw DataError("no SEA covariates for year " + std::to_string(y));

  ForecastSet set;
  for (DayType day : {DayType::kWeekday, DayType::kWeekend}) {
    const auto* prod = find_model(models, Direction::kProduction, day);
    const auto* attr = find_model(models, Direction::kAttraction, day);
    if (!prod || !attr) continue;
    const std::size_t first = set.entries.size();
    for (int y : ys) {
      const auto& table = tables.at(y);
      const TripPrediction p = predict_trips(*prod, table);
      const TripPrediction a = predict_trips(*attr, table);
      YearForecast f;
      f.year = y;
      f.day_type = day;
      f.zone_ids = table.zone_ids;
      f.production = p.values;
      f.attraction = a.values;
      f.clamped = p.clamped + a.clamped;
      set.entries.push_back(std::move(f));
    }
    const std::size_t last = set.entries.size();
    for (std::size_t k = first + 1; k < last; ++k)
      add_growth(set, day, set.entries[k - 1], set.entries[k]);
    if (last - first > 2) add_growth(set, day, set.entries[first], set.entries[last - 1]);
  }
  if (set.entries.empty()) throw DataError("no day type has both production and attraction models");
  return set;
}

std::vector<ODMatrix> forecast_distribution(const ForecastSet& forecasts, const CostMatrix& cost,
                                            std::span<const GravityModel> models) {
  const auto n = static_cast<Eigen::Index>(cost.size());
  std::map<std::string, Eigen::Index> pos;
  for (Eigen::Index i = 0; i < n; ++i) pos[cost.zone_ids[static_cast<std::size_t>(i)]] = i;

  std::vector<ODMatrix> out;
  for (const auto& f : forecasts.entries) {
    const GravityModel* g = nullptr;
    for (const auto& m : models)
      if (m.day_type == f.day_type) g = &m;
    if (!g)
      throw DataError(std::string("no calibrated ") + to_string(f.day_type) + " gravity model");
    Eigen::VectorXd P = Eigen::VectorXd::Zero(n), A = Eigen::VectorXd::Zero(n);
    for (std::size_t z = 0; z < f.zone_ids.size(); ++z) {
      auto it = pos.find(f.zone_ids[z]);
      if (it == pos.end())
        throw DataError("forecast zone '" + f.zone_ids[z] + "' missing from the cost matrix");
      P(it->second) = f.production(static_cast<Eigen::Index>(z));
      A(it->second) = f.attraction(static_cast<Eigen::Index>(z));
    }
    ODMatrix odm;
    odm.zone_ids = cost.zone_ids;
    odm.day_type = f.day_type;
    odm.year = f.year;
    odm.cells = gravity_distribute(P, A, cost.cells, g->beta);
    odm.refresh_marginals();
    out.push_back(std::move(odm));
  }
  return out;
}

FlowMatrix aggregate_flows(const ODMatrix& odm,
                           const std::map<std::string, std::string>& zone_county) {
  std::set<std::string> counties;
  std::vector<std::string> of_zone;
  for (const auto& z : odm.zone_ids) {
    auto it = zone_county.find(z);
    if (it == zone_county.end()) throw DataError("zone '" + z + "' has no county");
    counties.insert(it->second);
    of_zone.push_back(it->second);
  }
  FlowMatrix flows;
  flows.ids.assign(counties.begin(), counties.end());
  std::map<std::string, Eigen::Index> pos;
  for (std::size_t c = 0; c < flows.ids.size(); ++c)
    pos[flows.ids[c]] = static_cast<Eigen::Index>(c);
  const auto m = static_cast<Eigen::Index>(flows.ids.size());
  flows.cells = Eigen::MatrixXd::Zero(m, m);
  const auto n = static_cast<Eigen::Index>(odm.zone_ids.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index ci = pos[of_zone[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = 0; j < n; ++j)
      flows.cells(ci, pos[of_zone[static_cast<std::size_t>(j)]]) += odm.cells(i, j);
  }
  return flows;
}

std::map<std::string, double> aggregate_by_county(
    const std::vector<std::string>& zone_ids, const Eigen::VectorXd& values,
    const std::map<std::string, std::string>& zone_county) {
  std::map<std::string, double> out;
  for (std::size_t z = 0; z < zone_ids.size(); ++z) {
    auto it = zone_county.find(zone_ids[z]);
    if (it == zone_county.end()) throw DataError("zone '" + zone_ids[z] + "' has no county");
    out[it->second] += values(static_cast<Eigen::Index>(z));
  }
  return out;
}

double percent_change(double base, double target) {
  return base > 0 ? 100.0 * (target - base) / base : NAN;
}

FlowChange flow_change(const FlowMatrix& base, const FlowMatrix& target) {
  if (base.ids != target.ids) throw DataError("flow_change: matrices have different labels");
  FlowChange c;
  c.ids = base.ids;
  c.base = base.cells;
  c.target = target.cells;
  c.absolute = target.cells - base.cells;
  c.percent = c.absolute;
  for (Eigen::Index i = 0; i < c.percent.rows(); ++i)
    for (Eigen::Index j = 0; j < c.percent.cols(); ++j)
      c.percent(i, j) = percent_change(base.cells(i, j), target.cells(i, j));
  return c;
}

ComparisonReport compare_models(const std::map<std::string, double>& predicted,
                                const std::map<std::string, double>& reference) {
  ComparisonReport r;
  for (const auto& [zone, p] : predicted) {
    auto it = reference.find(zone);
    if (it == reference.end()) continue;
    r.zone_ids.push_back(zone);
    r.predicted.push_back(p);
    r.reference.push_back(it->second);
    r.ratio.push_back(it->second > 0 ? p / it->second : NAN);
  }
  const std::size_t n = r.zone_ids.size();
  if (n < 3) throw DataError("compare_models: fewer than 3 paired zones");
  const double mx = mean(r.reference), my = mean(r.predicted);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = r.reference[i] - mx, dy = r.predicted[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0) throw DataError("compare_models: reference values have no variance");
  if (syy == 0) throw DataError("compare_models: predicted values have no variance");
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  r.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return r;
}

double interpolate_years(int year_a, double value_a, int year_b, double value_b, int target) {
  if (year_a >= year_b) throw std::invalid_argument("interpolate_years: need year_a < year_b");
  if (target < year_a || target > year_b)
    throw std::invalid_argument("interpolate_years: target year " + std::to_string(target) +
                                " outside [" + std::to_string(year_a) + ", " +
                                std::to_string(year_b) + "]");
  const double t = static_cast<double>(target - year_a) / static_cast<double>(year_b - year_a);
  return value_a + t * (value_b - value_a);
}

// ---------------------------------------------------------------------------

namespace {

csv::Writer& field_or_blank(csv::Writer& w, double v) {
  return std::isnan(v) ? w.blank() : w.field(v);
}

}  // namespace

void write_forecast(std::ostream& out, const ForecastSet& set) {
  csv::Writer w(out);
  w.row({"year", "day_type", "zone_id", "production", "attraction"});
  for (const auto& f : set.entries) {
    for (std::size_t z = 0; z < f.zone_ids.size(); ++z) {
      const auto i = static_cast<Eigen::Index>(z);
      w.field(f.year).field(to_string(f.day_type)).field(f.zone_ids[z]).field(f.production(i)).field(
          f.attraction(i));
      w.end_row();
    }
  }
}

void write_growth(std::ostream& out, std::span<const GrowthRecord> growth) {
  csv::Writer w(out);
  w.row({"day_type", "direction", "year_a", "year_b", "total_a", "total_b", "decadal_growth_pct"});
  for (const auto& g : growth) {
    w.field(to_string(g.day_type)).field(to_string(g.direction)).field(g.year_a).field(g.year_b);
    w.field(g.total_a).field(g.total_b);
    field_or_blank(w, 100.0 * g.decadal_growth);
    w.end_row();
  }
}

void write_flows(std::ostream& out, const FlowMatrix& flows) {
  csv::Writer w(out);
  w.row({"origin", "destination", "value"});
  for (std::size_t i = 0; i < flows.ids.size(); ++i) {
    for (std::size_t j = 0; j < flows.ids.size(); ++j) {
      w.field(flows.ids[i]).field(flows.ids[j]).field(
          flows.cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      w.end_row();
    }
  }
}

void write_flow_change(std::ostream& out, const FlowChange& c) {
  csv::Writer w(out);
  w.row({"origin", "destination", "base", "target", "change", "pct_change"});
  for (std::size_t i = 0; i < c.ids.size(); ++i) {
    for (std::size_t j = 0; j < c.ids.size(); ++j) {
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      w.field(c.ids[i]).field(c.ids[j]).field(c.base(a, b)).field(c.target(a, b)).field(
          c.absolute(a, b));
      field_or_blank(w, c.percent(a, b));
      w.end_row();
    }
  }
}

void write_generation_change(std::ostream& out, const YearForecast& base,
                             const YearForecast& target) {
  std::map<std::string, Eigen::Index> pos;
  for (std::size_t z = 0; z < target.zone_ids.size(); ++z)
    pos[target.zone_ids[z]] = static_cast<Eigen::Index>(z);
  csv::Writer w(out);
  w.row({"zone_id", "production_base", "production_target", "production_pct",
         "attraction_base", "attraction_target", "attraction_pct"});
  for (std::size_t z = 0; z < base.zone_ids.size(); ++z) {
    auto it = pos.find(base.zone_ids[z]);
    if (it == pos.end()) continue;
    const auto i = static_cast<Eigen::Index>(z);
    const double pb = base.production(i), pt = target.production(it->second);
    const double ab = base.attraction(i), at = target.attraction(it->second);
    w.field(base.zone_ids[z]).field(pb).field(pt);
    field_or_blank(w, percent_change(pb, pt));
    w.field(ab).field(at);
    field_or_blank(w, percent_change(ab, at));
    w.end_row();
  }
}

void write_comparison(std::ostream& out, const ComparisonReport& r) {
  csv::Writer w(out);
  w.row({"zone_id", "predicted", "reference", "ratio"});
  for (std::size_t i = 0; i < r.zone_ids.size(); ++i) {
    w.field(r.zone_ids[i]).field(r.predicted[i]).field(r.reference[i]);
    field_or_blank(w, r.ratio[i]);
    w.end_row();
  }
}

std::string comparison_summary(const ComparisonReport& r, const std::string& title) {
  const double tp = std::accumulate(r.predicted.begin(), r.predicted.end(), 0.0);
  const double tr = std::accumulate(r.reference.begin(), r.reference.end(), 0.0);
  std::ostringstream os;
  os << title << "\n"
     << "paired zones: " << r.zone_ids.size() << "\n"
     << std::fixed << std::setprecision(4) << "pearson rho: " << r.rho << "\n"
     << "fit: predicted = " << r.intercept << " + " << r.slope << " * reference\n"
     << std::setprecision(1) << "total predicted: " << tp << "\n"
     << "total reference: " << tr << "\n";
  return os.str();
}

nlohmann::json ratio_layer(std::span<const Zone> zones, const YearForecast& base,
                           const YearForecast& target) {
  std::map<std::string, double> b, t;
  for (std::size_t z = 0; z < base.zone_ids.size(); ++z)
    b[base.zone_ids[z]] = base.production(static_cast<Eigen::Index>(z));
  for (std::size_t z = 0; z < target.zone_ids.size(); ++z)
    t[target.zone_ids[z]] = target.production(static_cast<Eigen::Index>(z));
  std::map<std::string, std::map<std::string, double>> props;
  for (const auto& [zone, vb] : b) {
    auto it = t.find(zone);
    if (it == t.end() || !(vb > 0)) continue;
    props[zone]["ratio"] = it->second / vb;
    props[zone]["production_base"] = vb;
    props[zone]["production_target"] = it->second;
  }
  return zones_to_geojson(zones, props);
}

}  // namespace tripcast
