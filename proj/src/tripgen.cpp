#include "tripcast/tripgen.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "tripcast/csv.h"
#include "tripcast/ingest.h"

namespace tripcast {

std::optional<Eigen::Index> CovariateTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<Eigen::Index>(i);
  return std::nullopt;
}

Eigen::MatrixXd CovariateTable::select(std::span<const std::string> columns) const {
  Eigen::MatrixXd out(values.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    auto pos = column(columns[c]);
    if (!pos) throw DataError("missing covariate '" + columns[c] + "'");
    out.col(static_cast<Eigen::Index>(c)) = values.col(*pos);
  }
  return out;
}

std::optional<Eigen::Index> CovariateTable::row(const std::string& zone_id) const {
  for (std::size_t i = 0; i < zone_ids.size(); ++i)
    if (zone_ids[i] == zone_id) return static_cast<Eigen::Index>(i);
  return std::nullopt;
}

// ---------------------------------------------------------------------------

namespace {

struct CountRule {
  const char* pct;
  const char* count;
};

constexpr CountRule kCountRules[] = {
    {attr::kPctPopGovQuarters, raw_attr::kPopGovQuarters},
    {attr::kPctEmployed, raw_attr::kEmployed},
    {attr::kPctEmpAgcon, raw_attr::kEmpAgcon},
    {attr::kPctEmpIndustry, raw_attr::kEmpIndustry},
    {attr::kPctEmpRetail, raw_attr::kEmpRetail},
    {attr::kPctEmpFoodLodging, raw_attr::kEmpFoodLodging},
    {attr::kPctEmpProSrv, raw_attr::kEmpProSrv},
    {attr::kPctEmpGovnmt, raw_attr::kEmpGovnmt},
    {attr::kPctEmpOthSrv, raw_attr::kEmpOthSrv},
};

std::optional<double> normalized_value(const SeaRecord& rec, const std::string& name,
                                       double population,
                                       const std::map<std::string, double>& areas) {
  if (name == attr::kTotalPopulation) return population;
  if (name == attr::kPopulationDensity) {
    auto area = areas.find(rec.zone_id);
    if (area != areas.end() && area->second > 0) return population / area->second;
    return rec.get(name);
  }
  for (const auto& rule : kCountRules) {
    if (name != rule.pct) continue;
    if (auto count = rec.get(rule.count)) return 100.0 * *count / population;
    return rec.get(name);
  }
  return rec.get(name);
}

bool has_employment(const SeaRecord& rec) {
  for (const auto& rule : kCountRules) {
    if (auto c = rec.get(rule.count); c && *c != 0.0) return true;
    if (auto p = rec.get(rule.pct); p && *p != 0.0) return true;
  }
  return false;
}

std::string join(std::span<const std::string> items, const char* sep = ", ") {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s += sep;
    s += items[i];
  }
  return s;
}

}  // namespace

CovariateTable normalize_sea(std::span<const SeaRecord> records, int year,
                             const std::map<std::string, double>& zone_area_km2) {
  CovariateTable table;
  table.year = year;
  std::vector<const SeaRecord*> kept;
  for (const auto& rec : records) {
    if (rec.year != year) continue;
    auto pop = rec.get(attr::kTotalPopulation);
    if (!pop) {
      table.excluded.emplace_back(rec.zone_id, "missing total_population");
      continue;
    }
    if (*pop <= 0) {
      table.excluded.emplace_back(
          rec.zone_id, has_employment(rec) ? "zero population with nonzero employment"
                                           : "zero population");
      continue;
    }
    kept.push_back(&rec);
  }

  std::vector<std::string> candidates;
  for (const auto& name : canonical_sea_attributes()) {
    bool any = false, all = true;
    for (const auto* rec : kept) {
      const bool present =
          normalized_value(*rec, name, *rec->get(attr::kTotalPopulation), zone_area_km2)
              .has_value();
      any = any || present;
      all = all && present;
    }
    if (all && !kept.empty()) {
      candidates.push_back(name);
    } else if (any) {
      table.incomplete.push_back(name);
    }
  }

  table.names = candidates;
  table.values.resize(static_cast<Eigen::Index>(kept.size()),
                      static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const double pop = *kept[r]->get(attr::kTotalPopulation);
    table.zone_ids.push_back(kept[r]->zone_id);
    for (std::size_t c = 0; c < candidates.size(); ++c)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          *normalized_value(*kept[r], candidates[c], pop, zone_area_km2);
  }
  return table;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("pearson: length mismatch");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return NAN;
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

ScreeningReport correlation_screen(const CovariateTable& table, double threshold,
                                   const std::vector<std::string>& drop_priority) {
  if (table.values.rows() < 3)
    throw std::invalid_argument("correlation_screen: needs at least 3 zones");
  ScreeningReport rep;
  rep.threshold = threshold;
  std::vector<std::vector<double>> cols;
  for (std::size_t c = 0; c < table.names.size(); ++c) {
    const auto col = table.values.col(static_cast<Eigen::Index>(c));
    std::vector<double> v(col.data(), col.data() + col.size());
    const bool constant =
        std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
    if (constant) {
      rep.constant.push_back(table.names[c]);
      continue;
    }
    rep.names.push_back(table.names[c]);
    cols.push_back(std::move(v));
  }
  const auto k = static_cast<Eigen::Index>(rep.names.size());
  rep.rho = Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) {
      const double r = pearson(cols[static_cast<std::size_t>(a)], cols[static_cast<std::size_t>(b)]);
      rep.rho(a, b) = rep.rho(b, a) = r;
      if (std::abs(r) >= threshold)
        rep.flagged.push_back(
            {rep.names[static_cast<std::size_t>(a)], rep.names[static_cast<std::size_t>(b)], r});
    }
  }
  auto priority = [&](const std::string& name) -> std::size_t {
    auto it = std::find(drop_priority.begin(), drop_priority.end(), name);
    return static_cast<std::size_t>(it - drop_priority.begin());
  };
  std::set<std::string> dropped;
  for (const auto& pair : rep.flagged) {
    if (dropped.count(pair.a) || dropped.count(pair.b)) continue;
    const std::size_t pa = priority(pair.a), pb = priority(pair.b);
    if (pa == drop_priority.size() && pb == drop_priority.size()) continue;
    dropped.insert(pa <= pb ? pair.a : pair.b);
  }
  for (const auto& name : table.names) {
    if (dropped.count(name)) {
      rep.dropped.push_back(name);
    } else if (std::find(rep.constant.begin(), rep.constant.end(), name) ==
               rep.constant.end()) {
      rep.retained.push_back(name);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// OLS

RegressionModel fit_ols(const Eigen::MatrixXd& covariates, const Eigen::VectorXd& y,
                        const std::vector<std::string>& names) {
  const Eigen::Index n = covariates.rows();
  const Eigen::Index k = covariates.cols();
  const Eigen::Index p = k + 1;
  if (static_cast<Eigen::Index>(names.size()) != k)
    throw std::invalid_argument("fit_ols: one name per covariate column required");
  if (y.size() != n) throw std::invalid_argument("fit_ols: response length mismatch");
  if (n < p + 1)
    throw DataError("fit_ols: " + std::to_string(n) + " rows cannot fit " + std::to_string(p) +
                    " coefficients with a residual degree of freedom");

  std::vector<std::string> terms{"const"};
  terms.insert(terms.end(), names.begin(), names.end());

  Eigen::MatrixXd X(n, p);
  X.col(0).setOnes();
  X.rightCols(k) = covariates;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(X);
    lu.setThreshold(qr.threshold());
    const Eigen::MatrixXd kernel = lu.kernel();
    std::vector<std::string> dependent;
    if (kernel.cols() > 0) {
      const Eigen::VectorXd v = kernel.col(0);
      const double vmax = v.cwiseAbs().maxCoeff();
      for (Eigen::Index i = 0; i < p; ++i)
        if (std::abs(v(i)) > 1e-9 * vmax) dependent.push_back(terms[static_cast<std::size_t>(i)]);
    }
    throw RankDeficientError(dependent,
                             "rank-deficient design; linearly dependent columns: " +
                                 join(dependent));
  }

  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - X * beta;
  const double rss = resid.squaredNorm();
  const double df = static_cast<double>(n - p);
  const double sigma2 = rss / df;

  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd perm_cov = Rinv * Rinv.transpose();
  const auto& P = qr.colsPermutation();
  const Eigen::MatrixXd xtx_inv = P * perm_cov * P.transpose();

  RegressionModel m;
  m.terms = terms;
  m.n_obs = static_cast<std::size_t>(n);
  const boost::math::students_t tdist(df);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double b = beta(i);
    const double se = std::sqrt(std::max(0.0, sigma2 * xtx_inv(i, i)));
    double t;
    if (se > 0) {
      t = b / se;
    } else {
      t = b == 0.0 ? 0.0 : std::copysign(INFINITY, b);
    }
    double pval;
    if (std::isinf(t)) {
      pval = 0.0;
    } else {
      pval = 2.0 * boost::math::cdf(boost::math::complement(tdist, std::abs(t)));
    }
    m.coefficients.push_back(b);
    m.std_errors.push_back(se);
    m.t_stats.push_back(t);
    m.p_values.push_back(std::min(1.0, pval));
  }

  const double ybar = y.mean();
  const double tss = (y.array() - ybar).square().sum();
  m.r_squared = tss > 0 ? 1.0 - rss / tss : (rss == 0 ? 1.0 : 0.0);
  m.adj_r_squared = 1.0 - (1.0 - m.r_squared) * static_cast<double>(n - 1) / df;
  if (k == 0) {
    m.f_stat = 0.0;
    m.f_p_value = 1.0;
  } else if (rss == 0.0) {
    m.f_stat = INFINITY;
    m.f_p_value = 0.0;
  } else {
    const double ess = std::max(0.0, tss - rss);
    m.f_stat = (ess / static_cast<double>(k)) / sigma2;
    const boost::math::fisher_f fdist(static_cast<double>(k), df);
    m.f_p_value = boost::math::cdf(boost::math::complement(fdist, m.f_stat));
  }
  return m;
}

TripPrediction predict_trips(const RegressionModel& model, const CovariateTable& table) {
  const std::vector<std::string> cov = model.covariates();
  const Eigen::MatrixXd X = table.select(cov);
  TripPrediction out;
  out.zone_ids = table.zone_ids;
  out.raw = Eigen::VectorXd::Constant(X.rows(), model.coefficients.at(0));
  for (std::size_t c = 0; c < cov.size(); ++c)
    out.raw += model.coefficients[c + 1] * X.col(static_cast<Eigen::Index>(c));
  out.values = out.raw;
  for (Eigen::Index i = 0; i < out.values.size(); ++i) {
    if (out.values(i) < 0) {
      out.values(i) = 0.0;
      ++out.clamped;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return csv::format_double(v);
}

double num_from(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return NAN;
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
  }
  throw DataError("model JSON: expected a number");
}

}  // namespace

void write_model_csv(std::ostream& out, const RegressionModel& m) {
  csv::Writer w(out);
  w.row({"term", "coefficient", "std_error", "t_stat", "p_value"});
  for (std::size_t i = 0; i < m.terms.size(); ++i) {
    w.field(m.terms[i]).field(m.coefficients[i]).field(m.std_errors[i]).field(m.t_stats[i]).field(
        m.p_values[i]);
    w.end_row();
  }
}

nlohmann::json model_to_json(const RegressionModel& m) {
  nlohmann::json terms = nlohmann::json::array();
  for (std::size_t i = 0; i < m.terms.size(); ++i) {
    terms.push_back({{"term", m.terms[i]},
                     {"coefficient", num(m.coefficients[i])},
                     {"std_error", num(m.std_errors[i])},
                     {"t_stat", num(m.t_stats[i])},
                     {"p_value", num(m.p_values[i])}});
  }
  return {{"direction", to_string(m.direction)},
          {"day_type", to_string(m.day_type)},
          {"n_obs", m.n_obs},
          {"r_squared", num(m.r_squared)},
          {"adj_r_squared", num(m.adj_r_squared)},
          {"f_stat", num(m.f_stat)},
          {"f_p_value", num(m.f_p_value)},
          {"terms", std::move(terms)}};
}

RegressionModel model_from_json(const nlohmann::json& j) {
  RegressionModel m;
  m.direction = parse_direction(j.at("direction").get<std::string>());
  m.day_type = parse_day_type(j.at("day_type").get<std::string>());
  m.n_obs = j.at("n_obs").get<std::size_t>();
  m.r_squared = num_from(j.at("r_squared"));
  m.adj_r_squared = num_from(j.at("adj_r_squared"));
  m.f_stat = num_from(j.at("f_stat"));
  m.f_p_value = num_from(j.at("f_p_value"));
  for (const auto& t : j.at("terms")) {
    m.terms.push_back(t.at("term").get<std::string>());
    m.coefficients.push_back(num_from(t.at("coefficient")));
    m.std_errors.push_back(num_from(t.at("std_error")));
    m.t_stats.push_back(num_from(t.at("t_stat")));
    m.p_values.push_back(num_from(t.at("p_value")));
  }
  return m;
}

nlohmann::json models_to_json(std::span<const RegressionModel> models) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : models) arr.push_back(model_to_json(m));
  return {{"format", "tripcast.trip_generation"},
          {"version", kModelFormatVersion},
          {"models", std::move(arr)}};
}

std::vector<RegressionModel> models_from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != "tripcast.trip_generation")
    throw DataError("not a trip generation model document");
  if (doc.value("version", 0) != kModelFormatVersion)
    throw DataError("unsupported trip generation model version");
  std::vector<RegressionModel> out;
  for (const auto& m : doc.at("models")) out.push_back(model_from_json(m));
  return out;
}

std::string format_model_table(std::span<const RegressionModel> models) {
  std::vector<std::string> rows;
  for (const auto& m : models)
    for (const auto& t : m.terms)
      if (std::find(rows.begin(), rows.end(), t) == rows.end()) rows.push_back(t);

  auto stars = [](double p) -> std::string {
    if (!(p == p)) return "";
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
  };
  constexpr int kLabel = 26;
  constexpr int kCol = 24;
  std::ostringstream os;
  os << std::left << std::setw(kLabel) << "Covariate";
  for (const auto& m : models) {
    std::string head = std::string(to_string(m.direction)) + " " + to_string(m.day_type);
    os << std::setw(kCol) << head;
  }
  os << '\n';
  for (const auto& term : rows) {
    os << std::setw(kLabel) << term;
    for (const auto& m : models) {
      auto it = std::find(m.terms.begin(), m.terms.end(), term);
      if (it == m.terms.end()) {
        os << std::setw(kCol) << "";
        continue;
      }
      const auto i = static_cast<std::size_t>(it - m.terms.begin());
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(3) << m.coefficients[i] << stars(m.p_values[i])
           << " (" << std::setprecision(2) << m.std_errors[i] << ")";
      os << std::setw(kCol) << cell.str();
    }
    os << '\n';
  }
  os << std::setw(kLabel) << "Adjusted R^2";
  for (const auto& m : models) {
    std::ostringstream cell;
    cell << std::fixed << std::setprecision(3) << m.adj_r_squared;
    os << std::setw(kCol) << cell.str();
  }
  os << '\n' << std::setw(kLabel) << "F-statistic (Prob)";
  for (const auto& m : models) {
    std::ostringstream cell;
    cell << std::fixed << std::setprecision(1) << m.f_stat << " (" << m.f_p_value << ")";
    os << std::setw(kCol) << cell.str();
  }
  os << '\n' << std::setw(kLabel) << "Observations";
  for (const auto& m : models) os << std::setw(kCol) << m.n_obs;
  os << '\n';
  return os.str();
}

void write_screening(std::ostream& out, const ScreeningReport& report) {
  csv::Writer w(out);
  w.row({"covariate_a", "covariate_b", "rho", "flagged"});
  const auto k = static_cast<std::size_t>(report.rho.rows());
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      const double r = report.rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      w.field(report.names[a]).field(report.names[b]).field(r).field(
          std::abs(r) >= report.threshold ? "1" : "0");
      w.end_row();
    }
  }
}

void write_covariates(std::ostream& out, const CovariateTable& table) {
  csv::Writer w(out);
  w.field("zone_id");
  for (const auto& n : table.names) w.field(n);
  w.end_row();
  for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
    w.field(table.zone_ids[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) w.field(table.values(r, c));
    w.end_row();
  }
}

// ---------------------------------------------------------------------------
// Reference fixtures

namespace {

RegressionModel make_reference(Direction dir, DayType day, std::vector<double> coef,
                               std::vector<double> se, double adj_r2, double f) {
  RegressionModel m;
  m.terms = {"const",
             attr::kTotalPopulation,
             attr::kPctPopGovQuarters,
             attr::kAvgHhIncome,
             attr::kAvgVehicles,
             attr::kPctEmployed,
             attr::kPctEmpIndustry,
             attr::kPctEmpRetail,
             attr::kPctEmpFoodLodging,
             attr::kPctEmpProSrv};
  m.coefficients = std::move(coef);
  m.std_errors = std::move(se);
  m.t_stats.assign(m.terms.size(), NAN);
  m.p_values.assign(m.terms.size(), NAN);
  m.r_squared = NAN;
  m.adj_r_squared = adj_r2;
  m.f_stat = f;
  m.f_p_value = 0.0;
  m.direction = dir;
  m.day_type = day;
  return m;
}

}  // namespace

const std::vector<RegressionModel>& reference_trip_generation_models() {
  static const std::vector<RegressionModel> models = {
      make_reference(Direction::kProduction, DayType::kWeekday,
                     {-526.146, 0.483, 1344.826, 0.003, 214.119, 3.406, 366.771, 637.368,
                      896.288, 381.680},
                     {88.72, 0.00, 150.08, 0.00, 84.64, 0.55, 66.24, 82.63, 107.66, 68.99},
                     0.770, 1357.0),
      make_reference(Direction::kAttraction, DayType::kWeekday,
                     {-516.757, 0.482, 1411.755, 0.002, 212.882, 3.600, 371.531, 673.878,
                      945.145, 390.159},
                     {91.62, 0.00, 154.98, 0.00, 87.40, 0.57, 68.40, 85.33, 111.18, 71.25},
                     0.758, 1272.0),
      make_reference(Direction::kProduction, DayType::kWeekend,
                     {-374.123, 0.356, 475.288, 0.003, 185.729, 1.764, 129.971, 514.551,
                      789.855, 123.195},
                     {66.50, 0.00, 112.48, 0.00, 63.44, 0.41, 49.65, 61.93, 80.69, 51.71},
                     0.761, 1291.0),
      make_reference(Direction::kAttraction, DayType::kWeekend,
                     {-369.917, 0.361, 611.110, 0.002, 188.649, 2.006, 137.377, 598.531,
                      884.140, 124.241},
                     {72.78, 0.00, 123.11, 0.00, 69.43, 0.45, 54.34, 67.78, 88.32, 56.60},
                     0.733, 1117.0),
  };
  return models;
}

const RegressionModel& reference_model(Direction direction, DayType day_type) {
  for (const auto& m : reference_trip_generation_models())
    if (m.direction == direction && m.day_type == day_type) return m;
  throw std::logic_error("reference model not found");
}

}  // namespace tripcast
