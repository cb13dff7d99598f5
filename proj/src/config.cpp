#include "tripcast/config.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

#include "tripcast/error.h"
#include "tripcast/quality.h"

namespace tripcast {

namespace {

const std::vector<std::string>& default_covariates() {
  static const std::vector<std::string> names = {
      attr::kTotalPopulation,   attr::kPctPopGovQuarters, attr::kAvgHhIncome,
      attr::kAvgVehicles,       attr::kPctEmployed,       attr::kPctEmpIndustry,
      attr::kPctEmpRetail,      attr::kPctEmpFoodLodging, attr::kPctEmpProSrv};
  return names;
}

// Reads the keys of one TOML section, remembering which ones were consumed
// so leftovers can be reported as unknown.
class Section {
 public:
  Section(const toml::table* table, std::string name, std::vector<std::string>& errors)
      : table_(table), name_(std::move(name)), errors_(errors) {}

  ~Section() {
    if (!table_) return;
    for (auto&& [key, node] : *table_) {
      (void)node;
      if (!seen_.count(std::string(key.str())))
        errors_.push_back("unknown key '" + name_ + "." + std::string(key.str()) + "'");
    }
  }

  void get(const char* key, std::string& out) {
    if (auto* n = find(key)) {
      if (auto v = n->value<std::string>()) {
        out = *v;
      } else {
        bad(key, "a string");
      }
    }
  }

  void get(const char* key, double& out) {
    if (auto* n = find(key)) {
      if (n->is_number()) {
        out = *n->value<double>();
      } else {
        bad(key, "a number");
      }
    }
  }

  void get(const char* key, int& out) {
    if (auto* n = find(key)) {
      if (n->is_integer()) {
        out = static_cast<int>(*n->value<std::int64_t>());
      } else {
        bad(key, "an integer");
      }
    }
  }

  void get(const char* key, std::int64_t& out) {
    if (auto* n = find(key)) {
      if (n->is_integer()) {
        out = *n->value<std::int64_t>();
      } else {
        bad(key, "an integer");
      }
    }
  }

  void get(const char* key, std::uint64_t& out) {
    std::int64_t v = static_cast<std::int64_t>(out);
    const std::size_t before = errors_.size();
    get(key, v);
    if (errors_.size() != before) return;
    if (v < 0) {
      bad(key, "a non-negative integer");
      return;
    }
    out = static_cast<std::uint64_t>(v);
  }

  void get(const char* key, std::vector<std::string>& out) {
    if (auto* n = find(key)) {
      const auto* arr = n->as_array();
      if (!arr) return bad(key, "an array of strings");
      std::vector<std::string> v;
      for (auto&& e : *arr) {
        auto s = e.value<std::string>();
        if (!s) return bad(key, "an array of strings");
        v.push_back(*s);
      }
      out = std::move(v);
    }
  }

  void get(const char* key, std::vector<int>& out) {
    if (auto* n = find(key)) {
      const auto* arr = n->as_array();
      if (!arr) return bad(key, "an array of integers");
      std::vector<int> v;
      for (auto&& e : *arr) {
        if (!e.is_integer()) return bad(key, "an array of integers");
        v.push_back(static_cast<int>(*e.value<std::int64_t>()));
      }
      out = std::move(v);
    }
  }

 private:
  const toml::node* find(const char* key) {
    seen_.insert(key);
    if (!table_) return nullptr;
    return table_->get(key);
  }

  void bad(const char* key, const char* expected) {
    errors_.push_back("key '" + name_ + "." + key + "' must be " + expected);
  }

  const toml::table* table_;
  std::string name_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

const std::set<std::string>& known_sections() {
  static const std::set<std::string> s = {"paths",       "general", "quality", "homes",
                                          "stays",       "zones",   "costs",   "calibration",
                                          "tripgen",     "forecast", "compare", "synth"};
  return s;
}

void apply_override(toml::table& root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + spec + "' must be section.key=value");
  std::string key = spec.substr(0, eq);
  std::string value = spec.substr(eq + 1);
  const auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size() ||
      key.find('.', dot + 1) != std::string::npos)
    throw ConfigError("override key '" + key + "' must be section.key");
  const std::string section = key.substr(0, dot);
  const std::string name = key.substr(dot + 1);

  toml::table parsed;
  try {
    parsed = toml::parse("v = " + value);
  } catch (const toml::parse_error&) {
    parsed = toml::table{{"v", value}};
  }
  if (!root.contains(section)) root.insert(section, toml::table{});
  auto* tbl = root[section].as_table();
  if (!tbl) throw ConfigError("'" + section + "' is not a table");
  tbl->insert_or_assign(name, *parsed.get("v"));
}

template <class T>
void check(std::vector<std::string>& errors, bool ok, const char* key, const T& rule) {
  if (!ok) errors.push_back(std::string("key '") + key + "' " + rule);
}

PipelineConfig build(const toml::table& root) {
  std::vector<std::string> errors;
  for (auto&& [key, node] : root) {
    const std::string k(key.str());
    if (!known_sections().count(k)) {
      errors.push_back("unknown section '" + k + "'");
    } else if (!node.is_table()) {
      errors.push_back("'" + k + "' must be a table");
    }
  }
  auto table = [&](const char* name) { return root[name].as_table(); };

  PipelineConfig c;
  {
    Section s(table("paths"), "paths", errors);
    s.get("output_dir", c.paths.output_dir);
    s.get("pings", c.paths.pings);
    s.get("zones", c.paths.zones);
    s.get("sea", c.paths.sea);
    s.get("population", c.paths.population);
  }
  {
    Section s(table("general"), "general", errors);
    s.get("timezone", c.general.timezone);
    s.get("seed", c.general.seed);
    s.get("workers", c.general.workers);
    s.get("year", c.general.year);
  }
  {
    Section s(table("quality"), "quality", errors);
    s.get("max_accuracy_m", c.quality.max_accuracy_m);
    s.get("min_bins", c.quality.min_bins);
    s.get("min_days", c.quality.min_days);
    s.get("max_days", c.quality.max_days);
  }
  {
    Section s(table("homes"), "homes", errors);
    s.get("bandwidth_m", c.homes.mean_shift.bandwidth_m);
    s.get("tolerance_m", c.homes.mean_shift.tolerance_m);
    s.get("max_iterations", c.homes.mean_shift.max_iterations);
    s.get("night_start_hour", c.homes.window.start_hour);
    s.get("night_end_hour", c.homes.window.end_hour);
  }
  {
    Section s(table("stays"), "stays", errors);
    s.get("dist_m", c.stays.dist_m);
    s.get("min_stay_s", c.stays.min_stay_s);
    s.get("max_gap_s", c.stays.max_gap_s);
  }
  {
    Section s(table("zones"), "zones", errors);
    std::string construction = "feature";
    s.get("construction", construction);
    if (construction == "feature") {
      c.zones.construction = ZoneConstruction::kPerFeature;
    } else if (construction == "part") {
      c.zones.construction = ZoneConstruction::kPerPart;
    } else {
      errors.push_back("key 'zones.construction' must be 'feature' or 'part'");
    }
    s.get("zone_id_property", c.zones.zone_id_property);
    s.get("county_id_property", c.zones.county_id_property);
  }
  {
    Section s(table("costs"), "costs", errors);
    std::string statistic = "median", measure = "path_length";
    s.get("statistic", statistic);
    s.get("measure", measure);
    try {
      c.costs = parse_cost_aggregation(statistic, measure);
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
    s.get("default_speed_mps", c.cost_fallback.default_speed_mps);
    s.get("min_cost", c.cost_fallback.min_cost);
  }
  {
    Section s(table("calibration"), "calibration", errors);
    s.get("beta_min", c.calibration.range_min);
    s.get("beta_max", c.calibration.range_max);
    s.get("beta_step", c.calibration.step);
  }
  {
    Section s(table("tripgen"), "tripgen", errors);
    s.get("covariates", c.tripgen.covariates);
    s.get("correlation_threshold", c.tripgen.correlation_threshold);
    s.get("drop_priority", c.tripgen.drop_priority);
  }
  {
    Section s(table("forecast"), "forecast", errors);
    s.get("years", c.forecast.years);
  }
  {
    Section s(table("compare"), "compare", errors);
    s.get("reference", c.compare.reference);
    std::string day = to_string(c.compare.day_type), dir = to_string(c.compare.direction);
    s.get("day_type", day);
    s.get("direction", dir);
    try {
      c.compare.day_type = parse_day_type(day);
      c.compare.direction = parse_direction(dir);
    } catch (const std::exception& e) {
      errors.push_back(std::string("compare: ") + e.what());
    }
  }
  {
    Section s(table("synth"), "synth", errors);
    auto& y = c.synth;
    std::string format = "csv";
    s.get("format", format);
    if (format == "csv") {
      c.synth_format = PingFormat::kCsv;
    } else if (format == "ndjson") {
      c.synth_format = PingFormat::kNdjson;
    } else {
      errors.push_back("key 'synth.format' must be 'csv' or 'ndjson'");
    }
    s.get("grid_cols", y.grid_cols);
    s.get("grid_rows", y.grid_rows);
    s.get("county_block", y.county_block);
    s.get("zone_size_m", y.zone_size_m);
    s.get("origin_lon", y.origin_lon);
    s.get("origin_lat", y.origin_lat);
    s.get("locations_per_zone", y.locations_per_zone);
    s.get("min_location_sep_m", y.min_location_sep_m);
    s.get("residents", y.residents);
    s.get("sampling_rate", y.sampling_rate);
    s.get("attraction_min", y.attraction_min);
    s.get("attraction_max", y.attraction_max);
    s.get("beta", y.beta);
    s.get("start_month", y.start_month);
    s.get("start_day", y.start_day);
    s.get("days", y.days);
    s.get("weekday_tour_probability", y.weekday_tour_probability);
    s.get("weekend_tour_probability", y.weekend_tour_probability);
    s.get("second_tour_probability", y.second_tour_probability);
    s.get("activity_min_s", y.activity_min_s);
    s.get("activity_max_s", y.activity_max_s);
    s.get("stay_cadence_s", y.stay_cadence_s);
    s.get("moving_cadence_s", y.moving_cadence_s);
    s.get("speed_mps", y.speed_mps);
    s.get("noise_m", y.noise_m);
    s.get("bad_accuracy_fraction", y.bad_accuracy_fraction);
    s.get("sparse_device_fraction", y.sparse_device_fraction);
    s.get("sparse_pings_per_day", y.sparse_pings_per_day);
    s.get("sea_years", y.sea_years);
    s.get("population_growth_per_decade", y.population_growth_per_decade);
  }
  c.synth.seed = c.general.seed;
  c.synth.timezone = c.general.timezone;
  c.synth.start_year = c.general.year;

  // Bounds.
  check(errors, !c.paths.output_dir.empty(), "paths.output_dir", "must not be empty");
  check(errors, c.general.workers >= 1 && c.general.workers <= 256, "general.workers",
        "must be in [1, 256]");
  check(errors, c.general.year >= 1971 && c.general.year <= 2200, "general.year",
        "must be in [1971, 2200]");
  check(errors, c.quality.max_accuracy_m > 0, "quality.max_accuracy_m", "must be positive");
  check(errors, c.quality.min_bins >= 1 && c.quality.min_bins <= kBinsPerDay, "quality.min_bins",
        "must be in [1, 48]");
  check(errors, c.quality.max_days >= 1 && c.quality.max_days <= 366, "quality.max_days",
        "must be in [1, 366]");
  check(errors, c.quality.min_days >= 1 && c.quality.min_days <= c.quality.max_days,
        "quality.min_days", "must be in [1, quality.max_days]");
  check(errors, c.homes.mean_shift.bandwidth_m > 0, "homes.bandwidth_m", "must be positive");
  check(errors, c.homes.mean_shift.tolerance_m > 0, "homes.tolerance_m", "must be positive");
  check(errors, c.homes.mean_shift.max_iterations >= 1, "homes.max_iterations", "must be >= 1");
  check(errors, c.homes.window.start_hour >= 0 && c.homes.window.start_hour < 24,
        "homes.night_start_hour", "must be in [0, 23]");
  check(errors, c.homes.window.end_hour >= 0 && c.homes.window.end_hour < 24,
        "homes.night_end_hour", "must be in [0, 23]");
  check(errors, c.homes.window.start_hour != c.homes.window.end_hour, "homes.night_end_hour",
        "must differ from homes.night_start_hour");
  check(errors, c.stays.dist_m > 0, "stays.dist_m", "must be positive");
  check(errors, c.stays.min_stay_s >= 0, "stays.min_stay_s", "must be >= 0");
  check(errors, c.stays.max_gap_s > 0, "stays.max_gap_s", "must be positive");
  check(errors, c.cost_fallback.default_speed_mps > 0, "costs.default_speed_mps",
        "must be positive");
  check(errors, c.cost_fallback.min_cost > 0, "costs.min_cost", "must be positive");
  check(errors, c.calibration.range_min > 0, "calibration.beta_min", "must be positive");
  check(errors, c.calibration.range_max >= c.calibration.range_min, "calibration.beta_max",
        "must be >= calibration.beta_min");
  check(errors, c.calibration.step > 0, "calibration.beta_step", "must be positive");
  check(errors,
        c.tripgen.correlation_threshold > 0 && c.tripgen.correlation_threshold <= 1,
        "tripgen.correlation_threshold", "must be in (0, 1]");
  for (const auto& cov : c.tripgen.covariates) {
    const auto& names = canonical_sea_attributes();
    check(errors, std::find(names.begin(), names.end(), cov) != names.end(),
          "tripgen.covariates", "contains unknown covariate '" + cov + "'");
  }
  for (int y : c.forecast.years)
    check(errors, y >= 1900 && y <= 2200, "forecast.years", "must lie in [1900, 2200]");
  try {
    TimeZone tz(c.general.timezone);
  } catch (const ConfigError& e) {
    errors.push_back(e.what());
  }
  try {
    validate(c.synth);
  } catch (const ConfigError& e) {
    errors.push_back(e.what());
  }

  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return c;
}

PipelineConfig from_table(toml::table root, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) apply_override(root, o);
  return build(root);
}

}  // namespace

PipelineConfig::PipelineConfig() { tripgen.covariates = default_covariates(); }

nlohmann::json PipelineConfig::to_json() const {
  const auto& y = synth;
  return {
      {"paths",
       {{"output_dir", paths.output_dir},
        {"pings", paths.pings},
        {"zones", paths.zones},
        {"sea", paths.sea},
        {"population", paths.population}}},
      {"general",
       {{"timezone", general.timezone},
        {"seed", general.seed},
        {"workers", general.workers},
        {"year", general.year}}},
      {"quality",
       {{"max_accuracy_m", quality.max_accuracy_m},
        {"min_bins", quality.min_bins},
        {"min_days", quality.min_days},
        {"max_days", quality.max_days}}},
      {"homes",
       {{"bandwidth_m", homes.mean_shift.bandwidth_m},
        {"tolerance_m", homes.mean_shift.tolerance_m},
        {"max_iterations", homes.mean_shift.max_iterations},
        {"night_start_hour", homes.window.start_hour},
        {"night_end_hour", homes.window.end_hour}}},
      {"stays",
       {{"dist_m", stays.dist_m}, {"min_stay_s", stays.min_stay_s}, {"max_gap_s", stays.max_gap_s}}},
      {"zones",
       {{"construction", zones.construction == ZoneConstruction::kPerFeature ? "feature" : "part"},
        {"zone_id_property", zones.zone_id_property},
        {"county_id_property", zones.county_id_property}}},
      {"costs",
       {{"aggregation", to_string(costs)},
        {"default_speed_mps", cost_fallback.default_speed_mps},
        {"min_cost", cost_fallback.min_cost}}},
      {"calibration",
       {{"beta_min", calibration.range_min},
        {"beta_max", calibration.range_max},
        {"beta_step", calibration.step}}},
      {"tripgen",
       {{"covariates", tripgen.covariates},
        {"correlation_threshold", tripgen.correlation_threshold},
        {"drop_priority", tripgen.drop_priority}}},
      {"forecast", {{"years", forecast.years}}},
      {"compare",
       {{"reference", compare.reference},
        {"day_type", to_string(compare.day_type)},
        {"direction", to_string(compare.direction)}}},
      {"synth",
       {{"format", synth_format == PingFormat::kCsv ? "csv" : "ndjson"},
        {"grid_cols", y.grid_cols},
        {"grid_rows", y.grid_rows},
        {"county_block", y.county_block},
        {"zone_size_m", y.zone_size_m},
        {"origin_lon", y.origin_lon},
        {"origin_lat", y.origin_lat},
        {"locations_per_zone", y.locations_per_zone},
        {"min_location_sep_m", y.min_location_sep_m},
        {"residents", y.residents},
        {"sampling_rate", y.sampling_rate},
        {"attraction_min", y.attraction_min},
        {"attraction_max", y.attraction_max},
        {"beta", y.beta},
        {"start_month", y.start_month},
        {"start_day", y.start_day},
        {"days", y.days},
        {"weekday_tour_probability", y.weekday_tour_probability},
        {"weekend_tour_probability", y.weekend_tour_probability},
        {"second_tour_probability", y.second_tour_probability},
        {"activity_min_s", y.activity_min_s},
        {"activity_max_s", y.activity_max_s},
        {"stay_cadence_s", y.stay_cadence_s},
        {"moving_cadence_s", y.moving_cadence_s},
        {"speed_mps", y.speed_mps},
        {"noise_m", y.noise_m},
        {"bad_accuracy_fraction", y.bad_accuracy_fraction},
        {"sparse_device_fraction", y.sparse_device_fraction},
        {"sparse_pings_per_day", y.sparse_pings_per_day},
        {"sea_years", y.sea_years},
        {"population_growth_per_decade", y.population_growth_per_decade}}},
  };
}

PipelineConfig parse_config(const std::string& toml_text,
                            const std::vector<std::string>& overrides) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config parse error at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(os.str());
  }
  return from_table(std::move(root), overrides);
}

PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  if (path.empty()) return from_table(toml::table{}, overrides);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

}  // namespace tripcast
