#include "tripcast/pipeline.h"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "tripcast/csv.h"
#include "tripcast/error.h"
#include "tripcast/forecast.h"
#include "tripcast/homes.h"
#include "tripcast/matrices.h"
#include "tripcast/parallel.h"
#include "tripcast/quality.h"
#include "tripcast/synth.h"
#include "tripcast/tripdist.h"
#include "tripcast/tripgen.h"
#include "tripcast/trips.h"

namespace tripcast {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {
      "synth", "ingest", "quality",  "homes",   "trips",  "odm",
      "fit-gen", "calibrate", "forecast", "compare", "report"};
  return names;
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::kConfig:
        return 2;
      case ErrorKind::kMissingDependency:
        return 3;
      case ErrorKind::kData:
        return 4;
    }
  }
  return 1;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

namespace {

std::shared_ptr<spdlog::logger> logger() {
  if (auto l = spdlog::get("tripcast")) return l;
  auto l = spdlog::stderr_color_mt("tripcast");
  l->set_pattern("[%l] %v");
  return l;
}

}  // namespace

void init_logging(const std::string& level) {
  auto l = logger();
  l->set_level(spdlog::level::from_str(level));
}

namespace {

constexpr std::array<DayType, 2> kDayTypes = {DayType::kWeekday, DayType::kWeekend};

std::string day_suffix(DayType d) { return to_string(d); }

// Bookkeeping for one stage execution: resolves inputs, names outputs and
// records both in the manifest.
class StageRun {
 public:
  StageRun(const PipelineConfig& cfg, std::string name)
      : cfg_(cfg), name_(std::move(name)), root_(cfg.paths.output_dir), dir_(root_ / name_) {
    fs::create_directories(dir_);
    logger()->info("stage {}: start", name_);
  }

  const fs::path& dir() const { return dir_; }
  const fs::path& root() const { return root_; }

  // Path of an artifact produced by another stage.
  fs::path artifact(const std::string& producer, const std::string& file) {
    return input(root_ / producer / file, producer);
  }

  fs::path input(const fs::path& p, const std::string& producer) {
    if (!fs::exists(p))
      throw MissingArtifactError(producer, "stage '" + name_ + "' needs " + p.string() +
                                               " from the '" + producer + "' stage");
    inputs_.push_back(p);
    return p;
  }

  bool has_artifact(const std::string& producer, const std::string& file) const {
    return fs::exists(root_ / producer / file);
  }

  fs::path output(const std::string& file) {
    outputs_.push_back(dir_ / file);
    return dir_ / file;
  }

  std::ofstream open(const std::string& file) {
    std::ofstream f(output(file), std::ios::binary);
    if (!f) throw DataError("cannot write " + (dir_ / file).string());
    f.precision(17);
    return f;
  }

  void write_json(const std::string& file, const json& j) {
    auto f = open(file);
    f << j.dump(2) << '\n';
  }

  json stats = json::object();

  void commit() {
    const fs::path manifest_path = root_ / "manifest.json";
    json manifest;
    if (fs::exists(manifest_path)) {
      std::ifstream in(manifest_path);
      manifest = json::parse(in, nullptr, false);
      if (manifest.is_discarded() || !manifest.is_object()) manifest = json::object();
    }
    manifest["format"] = "tripcast.manifest";
    manifest["version"] = 1;
    manifest["config"] = cfg_.to_json();
    json entry = {{"inputs", json::object()}, {"outputs", json::object()}, {"stats", stats}};
    for (const auto& p : inputs_) entry["inputs"][label(p)] = sha256_file(p.string());
    std::sort(outputs_.begin(), outputs_.end());
    outputs_.erase(std::unique(outputs_.begin(), outputs_.end()), outputs_.end());
    for (const auto& p : outputs_) entry["outputs"][label(p)] = sha256_file(p.string());
    manifest["stages"][name_] = std::move(entry);
    std::ofstream out(manifest_path, std::ios::binary);
    out << manifest.dump(2) << '\n';
    logger()->info("stage {}: done ({} outputs)", name_, outputs_.size());
  }

 private:
  std::string label(const fs::path& p) const {
    const auto rel = p.lexically_relative(root_);
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    return p.generic_string();
  }

  const PipelineConfig& cfg_;
  std::string name_;
  fs::path root_;
  fs::path dir_;
  std::vector<fs::path> inputs_;
  std::vector<fs::path> outputs_;
};

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  return in;
}

json read_json(const fs::path& p) {
  auto in = open_in(p);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("malformed JSON in " + p.string());
  return j;
}

std::string read_text(const fs::path& p) {
  auto in = open_in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<Ping> read_artifact_pings(const fs::path& p) {
  auto in = open_in(p);
  auto parsed = parse_pings(in, PingFormat::kCsv);
  if (parsed.rejected > 0)
    throw DataError(p.string() + ": " + std::to_string(parsed.rejected) + " malformed rows");
  return std::move(parsed.pings);
}

ZoneIndex read_zone_index(StageRun& run) {
  return ZoneIndex(load_zones_file(run.artifact("ingest", "zones.geojson").string()));
}

std::map<std::string, double> zone_areas(const ZoneIndex& index) {
  std::map<std::string, double> areas;
  for (const auto& z : index.zones()) areas[z.zone_id] = polygon_area_km2(z.geometry);
  return areas;
}

std::map<std::string, std::string> zone_counties(const ZoneIndex& index) {
  std::map<std::string, std::string> m;
  for (const auto& z : index.zones()) m[z.zone_id] = z.county_id;
  return m;
}

CovariateTable covariates_for_year(StageRun& run, const ZoneIndex& index, int year) {
  const auto path = run.artifact("ingest", "sea.csv");
  auto loaded = load_sea_file(path.string(), year);
  if (loaded.records.empty())
    throw DataError("no SEA records for year " + std::to_string(year));
  return normalize_sea(loaded.records, year, zone_areas(index));
}

std::vector<DayType> odm_day_types(StageRun& run) {
  std::vector<DayType> out;
  for (DayType d : kDayTypes)
    if (run.has_artifact("odm", "odm_" + day_suffix(d) + ".csv")) out.push_back(d);
  if (out.empty())
    throw MissingArtifactError("odm", "no OD matrix found under " +
                                          (run.root() / "odm").string() +
                                          "; run the 'odm' stage first");
  return out;
}

ODMatrix read_odm_artifact(StageRun& run, const ZoneIndex& index, DayType d, int year) {
  auto in = open_in(run.artifact("odm", "odm_" + day_suffix(d) + ".csv"));
  return read_odm(in, index.zone_ids(), d, year);
}

CostMatrix read_cost_artifact(StageRun& run, const ZoneIndex& index, DayType d,
                              CostAggregation agg) {
  auto in = open_in(run.artifact("odm", "cost_" + day_suffix(d) + ".csv"));
  return read_cost_matrix(in, index.zone_ids(), agg);
}

std::vector<RegressionModel> read_models(StageRun& run) {
  return models_from_json(read_json(run.artifact("fit-gen", "models.json")));
}

// ---------------------------------------------------------------------------

void stage_synth(const PipelineConfig& cfg) {
  StageRun run(cfg, "synth");
  const auto result = generate_traces(cfg.synth, cfg.general.workers);
  write_synth(result, run.dir().string(), cfg.synth_format);
  for (const auto& entry : fs::directory_iterator(run.dir()))
    if (entry.is_regular_file()) run.output(entry.path().filename().string());
  run.stats = {{"devices", result.devices.size()},
               {"pings", result.pings.size()},
               {"trips", result.trips.size()},
               {"beta", result.beta}};
  run.commit();
}

fs::path raw_input(StageRun& run, const std::string& configured, const std::string& fallback) {
  if (configured.empty()) return run.artifact("synth", fallback);
  return run.input(configured, "ingest");
}

void stage_ingest(const PipelineConfig& cfg) {
  StageRun run(cfg, "ingest");
  const std::string synth_pings =
      cfg.synth_format == PingFormat::kCsv ? "pings.csv" : "pings.ndjson";
  const auto ping_path = raw_input(run, cfg.paths.pings, synth_pings);
  const auto zone_path = raw_input(run, cfg.paths.zones, "zones.geojson");
  const auto sea_path = raw_input(run, cfg.paths.sea, "sea.csv");
  const auto pop_path = raw_input(run, cfg.paths.population, "population.csv");

  // Zones.
  const auto zones = load_zones_file(zone_path.string(), cfg.zones);
  ZoneIndex index(zones);
  {
    auto f = run.open("zones.geojson");
    f << zones_to_geojson(zones).dump() << '\n';
  }
  const auto zone_ids = index.zone_ids();

  // Pings.
  PingParseResult pings;
  {
    auto in = open_in(ping_path);
    pings = parse_pings(in, ping_format_from_path(ping_path.string()));
  }
  if (pings.pings.empty()) throw DataError("no valid pings in " + ping_path.string());
  {
    auto f = run.open("pings.csv");
    write_pings(f, pings.pings, PingFormat::kCsv);
  }
  {
    auto f = run.open("rejected.csv");
    csv::Writer w(f);
    w.row({"line", "reason", "raw"});
    for (const auto& r : pings.samples) {
      w.field(r.line).field(r.reason).field(r.raw);
      w.end_row();
    }
  }

  // SEA tables, one or more years.
  const std::string sea_text = read_text(sea_path);
  std::set<int> years;
  {
    std::istringstream in(sea_text);
    const auto table = csv::read(in);
    if (auto yc = table.column("year")) {
      for (const auto& row : table.rows)
        if (*yc < row.size())
          if (auto y = csv::parse_int64(row[*yc])) years.insert(static_cast<int>(*y));
    } else {
      years.insert(cfg.general.year);
    }
  }
  std::vector<SeaRecord> sea;
  json sea_stats = json::object();
  for (int y : years) {
    std::istringstream in(sea_text);
    auto loaded = load_sea(in, y, zone_ids);
    sea_stats[std::to_string(y)] = {{"records", loaded.records.size()},
                                    {"rejected", loaded.rejected.size()},
                                    {"missing_zones", loaded.missing_zones.size()}};
    for (const auto& r : loaded.rejected)
      logger()->warn("sea {} line {}: {}", y, r.line, r.reason);
    sea.insert(sea.end(), loaded.records.begin(), loaded.records.end());
  }
  if (!years.count(cfg.general.year))
    logger()->warn("SEA table has no rows for the study year {}", cfg.general.year);
  {
    auto f = run.open("sea.csv");
    write_sea(f, sea);
  }

  // Population by county.
  const auto population = load_population_file(pop_path.string());
  {
    auto f = run.open("population.csv");
    csv::Writer w(f);
    w.row({"county_id", "population"});
    for (const auto& [county, pop] : population) {
      w.field(county).field(pop);
      w.end_row();
    }
  }

  run.stats = {{"pings", pings.pings.size()},
               {"rejected_pings", pings.rejected},
               {"zones", zones.size()},
               {"sea", sea_stats},
               {"counties", population.size()}};
  run.write_json("summary.json", run.stats);
  logger()->info("ingest: {} pings kept, {} rejected, {} zones", pings.pings.size(),
                 pings.rejected, zones.size());
  run.commit();
}

void stage_quality(const PipelineConfig& cfg) {
  StageRun run(cfg, "quality");
  const TimeZone tz(cfg.general.timezone);
  const auto pings = read_artifact_pings(run.artifact("ingest", "pings.csv"));
  const auto accurate = filter_accuracy(pings, cfg.quality.max_accuracy_m);
  const auto matrix = build_quality_matrix(accurate, cfg.general.year, tz, cfg.quality.max_days);
  {
    auto f = run.open("matrix.csv");
    write_quality_matrix(f, matrix);
  }
  const auto kept = filter_users(accurate, cfg.quality.min_bins, cfg.quality.min_days, tz);
  {
    auto f = run.open("pings.csv");
    write_pings(f, kept.retained_pings, PingFormat::kCsv);
  }
  run.stats = {{"pings_in", pings.size()},
               {"inaccurate_pings", pings.size() - accurate.size()},
               {"out_of_year_pings", matrix.out_of_year_pings},
               {"users", kept.total_users},
               {"retained_users", kept.retained_devices.size()},
               {"retained_pings", kept.retained_pings.size()},
               {"user_share", kept.user_share},
               {"ping_share", kept.ping_share}};
  run.write_json("summary.json", run.stats);
  logger()->info("quality: kept {}/{} users ({:.1f}% of pings)", kept.retained_devices.size(),
                 kept.total_users, 100.0 * kept.ping_share);
  run.commit();
}

void stage_homes(const PipelineConfig& cfg) {
  StageRun run(cfg, "homes");
  const TimeZone tz(cfg.general.timezone);
  const auto pings = read_artifact_pings(run.artifact("quality", "pings.csv"));
  const auto index = read_zone_index(run);
  const auto population = load_population_file(run.artifact("ingest", "population.csv").string());
  const auto by_device = group_by_device(pings);
  const auto homes = detect_homes(by_device, tz, cfg.homes, &index, cfg.general.workers);
  const auto table = compute_representativeness(homes, population);
  std::vector<std::string> devices;
  for (const auto& [id, p] : by_device) devices.push_back(id);
  const auto weights = compute_user_weights(devices, homes, table);
  {
    auto f = run.open("homes.csv");
    write_homes(f, homes);
  }
  {
    auto f = run.open("representativeness.csv");
    write_representativeness(f, table);
  }
  {
    auto f = run.open("weights.csv");
    write_weights(f, weights);
  }
  run.stats = {{"devices", devices.size()},
               {"homes", homes.size()},
               {"homes_without_region", table.homes_without_region},
               {"weighted_devices", weights.weights.size()},
               {"missing_home", weights.missing_home},
               {"missing_region", weights.missing_region},
               {"zero_ratio", weights.zero_ratio}};
  run.write_json("summary.json", run.stats);
  run.commit();
}

void stage_trips(const PipelineConfig& cfg) {
  StageRun run(cfg, "trips");
  const TimeZone tz(cfg.general.timezone);
  const auto pings = read_artifact_pings(run.artifact("quality", "pings.csv"));
  std::map<std::string, double> weights;
  {
    auto in = open_in(run.artifact("homes", "weights.csv"));
    weights = read_weights(in);
  }
  if (pings.empty()) throw DataError("no pings survived the quality stage");
  const auto by_device = group_by_device(pings);
  std::vector<const std::vector<Ping>*> groups;
  for (const auto& [id, p] : by_device) groups.push_back(&p);
  std::vector<DeviceTrips> results(groups.size());
  parallel_for(groups.size(), cfg.general.workers, [&](std::size_t k) {
    results[k] = extract_device_trips(*groups[k], cfg.stays, tz);
  });

  std::vector<Trip> trips;
  std::vector<StayPoint> stays;
  std::int64_t unweighted_trips = 0, unweighted_devices = 0;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    auto& r = results[k];
    stays.insert(stays.end(), r.stays.begin(), r.stays.end());
    if (r.trips.empty()) continue;
    auto it = weights.find(r.trips.front().device_id);
    if (it == weights.end()) {
      unweighted_trips += static_cast<std::int64_t>(r.trips.size());
      ++unweighted_devices;
      continue;
    }
    for (auto& t : r.trips) {
      t.weight = it->second;
      trips.push_back(std::move(t));
    }
  }
  {
    auto f = run.open("trips.csv");
    write_trips(f, trips);
  }
  {
    auto f = run.open("stays.csv");
    write_stays(f, stays);
  }
  std::int64_t first = pings.front().timestamp, last = pings.front().timestamp;
  for (const auto& p : pings) {
    first = std::min(first, p.timestamp);
    last = std::max(last, p.timestamp);
  }
  const auto days = count_observed_days(first, last, tz);
  std::int64_t weekday = 0;
  for (const auto& t : trips) weekday += t.day_type == DayType::kWeekday;
  run.stats = {{"first_timestamp", first},
               {"last_timestamp", last},
               {"observed_days", {{"weekday", days.weekday}, {"weekend", days.weekend}}},
               {"stays", stays.size()},
               {"trips", trips.size()},
               {"weekday_trips", weekday},
               {"weekend_trips", static_cast<std::int64_t>(trips.size()) - weekday},
               {"unweighted_trips", unweighted_trips},
               {"unweighted_devices", unweighted_devices}};
  run.write_json("summary.json", run.stats);
  logger()->info("trips: {} weighted trips from {} devices", trips.size(), groups.size());
  run.commit();
}

void stage_odm(const PipelineConfig& cfg) {
  StageRun run(cfg, "odm");
  std::vector<Trip> trips;
  {
    auto in = open_in(run.artifact("trips", "trips.csv"));
    trips = read_trips(in);
  }
  const json summary = read_json(run.artifact("trips", "summary.json"));
  const auto index = read_zone_index(run);
  ObservedDays days;
  days.weekday = summary.at("observed_days").at("weekday").get<std::int64_t>();
  days.weekend = summary.at("observed_days").at("weekend").get<std::int64_t>();

  json stats = json::object();
  for (DayType d : kDayTypes) {
    if (days.of(d) == 0) {
      logger()->warn("odm: no observed {} days; skipping", to_string(d));
      continue;
    }
    const auto built = build_odm(trips, index, d, cfg.general.year, days.of(d));
    const auto cost = build_cost_matrix(trips, index, cfg.costs, cfg.cost_fallback, d);
    {
      auto f = run.open("odm_" + day_suffix(d) + ".csv");
      write_odm(f, built.odm);
    }
    {
      auto f = run.open("cost_" + day_suffix(d) + ".csv");
      write_cost_matrix(f, cost);
    }
    std::size_t fallback = 0;
    for (auto s : cost.provenance) fallback += s == CellSource::kFallback;
    stats[to_string(d)] = {{"observed_days", days.of(d)},
                           {"total_trips_per_day", built.odm.cells.sum()},
                           {"included_trips", built.diagnostics.included},
                           {"outside_zones", built.diagnostics.outside_zones},
                           {"fallback_cost_cells", fallback}};
  }
  run.stats = stats;
  run.write_json("summary.json", stats);
  run.commit();
}

void stage_fit_gen(const PipelineConfig& cfg) {
  StageRun run(cfg, "fit-gen");
  const auto index = read_zone_index(run);
  const auto day_types = odm_day_types(run);
  const CovariateTable table = covariates_for_year(run, index, cfg.general.year);
  for (const auto& [zone, reason] : table.excluded)
    logger()->warn("fit-gen: zone {} excluded ({})", zone, reason);
  const auto screen =
      correlation_screen(table, cfg.tripgen.correlation_threshold, cfg.tripgen.drop_priority);
  for (const auto& p : screen.flagged)
    logger()->info("fit-gen: |rho({}, {})| = {:.3f}", p.a, p.b, std::abs(p.rho));

  std::vector<std::string> use;
  for (const auto& name : cfg.tripgen.covariates) {
    if (!table.column(name)) throw DataError("configured covariate '" + name + "' is not available");
    if (std::find(screen.retained.begin(), screen.retained.end(), name) == screen.retained.end()) {
      logger()->warn("fit-gen: covariate {} removed by screening", name);
      continue;
    }
    use.push_back(name);
  }
  const Eigen::MatrixXd X = table.select(use);

  struct Job {
    Direction direction;
    DayType day_type;
    Eigen::VectorXd y;
  };
  std::vector<Job> jobs;
  for (DayType d : day_types) {
    const ODMatrix odm = read_odm_artifact(run, index, d, cfg.general.year);
    for (Direction dir : {Direction::kProduction, Direction::kAttraction}) {
      const Eigen::VectorXd& marg = dir == Direction::kProduction ? odm.production : odm.attraction;
      Eigen::VectorXd y(static_cast<Eigen::Index>(table.zone_ids.size()));
      for (std::size_t z = 0; z < table.zone_ids.size(); ++z) {
        auto pos = index.position(table.zone_ids[z]);
        if (!pos) throw DataError("SEA zone '" + table.zone_ids[z] + "' is not a known zone");
        y(static_cast<Eigen::Index>(z)) = marg(static_cast<Eigen::Index>(*pos));
      }
      jobs.push_back({dir, d, std::move(y)});
    }
  }
  std::vector<RegressionModel> models(jobs.size());
  parallel_for(jobs.size(), cfg.general.workers, [&](std::size_t k) {
    models[k] = fit_ols(X, jobs[k].y, use);
    models[k].direction = jobs[k].direction;
    models[k].day_type = jobs[k].day_type;
  });

  {
    auto f = run.open("covariates.csv");
    write_covariates(f, table);
  }
  {
    auto f = run.open("screening.csv");
    write_screening(f, screen);
  }
  run.write_json("models.json", models_to_json(models));
  for (const auto& m : models) {
    auto f = run.open(std::string("model_") + to_string(m.direction) + "_" + to_string(m.day_type) +
                      ".csv");
    write_model_csv(f, m);
  }
  {
    auto f = run.open("table.txt");
    f << format_model_table(models);
  }
  json stats = {{"zones", table.zone_ids.size()},
                {"covariates", use},
                {"dropped", screen.dropped},
                {"excluded_zones", table.excluded.size()}};
  for (const auto& m : models)
    stats["adj_r_squared"][std::string(to_string(m.direction)) + "_" + to_string(m.day_type)] =
        m.adj_r_squared;
  run.stats = stats;
  run.commit();
}

void stage_calibrate(const PipelineConfig& cfg) {
  StageRun run(cfg, "calibrate");
  const auto day_types = odm_day_types(run);
  const auto index = read_zone_index(run);
  json stats = json::object();
  for (DayType d : day_types) {
    const ODMatrix odm = read_odm_artifact(run, index, d, cfg.general.year);
    const CostMatrix cost = read_cost_artifact(run, index, d, cfg.costs);
    GravityModel g = calibrate_beta(odm.production, odm.attraction, cost.cells, odm.cells,
                                    cfg.calibration, cfg.general.workers);
    g.aggregation = cfg.costs;
    g.day_type = d;
    {
      auto f = run.open("beta_" + day_suffix(d) + ".csv");
      write_beta_curve(f, g);
    }
    run.write_json("gravity_" + day_suffix(d) + ".json", gravity_to_json(g));
    const auto best = std::min_element(g.mse.begin(), g.mse.end());
    stats[to_string(d)] = {{"beta", g.beta}, {"mse", *best}};
    logger()->info("calibrate: {} beta = {}", to_string(d), g.beta);
  }
  run.stats = stats;
  run.commit();
}

void stage_forecast(const PipelineConfig& cfg) {
  StageRun run(cfg, "forecast");
  const auto index = read_zone_index(run);
  const auto models = read_models(run);
  std::vector<GravityModel> gravity;
  std::map<DayType, CostMatrix> costs;
  for (DayType d : kDayTypes) {
    const std::string file = "gravity_" + day_suffix(d) + ".json";
    if (!run.has_artifact("calibrate", file)) continue;
    gravity.push_back(gravity_from_json(read_json(run.artifact("calibrate", file))));
    costs.emplace(d, read_cost_artifact(run, index, d, gravity.back().aggregation));
  }
  if (gravity.empty())
    throw MissingArtifactError("calibrate", "stage 'forecast' needs calibrated gravity models; "
                                            "run the 'calibrate' stage first");

  std::vector<int> years = cfg.forecast.years;
  years.push_back(cfg.general.year);
  std::sort(years.begin(), years.end());
  years.erase(std::unique(years.begin(), years.end()), years.end());
  std::map<int, CovariateTable> tables;
  for (int y : years) tables.emplace(y, covariates_for_year(run, index, y));

  const ForecastSet set = forecast_generation(models, tables, years);
  {
    auto f = run.open("forecast.csv");
    write_forecast(f, set);
  }
  {
    auto f = run.open("growth.csv");
    write_growth(f, set.growth);
  }

  const auto counties = zone_counties(index);
  const int base = cfg.general.year;
  const int horizon = years.back() == base && years.size() > 1 ? years.front() : years.back();
  json stats = json::object();
  for (const auto& [d, cost] : costs) {
    ForecastSet one;
    for (const auto& e : set.entries)
      if (e.day_type == d) one.entries.push_back(e);
    if (one.entries.empty()) continue;
    std::vector<GravityModel> g;
    for (const auto& m : gravity)
      if (m.day_type == d) g.push_back(m);
    const auto odms = forecast_distribution(one, cost, g);
    std::map<int, FlowMatrix> flows;
    for (const auto& odm : odms) {
      const std::string tag = std::to_string(odm.year) + "_" + day_suffix(d);
      {
        auto f = run.open("odm_" + tag + ".csv");
        write_odm(f, odm);
      }
      flows[odm.year] = aggregate_flows(odm, counties);
      auto f = run.open("county_flows_" + tag + ".csv");
      write_flows(f, flows[odm.year]);
    }
    if (horizon != base) {
      {
        auto f = run.open("county_change_" + day_suffix(d) + ".csv");
        write_flow_change(f, flow_change(flows.at(base), flows.at(horizon)));
      }
      {
        auto f = run.open("generation_change_" + day_suffix(d) + ".csv");
        write_generation_change(f, one.at(base, d), one.at(horizon, d));
      }
      {
        auto f = run.open("ratio_" + day_suffix(d) + ".geojson");
        f << ratio_layer(index.zones(), one.at(base, d), one.at(horizon, d)).dump() << '\n';
      }
    }
    json totals = json::object();
    for (const auto& e : one.entries) totals[std::to_string(e.year)] = e.total_production();
    stats[to_string(d)] = {{"total_production", totals}};
  }
  run.stats = stats;
  run.commit();
}

void stage_compare(const PipelineConfig& cfg) {
  StageRun run(cfg, "compare");
  const auto index = read_zone_index(run);
  const auto models = read_models(run);
  const RegressionModel* model = nullptr;
  for (const auto& m : models)
    if (m.day_type == cfg.compare.day_type && m.direction == cfg.compare.direction) model = &m;
  if (!model)
    throw MissingArtifactError("fit-gen", std::string("no fitted ") + to_string(cfg.compare.direction) +
                                              " model for " + to_string(cfg.compare.day_type));
  const CovariateTable table = covariates_for_year(run, index, cfg.general.year);
  const TripPrediction pred = predict_trips(*model, table);
  std::map<std::string, double> predicted;
  for (std::size_t z = 0; z < pred.zone_ids.size(); ++z)
    predicted[pred.zone_ids[z]] = pred.values(static_cast<Eigen::Index>(z));

  std::map<std::string, double> reference;
  std::string source;
  if (!cfg.compare.reference.empty()) {
    const auto path = run.input(cfg.compare.reference, "compare");
    source = path.string();
    const auto t = csv::read_file(path.string());
    const auto cz = t.require_column("zone_id", "reference");
    const auto cv = t.require_column("value", "reference");
    const auto cy = t.column("year");
    std::map<std::string, std::map<int, double>> by_year;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      auto v = csv::parse_double(row.at(cv));
      if (!v) throw DataError("reference line " + std::to_string(t.line_numbers[r]) + ": bad value");
      int y = cfg.general.year;
      if (cy) {
        auto py = csv::parse_int64(row.at(*cy));
        if (!py) throw DataError("reference line " + std::to_string(t.line_numbers[r]) + ": bad year");
        y = static_cast<int>(*py);
      }
      by_year[row.at(cz)][y] = *v;
    }
    for (const auto& [zone, series] : by_year) {
      if (auto it = series.find(cfg.general.year); it != series.end()) {
        reference[zone] = it->second;
        continue;
      }
      auto hi = series.upper_bound(cfg.general.year);
      if (hi == series.begin() || hi == series.end()) continue;
      auto lo = std::prev(hi);
      reference[zone] =
          interpolate_years(lo->first, lo->second, hi->first, hi->second, cfg.general.year);
    }
  } else {
    const ODMatrix odm = read_odm_artifact(run, index, cfg.compare.day_type, cfg.general.year);
    source = "observed OD matrix";
    const auto& marg =
        cfg.compare.direction == Direction::kProduction ? odm.production : odm.attraction;
    const auto ids = index.zone_ids();
    for (std::size_t z = 0; z < ids.size(); ++z) reference[ids[z]] = marg(static_cast<Eigen::Index>(z));
  }
  const auto report = compare_models(predicted, reference);
  {
    auto f = run.open("comparison.csv");
    write_comparison(f, report);
  }
  {
    auto f = run.open("summary.txt");
    f << comparison_summary(report, std::string("Predicted ") + to_string(cfg.compare.direction) +
                                        " (" + to_string(cfg.compare.day_type) + ") vs " + source);
  }
  run.stats = {{"pairs", report.zone_ids.size()},
               {"rho", report.rho},
               {"slope", report.slope},
               {"intercept", report.intercept}};
  run.commit();
}

void stage_report(const PipelineConfig& cfg) {
  StageRun run(cfg, "report");
  std::ostringstream md;
  md << "# Trip forecast report\n\n";
  auto section_json = [&](const char* title, const std::string& stage) {
    if (!run.has_artifact(stage, "summary.json")) return;
    md << "## " << title << "\n\n```json\n"
       << read_json(run.artifact(stage, "summary.json")).dump(2) << "\n```\n\n";
  };
  section_json("Ingest", "ingest");
  section_json("Data quality", "quality");
  section_json("Homes and representativeness", "homes");
  section_json("Trips", "trips");
  section_json("OD matrices", "odm");

  md << "## Trip generation models\n\n```\n" << read_text(run.artifact("fit-gen", "table.txt"))
     << "```\n\n";
  md << "## Gravity calibration\n\n";
  bool any = false;
  for (DayType d : kDayTypes) {
    const std::string file = "gravity_" + day_suffix(d) + ".json";
    if (!run.has_artifact("calibrate", file)) continue;
    const auto g = gravity_from_json(read_json(run.artifact("calibrate", file)));
    md << "- " << to_string(d) << ": beta = " << csv::format_double(g.beta) << " ("
       << to_string(g.aggregation) << ")\n";
    any = true;
  }
  if (!any)
    throw MissingArtifactError("calibrate", "stage 'report' needs calibrated gravity models");
  md << "\n## Growth\n\n```\n" << read_text(run.artifact("forecast", "growth.csv")) << "```\n\n";
  md << "## Comparison\n\n```\n" << read_text(run.artifact("compare", "summary.txt")) << "```\n";
  {
    auto f = run.open("report.md");
    f << md.str();
  }
  run.commit();
}

}  // namespace

void run_stage(const std::string& stage, const PipelineConfig& cfg) {
  if (stage == "synth") return stage_synth(cfg);
  if (stage == "ingest") return stage_ingest(cfg);
  if (stage == "quality") return stage_quality(cfg);
  if (stage == "homes") return stage_homes(cfg);
  if (stage == "trips") return stage_trips(cfg);
  if (stage == "odm") return stage_odm(cfg);
  if (stage == "fit-gen") return stage_fit_gen(cfg);
  if (stage == "calibrate") return stage_calibrate(cfg);
  if (stage == "forecast") return stage_forecast(cfg);
  if (stage == "compare") return stage_compare(cfg);
  if (stage == "report") return stage_report(cfg);
  throw ConfigError("unknown stage '" + stage + "'");
}

void run_chain(const PipelineConfig& cfg) {
  const auto& names = stage_names();
  for (std::size_t i = 1; i < names.size(); ++i) run_stage(names[i], cfg);
}

}  // namespace tripcast
