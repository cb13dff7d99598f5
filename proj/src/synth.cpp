#include "tripcast/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "tripcast/csv.h"
#include "tripcast/error.h"
#include "tripcast/parallel.h"
#include "tripcast/trips.h"

namespace tripcast {

void validate(const SynthConfig& c) {
  auto fail = [](const std::string& field, const std::string& rule) {
    throw ConfigError("synth." + field + " " + rule);
  };
  if (c.grid_cols < 1 || c.grid_rows < 1) fail("grid", "must contain at least one zone");
  if (c.county_block < 1) fail("county_block", "must be >= 1");
  if (!(c.zone_size_m > 0)) fail("zone_size_m", "must be positive");
  if (c.locations_per_zone < 2) fail("locations_per_zone", "must be >= 2");
  if (!(c.min_location_sep_m >= 0)) fail("min_location_sep_m", "must be >= 0");
  if (c.residents < 1) fail("residents", "must be >= 1");
  if (!(c.sampling_rate > 0 && c.sampling_rate <= 1)) fail("sampling_rate", "must be in (0, 1]");
  if (!(c.attraction_min > 0 && c.attraction_max >= c.attraction_min))
    fail("attraction_min", "must satisfy 0 < min <= max");
  if (!(c.beta >= 0)) fail("beta", "must be >= 0");
  if (c.days < 1) fail("days", "must be >= 1");
  for (double p : {c.weekday_tour_probability, c.weekend_tour_probability,
                   c.second_tour_probability, c.bad_accuracy_fraction, c.sparse_device_fraction})
    if (!(p >= 0 && p <= 1)) fail("probabilities", "must lie in [0, 1]");
  if (c.activity_min_s < 600 || c.activity_max_s < c.activity_min_s)
    fail("activity_min_s", "must satisfy 600 <= min <= max");
  if (c.stay_cadence_s < 1 || c.moving_cadence_s < 1) fail("cadence", "must be >= 1 s");
  if (!(c.speed_mps > 0)) fail("speed_mps", "must be positive");
  if (!(c.noise_m >= 0)) fail("noise_m", "must be >= 0");
  if (c.sparse_pings_per_day < 0) fail("sparse_pings_per_day", "must be >= 0");
  // Sites sit within 0.35 zone widths of the centre, so they must be able to
  // hold the requested separation.
  if (c.min_location_sep_m > 0.35 * c.zone_size_m)
    fail("min_location_sep_m", "is too large for the zone size");
}

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kMetersPerDegLat = kEarthRadiusM * kDegToRad;

LonLat offset(const LonLat& p, double east_m, double north_m) {
  return {p.lon + east_m / (kMetersPerDegLat * std::cos(p.lat * kDegToRad)),
          p.lat + north_m / kMetersPerDegLat};
}

std::string padded(const char* prefix, std::size_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, value);
  return buf;
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool bernoulli(std::mt19937_64& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

// Largest-remainder rounding of `total` split proportionally to `weights`.
std::vector<std::int64_t> apportion(std::int64_t total, const Eigen::VectorXd& weights) {
  const double sum = weights.sum();
  std::vector<std::int64_t> out(static_cast<std::size_t>(weights.size()));
  std::vector<std::pair<double, std::size_t>> rem;
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double exact = static_cast<double>(total) * weights(static_cast<Eigen::Index>(i)) / sum;
    out[i] = static_cast<std::int64_t>(std::floor(exact));
    assigned += out[i];
    rem.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++out[rem[k % rem.size()].second];
  return out;
}

struct Segment {
  bool moving = false;
  LonLat from;
  LonLat to;
  std::int64_t t0 = 0;
  std::int64_t t1 = 0;
};

struct DeviceOutput {
  std::vector<Ping> pings;
  std::vector<StayPoint> stays;
  std::vector<Trip> trips;
};

struct World {
  const SynthConfig* cfg;
  const TimeZone* tz;
  std::vector<Zone> zones;
  std::vector<std::vector<LonLat>> sites;
  std::vector<std::vector<double>> choice_cdf;  // per origin zone
  std::int64_t start = 0;
  std::int64_t end = 0;
};

LonLat position_at(const std::vector<Segment>& segs, std::int64_t t) {
  auto it = std::upper_bound(segs.begin(), segs.end(), t,
                             [](std::int64_t v, const Segment& s) { return v < s.t1; });
  if (it == segs.end()) return segs.back().to;
  if (!it->moving) return it->from;
  const double f = it->t1 > it->t0 ? static_cast<double>(t - it->t0) /
                                         static_cast<double>(it->t1 - it->t0)
                                   : 1.0;
  return {it->from.lon + f * (it->to.lon - it->from.lon),
          it->from.lat + f * (it->to.lat - it->from.lat)};
}

DeviceOutput simulate_device(const World& w, const SynthDevice& dev, std::size_t home_zone,
                             std::size_t device_index) {
  const SynthConfig& c = *w.cfg;
  auto rng = stream(c.seed, 1, device_index);
  DeviceOutput out;

  // Build the timeline of stays and moves.
  std::vector<Segment> segs;
  std::int64_t now = w.start;
  auto stay_until = [&](const LonLat& at, std::int64_t t) {
    segs.push_back({false, at, at, now, t});
    now = t;
  };
  auto move_to = [&](const LonLat& from, const LonLat& to) {
    const double dist = haversine_m(from, to);
    const auto dur = std::max<std::int64_t>(60, std::llround(dist / c.speed_mps));
    segs.push_back({true, from, to, now, now + dur});
    now += dur;
    return dist;
  };

  std::vector<std::size_t> trip_segments;  // indices of planted moves
  const auto& cdf = w.choice_cdf[home_zone];
  for (int d = 0; d < c.days; ++d) {
    const std::int64_t day0 = w.tz->to_unix(c.start_year, c.start_month, c.start_day + d);
    const DayType type = classify_day_type(day0 + 12 * 3600, *w.tz);
    const double p_tour =
        type == DayType::kWeekday ? c.weekday_tour_probability : c.weekend_tour_probability;
    if (!bernoulli(rng, p_tour)) continue;
    std::int64_t depart = day0 + 7 * 3600 + static_cast<std::int64_t>(uniform(rng, 0, 7200));
    const std::int64_t latest_return = day0 + 20 * 3600 + 1800;
    for (int tour = 0; tour < 2; ++tour) {
      const double u = uniform(rng, 0.0, 1.0);
      std::size_t j = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) -
                                               cdf.begin());
      j = std::min(j, cdf.size() - 1);
      const auto& zsites = w.sites[j];
      LonLat site;
      do {
        site = zsites[std::uniform_int_distribution<std::size_t>(0, zsites.size() - 1)(rng)];
      } while (site == dev.home);
      const double dist = haversine_m(dev.home, site);
      const auto leg = std::max<std::int64_t>(60, std::llround(dist / c.speed_mps));
      const auto dwell = static_cast<std::int64_t>(uniform(rng, c.activity_min_s, c.activity_max_s));
      if (depart + 2 * leg + dwell > latest_return) break;

      stay_until(dev.home, depart);
      trip_segments.push_back(segs.size());
      move_to(dev.home, site);
      stay_until(site, now + dwell);
      trip_segments.push_back(segs.size());
      move_to(site, dev.home);

      if (tour == 1 || !bernoulli(rng, c.second_tour_probability)) break;
      depart = now + static_cast<std::int64_t>(uniform(rng, 1800, 5400));
    }
  }
  stay_until(dev.home, w.end);

  // Emit pings.
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto emit = [&](std::int64_t t, const LonLat& truth) {
    double acc = uniform(rng, 3.0, 30.0);
    double sigma = c.noise_m;
    if (bernoulli(rng, c.bad_accuracy_fraction)) {
      acc = uniform(rng, 51.0, 300.0);
      sigma = std::max(sigma, acc / 2);
    }
    const LonLat p = offset(truth, sigma * gauss(rng), sigma * gauss(rng));
    out.pings.push_back({dev.device_id, p.lon, p.lat, t, std::round(acc * 10) / 10});
  };

  std::vector<int> stay_counts(segs.size(), 0);
  if (dev.sparse) {
    std::vector<std::int64_t> times;
    for (int d = 0; d < c.days; ++d) {
      const std::int64_t day0 = w.tz->to_unix(c.start_year, c.start_month, c.start_day + d);
      const std::int64_t day1 = w.tz->to_unix(c.start_year, c.start_month, c.start_day + d + 1);
      for (int k = 0; k < c.sparse_pings_per_day; ++k)
        times.push_back(day0 + static_cast<std::int64_t>(
                                   uniform(rng, 0.0, static_cast<double>(day1 - day0))));
    }
    std::sort(times.begin(), times.end());
    for (auto t : times) emit(t, position_at(segs, t));
  } else {
    for (std::size_t s = 0; s < segs.size(); ++s) {
      const Segment& seg = segs[s];
      if (!seg.moving) {
        std::int64_t t = seg.t0;
        const std::int64_t last = seg.t1 == w.end ? w.end - 1 : seg.t1;
        while (t < last) {
          emit(t, seg.from);
          ++stay_counts[s];
          t += std::max<std::int64_t>(
              1, std::llround(c.stay_cadence_s * uniform(rng, 0.75, 1.25)));
        }
        emit(last, seg.from);
        ++stay_counts[s];
      } else {
        for (std::int64_t t = seg.t0 + c.moving_cadence_s; t < seg.t1; t += c.moving_cadence_s) {
          const LonLat p = position_at(segs, t);
          if (haversine_m(p, seg.from) < 150 || haversine_m(p, seg.to) < 150) continue;
          emit(t, p);
        }
      }
    }
    // A departure ping and the next arrival ping may share a timestamp only
    // when a move is shorter than a second, which cannot happen (moves last
    // at least 60 s).
  }

  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (segs[s].moving) continue;
    StayPoint sp;
    sp.device_id = dev.device_id;
    sp.centroid = segs[s].from;
    sp.arrival = segs[s].t0;
    sp.departure = segs[s].t1;
    sp.ping_count = stay_counts[s];
    out.stays.push_back(sp);
  }
  for (std::size_t seg_index : trip_segments) {
    const Segment& m = segs[seg_index];
    Trip t;
    t.device_id = dev.device_id;
    t.origin_stay.device_id = dev.device_id;
    t.origin_stay.centroid = m.from;
    t.origin_stay.departure = m.t0;
    t.dest_stay.device_id = dev.device_id;
    t.dest_stay.centroid = m.to;
    t.dest_stay.arrival = m.t1;
    t.depart = m.t0;
    t.arrive = m.t1;
    t.travel_time = static_cast<double>(m.t1 - m.t0);
    t.path_length = haversine_m(m.from, m.to);
    t.day_type = classify_day_type(m.t0, *w.tz);
    out.trips.push_back(std::move(t));
  }
  return out;
}

std::vector<SeaRecord> make_sea(const SynthConfig& c, const std::vector<Zone>& zones,
                                const std::map<std::string, std::int64_t>& zone_pop,
                                const Eigen::VectorXd& attractiveness) {
  auto rng = stream(c.seed, 2);
  struct Base {
    double income, vehicles, employed, gov, jobs;
    std::array<double, 7> shares;
  };
  const double mean_pop =
      static_cast<double>(c.residents) / static_cast<double>(zones.size());
  const double mean_w = attractiveness.mean();
  std::vector<Base> base;
  for (std::size_t z = 0; z < zones.size(); ++z) {
    Base b;
    b.income = uniform(rng, 40000, 90000);
    b.vehicles = uniform(rng, 1.2, 2.5);
    b.employed = uniform(rng, 0.40, 0.60);
    b.gov = uniform(rng, 0.0, 0.03);
    b.jobs = 0.5 * mean_pop * attractiveness(static_cast<Eigen::Index>(z)) / mean_w *
             uniform(rng, 0.8, 1.2);
    double total = 0;
    for (auto& s : b.shares) total += (s = uniform(rng, 0.2, 1.0));
    for (auto& s : b.shares) s /= total;
    base.push_back(b);
  }
  std::vector<int> years = c.sea_years;
  years.push_back(c.start_year);
  std::sort(years.begin(), years.end());
  years.erase(std::unique(years.begin(), years.end()), years.end());

  static const char* kSectors[] = {raw_attr::kEmpAgcon,   raw_attr::kEmpIndustry,
                                   raw_attr::kEmpRetail,  raw_attr::kEmpFoodLodging,
                                   raw_attr::kEmpProSrv,  raw_attr::kEmpGovnmt,
                                   raw_attr::kEmpOthSrv};
  std::vector<SeaRecord> out;
  for (int year : years) {
    auto yrng = stream(c.seed, 3, static_cast<std::uint64_t>(year));
    const double factor =
        std::pow(1.0 + c.population_growth_per_decade, (year - c.start_year) / 10.0);
    for (std::size_t z = 0; z < zones.size(); ++z) {
      const Base& b = base[z];
      const double pop0 = static_cast<double>(zone_pop.at(zones[z].zone_id));
      const double pop =
          year == c.start_year ? pop0 : std::round(pop0 * factor * uniform(yrng, 0.98, 1.02));
      const double jobs = b.jobs * factor * uniform(yrng, 0.97, 1.03);
      SeaRecord rec;
      rec.zone_id = zones[z].zone_id;
      rec.year = year;
      rec.set(attr::kTotalPopulation, pop);
      rec.set(raw_attr::kPopGovQuarters, std::round(pop * b.gov));
      rec.set(attr::kAvgHhIncome, std::round(b.income * std::pow(1.02, year - c.start_year)));
      rec.set(attr::kAvgVehicles, std::round(b.vehicles * 100) / 100);
      rec.set(raw_attr::kEmployed, std::round(pop * b.employed));
      for (std::size_t s = 0; s < 7; ++s) rec.set(kSectors[s], std::round(jobs * b.shares[s]));
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace

SynthResult generate_traces(const SynthConfig& c, int workers) {
  validate(c);
  const TimeZone tz(c.timezone);
  World w;
  w.cfg = &c;
  w.tz = &tz;
  w.start = tz.to_unix(c.start_year, c.start_month, c.start_day);
  w.end = tz.to_unix(c.start_year, c.start_month, c.start_day + c.days);

  // Zones.
  const LonLat origin{c.origin_lon, c.origin_lat};
  const int county_cols = (c.grid_cols + c.county_block - 1) / c.county_block;
  for (int r = 0; r < c.grid_rows; ++r) {
    for (int col = 0; col < c.grid_cols; ++col) {
      const LonLat sw = offset(origin, col * c.zone_size_m, r * c.zone_size_m);
      const LonLat ne = offset(sw, c.zone_size_m, c.zone_size_m);
      Zone z;
      z.zone_id = padded("Z", static_cast<std::size_t>(r * c.grid_cols + col + 1), 3);
      z.county_id = padded(
          "C", static_cast<std::size_t>((r / c.county_block) * county_cols + col / c.county_block + 1),
          2);
      Polygon poly;
      poly.outer = {sw, {ne.lon, sw.lat}, ne, {sw.lon, ne.lat}, sw};
      z.geometry.push_back(poly);
      z.centroid = polygon_centroid(z.geometry);
      w.zones.push_back(std::move(z));
    }
  }
  const std::size_t n = w.zones.size();

  // Attractiveness and activity sites.
  auto rng = stream(c.seed, 0);
  Eigen::VectorXd W(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    W(static_cast<Eigen::Index>(i)) = uniform(rng, c.attraction_min, c.attraction_max);
  const double radius = 0.35 * c.zone_size_m;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<LonLat> s;
    int attempts = 0;
    while (static_cast<int>(s.size()) < c.locations_per_zone) {
      if (++attempts > 100000) throw ConfigError("synth: cannot place activity sites");
      const double rr = radius * std::sqrt(uniform(rng, 0, 1));
      const double th = uniform(rng, 0, 2 * std::numbers::pi);
      const LonLat p = offset(w.zones[i].centroid, rr * std::cos(th), rr * std::sin(th));
      bool ok = true;
      for (const auto& q : s) ok = ok && haversine_m(p, q) >= c.min_location_sep_m;
      if (ok) s.push_back(p);
    }
    w.sites.push_back(std::move(s));
  }

  // Planted impedance and destination law.
  Eigen::MatrixXd D(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> d;
      for (const auto& a : w.sites[i])
        for (const auto& b : w.sites[j])
          if (!(a == b)) d.push_back(haversine_m(a, b));
      D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = median(d);
    }
  }
  Eigen::MatrixXd F(D.rows(), D.cols());
  for (Eigen::Index i = 0; i < D.rows(); ++i)
    for (Eigen::Index j = 0; j < D.cols(); ++j) F(i, j) = W(j) * std::pow(D(i, j), -c.beta);
  const Eigen::VectorXd S = F.rowwise().sum();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> cdf(n);
    double acc = 0;
    for (std::size_t j = 0; j < n; ++j) {
      acc += F(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) /
             S(static_cast<Eigen::Index>(i));
      cdf[j] = acc;
    }
    w.choice_cdf.push_back(std::move(cdf));
  }

  SynthResult res;
  res.beta = c.beta;
  res.year = c.start_year;
  res.attractiveness = W;
  res.planted_cost = D;
  res.observed_days = count_observed_days(w.start, w.end - 1, tz);

  // Residents and sampled devices.
  const Eigen::VectorXd H = W.cwiseProduct(S);
  const auto pops = apportion(c.residents, H);
  std::vector<std::size_t> device_zone;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& z = w.zones[i];
    res.zone_population[z.zone_id] = pops[i];
    res.county_population[z.county_id] += pops[i];
    for (std::int64_t k = 0; k < pops[i]; ++k) {
      if (!bernoulli(rng, c.sampling_rate)) continue;
      SynthDevice dev;
      dev.device_id = padded("d", res.devices.size() + 1, 6);
      dev.home_zone = z.zone_id;
      dev.county_id = z.county_id;
      dev.home = w.sites[i][std::uniform_int_distribution<std::size_t>(0, w.sites[i].size() - 1)(rng)];
      dev.sparse = bernoulli(rng, c.sparse_device_fraction);
      res.devices.push_back(std::move(dev));
      device_zone.push_back(i);
    }
  }

  std::vector<DeviceOutput> outputs(res.devices.size());
  parallel_for(res.devices.size(), workers, [&](std::size_t k) {
    outputs[k] = simulate_device(w, res.devices[k], device_zone[k], k);
  });

  std::map<std::string, std::int64_t> sampled;
  for (const auto& d : res.devices) ++sampled[d.county_id];
  ZoneIndex index(w.zones);
  res.odm_weekday.zone_ids = res.odm_weekend.zone_ids = index.zone_ids();
  res.odm_weekday.day_type = DayType::kWeekday;
  res.odm_weekend.day_type = DayType::kWeekend;
  res.odm_weekday.year = res.odm_weekend.year = c.start_year;
  res.odm_weekday.cells = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  res.odm_weekend.cells = res.odm_weekday.cells;
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    auto& o = outputs[k];
    const auto& dev = res.devices[k];
    const double weight = static_cast<double>(res.county_population[dev.county_id]) /
                          static_cast<double>(sampled[dev.county_id]);
    for (auto& t : o.trips) {
      t.weight = weight;
      const auto oi = index.locate(t.origin());
      const auto di = index.locate(t.destination());
      ODMatrix& odm = t.day_type == DayType::kWeekday ? res.odm_weekday : res.odm_weekend;
      odm.cells(static_cast<Eigen::Index>(*oi), static_cast<Eigen::Index>(*di)) += weight;
    }
    res.pings.insert(res.pings.end(), std::make_move_iterator(o.pings.begin()),
                     std::make_move_iterator(o.pings.end()));
    res.stays.insert(res.stays.end(), o.stays.begin(), o.stays.end());
    res.trips.insert(res.trips.end(), std::make_move_iterator(o.trips.begin()),
                     std::make_move_iterator(o.trips.end()));
  }
  if (res.observed_days.weekday > 0) res.odm_weekday.cells /= static_cast<double>(res.observed_days.weekday);
  if (res.observed_days.weekend > 0) res.odm_weekend.cells /= static_cast<double>(res.observed_days.weekend);
  res.odm_weekday.refresh_marginals();
  res.odm_weekend.refresh_marginals();

  res.sea = make_sea(c, w.zones, res.zone_population, W);
  res.zones = std::move(w.zones);
  return res;
}

// ---------------------------------------------------------------------------

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  return f;
}

}  // namespace

std::string write_synth(const SynthResult& r, const std::string& dir, PingFormat format) {
  const std::string ping_path =
      dir + (format == PingFormat::kCsv ? "/pings.csv" : "/pings.ndjson");
  {
    auto f = open_out(ping_path);
    write_pings(f, r.pings, format);
  }
  {
    auto f = open_out(dir + "/zones.geojson");
    f << zones_to_geojson(r.zones).dump() << '\n';
  }
  {
    auto f = open_out(dir + "/sea.csv");
    write_sea(f, r.sea);
  }
  {
    auto f = open_out(dir + "/population.csv");
    csv::Writer w(f);
    w.row({"county_id", "population"});
    for (const auto& [county, pop] : r.county_population) {
      w.field(county).field(pop);
      w.end_row();
    }
  }
  {
    auto f = open_out(dir + "/truth_homes.csv");
    csv::Writer w(f);
    w.row({"device_id", "lon", "lat", "zone_id", "county_id", "sparse"});
    for (const auto& d : r.devices) {
      w.field(d.device_id).field(d.home.lon).field(d.home.lat).field(d.home_zone).field(
          d.county_id).field(d.sparse ? 1 : 0);
      w.end_row();
    }
  }
  {
    auto f = open_out(dir + "/truth_stays.csv");
    write_stays(f, r.stays);
  }
  {
    auto f = open_out(dir + "/truth_trips.csv");
    write_trips(f, r.trips);
  }
  {
    auto f = open_out(dir + "/truth_odm_weekday.csv");
    write_odm(f, r.odm_weekday);
  }
  {
    auto f = open_out(dir + "/truth_odm_weekend.csv");
    write_odm(f, r.odm_weekend);
  }
  {
    auto f = open_out(dir + "/truth.json");
    nlohmann::json j = {
        {"beta", r.beta},
        {"year", r.year},
        {"devices", r.devices.size()},
        {"observed_days", {{"weekday", r.observed_days.weekday},
                           {"weekend", r.observed_days.weekend}}},
        {"total_trips_per_day", {{"weekday", r.odm_weekday.cells.sum()},
                                 {"weekend", r.odm_weekend.cells.sum()}}}};
    f << j.dump(2) << '\n';
  }
  return ping_path;
}

}  // namespace tripcast
