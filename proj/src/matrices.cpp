#include "tripcast/matrices.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "tripcast/csv.h"
#include "tripcast/error.h"

namespace tripcast {

OdmAccumulator::OdmAccumulator(const ZoneIndex& index, DayType day_type)
    : index_(&index),
      day_type_(day_type),
      sums_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(index.size()),
                                  static_cast<Eigen::Index>(index.size()))) {}

void OdmAccumulator::add(const Trip& trip) {
  if (trip.day_type != day_type_) {
    ++diag_.other_day_type;
    return;
  }
  const auto o = index_->locate(trip.origin());
  const auto d = index_->locate(trip.destination());
  if (!o || !d) {
    ++diag_.outside_zones;
    return;
  }
  sums_(static_cast<Eigen::Index>(*o), static_cast<Eigen::Index>(*d)) += trip.weight;
  ++diag_.included;
}

void OdmAccumulator::merge(const OdmAccumulator& other) {
  sums_ += other.sums_;
  diag_.included += other.diag_.included;
  diag_.outside_zones += other.diag_.outside_zones;
  diag_.other_day_type += other.diag_.other_day_type;
}

ODMatrix OdmAccumulator::finish(int year, std::int64_t observed_days) const {
  if (observed_days <= 0)
    throw DataError(std::string("no observed ") + to_string(day_type_) +
                    " days to normalize the OD matrix");
  ODMatrix odm;
  odm.zone_ids = index_->zone_ids();
  odm.cells = sums_ / static_cast<double>(observed_days);
  odm.day_type = day_type_;
  odm.year = year;
  odm.refresh_marginals();
  return odm;
}

OdmBuildResult build_odm(std::span<const Trip> trips, const ZoneIndex& index, DayType day_type,
                         int year, std::int64_t observed_days) {
  OdmAccumulator acc(index, day_type);
  for (const auto& t : trips) acc.add(t);
  return {acc.finish(year, observed_days), acc.diagnostics()};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> odm_marginals(const Eigen::MatrixXd& cells) {
  return {cells.rowwise().sum(), cells.colwise().sum().transpose()};
}

ObservedDays count_observed_days(std::int64_t first_ts, std::int64_t last_ts,
                                 const TimeZone& tz) {
  ObservedDays days;
  if (last_ts < first_ts) return days;
  const LocalTime first = tz.local(first_ts);
  const LocalTime last = tz.local(last_ts);
  for (std::int64_t d = first.day; d <= last.day; ++d) {
    // 1970-01-01 was a Thursday (weekday index 3 with Monday = 0).
    const std::int64_t wd = ((d % 7) + 7 + 3) % 7;
    if (wd >= 5) {
      ++days.weekend;
    } else {
      ++days.weekday;
    }
  }
  return days;
}

// ---------------------------------------------------------------------------

CostAccumulator::CostAccumulator(const ZoneIndex& index, std::optional<DayType> day_type)
    : index_(&index),
      day_type_(day_type),
      times_(index.size() * index.size()),
      lengths_(index.size() * index.size()) {}

void CostAccumulator::add(const Trip& trip) {
  if (day_type_ && trip.day_type != *day_type_) return;
  const auto o = index_->locate(trip.origin());
  const auto d = index_->locate(trip.destination());
  if (!o || !d) return;
  const std::size_t cell = *o * index_->size() + *d;
  times_[cell].push_back(trip.travel_time);
  lengths_[cell].push_back(trip.path_length);
  sum_length_ += trip.path_length;
  sum_time_ += trip.travel_time;
}

void CostAccumulator::merge(const CostAccumulator& other) {
  for (std::size_t c = 0; c < times_.size(); ++c) {
    times_[c].insert(times_[c].end(), other.times_[c].begin(), other.times_[c].end());
    lengths_[c].insert(lengths_[c].end(), other.lengths_[c].begin(), other.lengths_[c].end());
  }
  sum_length_ += other.sum_length_;
  sum_time_ += other.sum_time_;
}

std::optional<double> CostAccumulator::mean_speed() const {
  if (!(sum_time_ > 0.0)) return std::nullopt;
  return sum_length_ / sum_time_;
}

CostMatrix CostAccumulator::finish(CostAggregation aggregation,
                                   const CostFallbackConfig& fallback) const {
  const std::size_t n = index_->size();
  CostMatrix cost;
  cost.zone_ids = index_->zone_ids();
  cost.aggregation = aggregation;
  cost.cells.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  cost.provenance.assign(n * n, CellSource::kObserved);

  const double speed = mean_speed().value_or(fallback.default_speed_mps);
  const bool time_cost = aggregation.measure == CostMeasure::kTravelTime;
  const auto& samples = time_cost ? times_ : lengths_;

  std::vector<double> nearest(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      best = std::min(best, haversine_m(index_->zone(i).centroid, index_->zone(j).centroid));
    }
    nearest[i] = std::isfinite(best) ? best : 0.0;
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& s = samples[i * n + j];
      double value;
      if (!s.empty()) {
        value = aggregation.statistic == CostStatistic::kMedian ? median(s) : mean(s);
      } else {
        cost.provenance[i * n + j] = CellSource::kFallback;
        const double meters =
            i == j ? 0.5 * nearest[i]
                   : haversine_m(index_->zone(i).centroid, index_->zone(j).centroid);
        value = time_cost ? meters / speed : meters;
      }
      cost.cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::max(value, fallback.min_cost);
    }
  }
  return cost;
}

CostMatrix build_cost_matrix(std::span<const Trip> trips, const ZoneIndex& index,
                             CostAggregation aggregation, const CostFallbackConfig& fallback,
                             std::optional<DayType> day_type) {
  CostAccumulator acc(index, day_type);
  for (const auto& t : trips) acc.add(t);
  return acc.finish(aggregation, fallback);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::map<std::string, Eigen::Index> position_map(const std::vector<std::string>& ids) {
  std::map<std::string, Eigen::Index> pos;
  for (std::size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = static_cast<Eigen::Index>(i);
  return pos;
}

struct SparseCell {
  Eigen::Index i;
  Eigen::Index j;
  double value;
  std::string provenance;
};

std::vector<SparseCell> read_sparse(std::istream& in, const std::vector<std::string>& zone_ids,
                                    const char* what) {
  const csv::Table t = csv::read(in);
  const auto c_o = t.require_column("origin_zone", what);
  const auto c_d = t.require_column("dest_zone", what);
  const auto c_v = t.require_column("value", what);
  const auto c_p = t.column("provenance");
  const auto pos = position_map(zone_ids);
  std::vector<SparseCell> cells;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where =
        std::string(what) + " line " + std::to_string(t.line_numbers[r]);
    if (row.size() != t.header.size()) throw DataError(where + ": wrong field count");
    auto o = pos.find(row[c_o]);
    auto d = pos.find(row[c_d]);
    if (o == pos.end() || d == pos.end()) throw DataError(where + ": unknown zone");
    auto v = csv::parse_double(row[c_v]);
    if (!v) throw DataError(where + ": non-numeric value");
    cells.push_back({o->second, d->second, *v, c_p ? row[*c_p] : std::string("observed")});
  }
  return cells;
}

}  // namespace

void write_odm(std::ostream& out, const ODMatrix& odm) {
  csv::Writer w(out);
  w.row({"origin_zone", "dest_zone", "value", "provenance"});
  const auto n = static_cast<Eigen::Index>(odm.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = odm.cells(i, j);
      if (v == 0.0) continue;
      w.field(odm.zone_ids[static_cast<std::size_t>(i)])
          .field(odm.zone_ids[static_cast<std::size_t>(j)])
          .field(v)
          .field("observed");
      w.end_row();
    }
  }
}

ODMatrix read_odm(std::istream& in, const std::vector<std::string>& zone_ids, DayType day_type,
                  int year) {
  const auto n = static_cast<Eigen::Index>(zone_ids.size());
  ODMatrix odm;
  odm.zone_ids = zone_ids;
  odm.day_type = day_type;
  odm.year = year;
  odm.cells = Eigen::MatrixXd::Zero(n, n);
  for (const auto& c : read_sparse(in, zone_ids, "odm")) {
    if (c.value < 0) throw DataError("odm: negative cell");
    odm.cells(c.i, c.j) = c.value;
  }
  odm.refresh_marginals();
  return odm;
}

void write_cost_matrix(std::ostream& out, const CostMatrix& cost) {
  csv::Writer w(out);
  w.row({"origin_zone", "dest_zone", "value", "provenance"});
  const std::size_t n = cost.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      w.field(cost.zone_ids[i])
          .field(cost.zone_ids[j])
          .field(cost.cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
          .field(cost.source(i, j) == CellSource::kObserved ? "observed" : "fallback");
      w.end_row();
    }
  }
}

CostMatrix read_cost_matrix(std::istream& in, const std::vector<std::string>& zone_ids,
                            CostAggregation aggregation) {
  const std::size_t n = zone_ids.size();
  CostMatrix cost;
  cost.zone_ids = zone_ids;
  cost.aggregation = aggregation;
  cost.cells = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n),
                                         static_cast<Eigen::Index>(n), NAN);
  cost.provenance.assign(n * n, CellSource::kObserved);
  for (const auto& c : read_sparse(in, zone_ids, "cost matrix")) {
    cost.cells(c.i, c.j) = c.value;
    const auto k = static_cast<std::size_t>(c.i) * n + static_cast<std::size_t>(c.j);
    if (c.provenance == "fallback") {
      cost.provenance[k] = CellSource::kFallback;
    } else if (c.provenance != "observed") {
      throw DataError("cost matrix: unknown provenance '" + c.provenance + "'");
    }
  }
  if (!cost.cells.allFinite()) throw DataError("cost matrix: missing cells");
  return cost;
}

void write_dense(std::ostream& out, const std::vector<std::string>& zone_ids,
                 const Eigen::MatrixXd& cells) {
  csv::Writer w(out);
  w.field("origin_zone");
  for (const auto& id : zone_ids) w.field(id);
  w.end_row();
  for (Eigen::Index i = 0; i < cells.rows(); ++i) {
    w.field(zone_ids[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < cells.cols(); ++j) w.field(cells(i, j));
    w.end_row();
  }
}

}  // namespace tripcast
