#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tripcast/error.h"
#include "tripcast/geo.h"
#include "tripcast/homes.h"
#include "tripcast/pipeline.h"
#include "tripcast/tripdist.h"
#include "tripcast/tripgen.h"
#include "tripcast/trips.h"

namespace py = pybind11;
using namespace tripcast;

namespace {

py::dict model_dict(const RegressionModel& m) {
  py::dict d;
  d["terms"] = m.terms;
  d["coefficients"] = m.coefficients;
  d["std_errors"] = m.std_errors;
  d["t_stats"] = m.t_stats;
  d["p_values"] = m.p_values;
  d["r_squared"] = m.r_squared;
  d["adj_r_squared"] = m.adj_r_squared;
  d["f_stat"] = m.f_stat;
  d["f_p_value"] = m.f_p_value;
  d["n_obs"] = m.n_obs;
  return d;
}

std::vector<Ping> make_pings(const std::string& device, const std::vector<double>& lon,
                             const std::vector<double>& lat,
                             const std::vector<std::int64_t>& ts) {
  if (lon.size() != lat.size() || lon.size() != ts.size())
    throw std::invalid_argument("lon, lat and timestamps must have equal length");
  std::vector<Ping> pings(lon.size());
  for (std::size_t i = 0; i < lon.size(); ++i) pings[i] = {device, lon[i], lat[i], ts[i], 0.0};
  return pings;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "tripcast core bindings";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<MissingArtifactError>(m, "MissingArtifactError", PyExc_FileNotFoundError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  m.def(
      "haversine_m",
      [](double lon1, double lat1, double lon2, double lat2) {
        return haversine_m({lon1, lat1}, {lon2, lat2});
      },
      py::arg("lon1"), py::arg("lat1"), py::arg("lon2"), py::arg("lat2"),
      "Great-circle distance in meters.");

  m.def("gravity_distribute", &gravity_distribute, py::arg("production"), py::arg("attraction"),
        py::arg("cost"), py::arg("beta"),
        "Production-constrained gravity distribution of P over destinations.");

  m.def("distribution_mse", &distribution_mse, py::arg("predicted"), py::arg("observed"));

  m.def(
      "calibrate_beta",
      [](const Eigen::VectorXd& p, const Eigen::VectorXd& a, const Eigen::MatrixXd& d,
         const Eigen::MatrixXd& observed, double beta_min, double beta_max, double step,
         int workers) {
        const auto g = calibrate_beta(p, a, d, observed, {beta_min, beta_max, step}, workers);
        py::dict out;
        out["beta"] = g.beta;
        out["grid"] = g.grid;
        out["mse"] = g.mse;
        return out;
      },
      py::arg("production"), py::arg("attraction"), py::arg("cost"), py::arg("observed"),
      py::arg("beta_min") = 0.1, py::arg("beta_max") = 3.0, py::arg("step") = 0.1,
      py::arg("workers") = 1, "Grid line search for the gravity exponent.");

  m.def(
      "fit_ols",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> names) {
        if (names.empty())
          for (Eigen::Index c = 0; c < x.cols(); ++c) names.push_back("x" + std::to_string(c + 1));
        return model_dict(fit_ols(x, y, names));
      },
      py::arg("covariates"), py::arg("y"), py::arg("names") = std::vector<std::string>{},
      "OLS with an intercept; returns coefficients and inference statistics.");

  m.def(
      "detect_stay_points",
      [](const std::vector<double>& lon, const std::vector<double>& lat,
         const std::vector<std::int64_t>& ts, double dist_m, std::int64_t min_stay_s) {
        const auto pings = make_pings("device", lon, lat, ts);
        StayOptions opts;
        opts.dist_m = dist_m;
        opts.min_stay_s = min_stay_s;
        py::list out;
        for (const auto& s : detect_stay_points(pings, opts)) {
          py::dict d;
          d["lon"] = s.centroid.lon;
          d["lat"] = s.centroid.lat;
          d["arrival"] = s.arrival;
          d["departure"] = s.departure;
          d["ping_count"] = s.ping_count;
          out.append(d);
        }
        return out;
      },
      py::arg("lon"), py::arg("lat"), py::arg("timestamps"), py::arg("dist_m") = 100.0,
      py::arg("min_stay_s") = 600);

  m.def(
      "mean_shift",
      [](const std::vector<double>& lon, const std::vector<double>& lat, double bandwidth_m) {
        if (lon.size() != lat.size()) throw std::invalid_argument("lon and lat differ in length");
        std::vector<LonLat> pts(lon.size());
        for (std::size_t i = 0; i < lon.size(); ++i) pts[i] = {lon[i], lat[i]};
        MeanShiftOptions opts;
        opts.bandwidth_m = bandwidth_m;
        std::vector<std::tuple<double, double, std::size_t>> out;
        for (const auto& mode : mean_shift(pts, opts))
          out.emplace_back(mode.center.lon, mode.center.lat, mode.count);
        return out;
      },
      py::arg("lon"), py::arg("lat"), py::arg("bandwidth_m") = 100.0,
      "Flat-kernel mean-shift modes as (lon, lat, count).");

  m.def("stage_names", &stage_names);

  m.def(
      "run_stage",
      [](const std::string& stage, const std::string& config_path,
         const std::vector<std::string>& overrides) {
        const auto cfg = load_config(config_path, overrides);
        py::gil_scoped_release release;
        if (stage == "all") {
          run_chain(cfg);
        } else {
          run_stage(stage, cfg);
        }
      },
      py::arg("stage"), py::arg("config_path") = "",
      py::arg("overrides") = std::vector<std::string>{},
      "Runs one pipeline stage (or 'all') with an optional TOML file and overrides.");
}
