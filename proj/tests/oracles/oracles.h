#pragma once

// Independent reference implementations used only by the tests. They are
// deliberately naive (direct formulas, dense loops, no shared helpers with
// the library) so that agreement with the library is meaningful.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

inline double haversine(double lon1, double lat1, double lon2, double lat2) {
  constexpr double r = 6371008.8;
  const double d2r = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * d2r;
  const double dlon = (lon2 - lon1) * d2r;
  const double s = std::sin(dlat / 2);
  const double t = std::sin(dlon / 2);
  const double h = s * s + std::cos(lat1 * d2r) * std::cos(lat2 * d2r) * t * t;
  return 2 * r * std::asin(std::min(1.0, std::sqrt(h)));
}

using Matrix = std::vector<std::vector<double>>;

// N_ij = P_i A_j D_ij^-b / sum_k A_k D_ik^-b, evaluated literally.
inline Matrix gravity(const std::vector<double>& p, const std::vector<double>& a,
                      const Matrix& d, double beta) {
  const std::size_t n = p.size();
  Matrix out(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t k = 0; k < n; ++k) denom += a[k] * std::pow(d[i][k], -beta);
    for (std::size_t j = 0; j < n; ++j)
      out[i][j] = p[i] * a[j] * std::pow(d[i][j], -beta) / denom;
  }
  return out;
}

inline double mse(const Matrix& x, const Matrix& y) {
  double s = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x[i].size(); ++j) {
      s += (x[i][j] - y[i][j]) * (x[i][j] - y[i][j]);
      ++cells;
    }
  return s / static_cast<double>(cells);
}

// Gauss-Jordan inverse with partial pivoting.
inline Matrix invert(Matrix m) {
  const std::size_t n = m.size();
  Matrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    if (m[piv][c] == 0.0) throw std::runtime_error("singular");
    std::swap(m[piv], m[c]);
    std::swap(inv[piv], inv[c]);
    const double d = m[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      m[c][k] /= d;
      inv[c][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m[r][c];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        m[r][k] -= f * m[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

struct Ols {
  std::vector<double> coef;
  std::vector<double> se;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double f = 0.0;
};

// Normal equations: b = (X'X)^-1 X'y with an intercept column prepended.
inline Ols ols(const Matrix& x_rows, const std::vector<double>& y) {
  const std::size_t n = y.size();
  const std::size_t k = x_rows.empty() ? 0 : x_rows[0].size();
  const std::size_t p = k + 1;
  auto x = [&](std::size_t r, std::size_t c) { return c == 0 ? 1.0 : x_rows[r][c - 1]; };
  Matrix xtx(p, std::vector<double>(p, 0.0));
  std::vector<double> xty(p, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t a = 0; a < p; ++a) {
      xty[a] += x(r, a) * y[r];
      for (std::size_t b = 0; b < p; ++b) xtx[a][b] += x(r, a) * x(r, b);
    }
  const Matrix inv = invert(xtx);
  Ols out;
  out.coef.assign(p, 0.0);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) out.coef[a] += inv[a][b] * xty[b];
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(n);
  double rss = 0.0;
  double tss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double fit = 0.0;
    for (std::size_t a = 0; a < p; ++a) fit += out.coef[a] * x(r, a);
    rss += (y[r] - fit) * (y[r] - fit);
    tss += (y[r] - ybar) * (y[r] - ybar);
  }
  const double dof = static_cast<double>(n - p);
  const double s2 = rss / dof;
  for (std::size_t a = 0; a < p; ++a) out.se.push_back(std::sqrt(s2 * inv[a][a]));
  out.r2 = 1.0 - rss / tss;
  out.adj_r2 = 1.0 - (1.0 - out.r2) * static_cast<double>(n - 1) / dof;
  out.f = ((tss - rss) / static_cast<double>(k)) / s2;
  return out;
}

struct TracePoint {
  double lon;
  double lat;
  std::int64_t t;
};

struct Stay {
  std::size_t first;
  std::size_t last;  // inclusive
};

// Greedy maximal runs found from a full pairwise distance table: a run
// anchored at i covers every later index e such that all of i+1..e lie
// within dist of i. A run is a stay when it has >= 2 points and spans at
// least min_stay seconds; scanning then resumes after it, otherwise at i+1.
inline std::vector<Stay> stay_runs(const std::vector<TracePoint>& pts, double dist,
                                   std::int64_t min_stay) {
  const std::size_t n = pts.size();
  std::vector<std::vector<bool>> near(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      near[i][j] = haversine(pts[i].lon, pts[i].lat, pts[j].lon, pts[j].lat) <= dist;
  std::vector<Stay> out;
  std::size_t i = 0;
  while (i < n) {
    std::size_t best = i;
    for (std::size_t e = i; e < n; ++e) {
      bool all = true;
      for (std::size_t k = i + 1; k <= e; ++k) all = all && near[i][k];
      if (all) best = e;
    }
    if (best > i && pts[best].t - pts[i].t >= min_stay) {
      out.push_back({i, best});
      i = best + 1;
    } else {
      ++i;
    }
  }
  return out;
}

// Even-odd ray casting over a closed ring.
inline bool in_ring(const std::vector<std::pair<double, double>>& ring, double x, double y) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const auto [xi, yi] = ring[i];
    const auto [xj, yj] = ring[j];
    if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) inside = !inside;
  }
  return inside;
}

inline std::map<std::pair<std::string, std::string>, double> group_sum(
    const std::vector<std::string>& ids, const Matrix& cells,
    const std::map<std::string, std::string>& group) {
  std::map<std::pair<std::string, std::string>, double> out;
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = 0; j < ids.size(); ++j)
      out[{group.at(ids[i]), group.at(ids[j])}] += cells[i][j];
  return out;
}

struct Line {
  double rho;
  double slope;
  double intercept;
};

inline Line fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double cxy = 0, cxx = 0, cyy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cxy += (x[i] - mx) * (y[i] - my);
    cxx += (x[i] - mx) * (x[i] - mx);
    cyy += (y[i] - my) * (y[i] - my);
  }
  const double slope = cxy / cxx;
  return {cxy / std::sqrt(cxx * cyy), slope, my - slope * mx};
}

}  // namespace oracle
