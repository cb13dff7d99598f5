#pragma once

#include <iosfwd>

#include <Eigen/Core>

#include <nlohmann/json.hpp>
#include "tripcast/domain.h"

namespace tripcast {

/// Production-constrained gravity model:
///   N̂_ij = P_i · A_j · D_ij^-β / Σ_k A_k · D_ik^-β
/// Rows with P_i = 0 are zero. Throws DataError("undistributable production")
/// when a row with P_i > 0 has no positive weight, and invalid_argument on
/// shape mismatches, negative A or non-positive D.
Eigen::MatrixXd gravity_distribute(const Eigen::VectorXd& production,
                                   const Eigen::VectorXd& attraction,
                                   const Eigen::MatrixXd& cost, double beta);

/// Mean of squared cell differences over all n² cells.
double distribution_mse(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& observed);

struct BetaSearch {
  double range_min = 0.1;
  double range_max = 3.0;
  double step = 0.1;
};

/// Inclusive grid range_min, range_min + step, ..., <= range_max (values
/// rounded to 1e-9 so 0.1 steps land on the decimal grid).
std::vector<double> beta_grid(const BetaSearch& search);

/// Grid line search over β minimizing distribution_mse; ties go to the
/// smallest β. Grid points are evaluated on up to `workers` threads.
GravityModel calibrate_beta(const Eigen::VectorXd& production, const Eigen::VectorXd& attraction,
                            const Eigen::MatrixXd& cost, const Eigen::MatrixXd& observed,
                            const BetaSearch& search = {}, int workers = 1);

inline constexpr int kGravityFormatVersion = 1;

void write_beta_curve(std::ostream& out, const GravityModel& model);
nlohmann::json gravity_to_json(const GravityModel& model);
GravityModel gravity_from_json(const nlohmann::json& doc);

}  // namespace tripcast
