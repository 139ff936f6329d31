#pragma once

#include <Eigen/Dense>

namespace tgp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Point = Eigen::RowVector2d;
// One row per 2-D input location.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

// Posterior summary at a set of query points, in whatever units the model
// was trained in.
struct Prediction {
  Vector mean;
  Vector latent_var;
};

}  // namespace tgp
