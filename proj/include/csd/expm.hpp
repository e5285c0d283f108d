#pragma once

#include <Eigen/Dense>

namespace csd {

/// Dense matrix exponential by scaling-and-squaring with a degree-13 Pade
/// approximant.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a);

} // namespace csd
