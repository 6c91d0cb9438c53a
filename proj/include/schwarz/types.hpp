#pragma once

#include <Eigen/Dense>

namespace schwarz {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

} // namespace schwarz
