#pragma once

#include <Eigen/Dense>

namespace nbci {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

} // namespace nbci
