#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace netlod {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

} // namespace netlod
