#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qbench {

using Complex = std::complex<double>;
using VectorXd = Eigen::VectorXd;
using VectorXcd = Eigen::VectorXcd;
using MatrixXd = Eigen::MatrixXd;
using MatrixXcd = Eigen::MatrixXcd;

// Thrown for malformed specs, configs, or arguments. The CLI maps this to
// exit code 1.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown for failures encountered while computing (non-convergence,
// degenerate references, inconsistent data). CLI exit code 2.
class ComputeError : public std::runtime_error {
  public:
    explicit ComputeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Occupation per site. Fermi-Hubbard chains store the up-spin occupancies
// followed by the down-spin occupancies (2L entries).
using Configuration = std::vector<std::uint8_t>;

std::string configuration_to_string(const Configuration& z);
Configuration configuration_from_string(const std::string& text);

} // namespace qbench
