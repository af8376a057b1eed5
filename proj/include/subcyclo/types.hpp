#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace subcyclo {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

// Bad user input: malformed configs, violated preconditions.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Failures that are not the caller's fault: numerics, I/O.
class RuntimeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Signed slice offset K_k for 0-based slice k out of n.
// Odd n: k - (n-1)/2, even n: k - n/2.
inline int slice_offset(int k, int n) { return (n % 2) ? k - (n - 1) / 2 : k - n / 2; }

} // namespace subcyclo
