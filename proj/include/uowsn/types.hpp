#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace uowsn {

/// N x 3 node coordinates, one row per node (m).
template <typename Scalar>
using PositionsT = Eigen::Matrix<Scalar, Eigen::Dynamic, 3>;
using Positions = PositionsT<double>;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::VectorXd;

using MaskMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Error hierarchy. Every error thrown by the library derives from Error so the
// CLI can report the failing stage uniformly.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

class SingularGeometryError : public Error {
 public:
  SingularGeometryError(const std::string& what, std::ptrdiff_t node)
      : Error(what), node_(node) {}
  /// Offending node index, -1 when not tied to a node.
  std::ptrdiff_t node() const { return node_; }

 private:
  std::ptrdiff_t node_;
};

class DisconnectedGraphError : public Error {
 public:
  DisconnectedGraphError(const std::string& what,
                         std::vector<std::vector<int>> components)
      : Error(what), components_(std::move(components)) {}
  const std::vector<std::vector<int>>& components() const {
    return components_;
  }

 private:
  std::vector<std::vector<int>> components_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace uowsn
