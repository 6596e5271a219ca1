#pragma once

#include <stdexcept>
#include <string>

namespace wm {

enum class ErrorKind { Parameter, Geometry, Gauge, Convergence, Precondition, IO };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct ParameterError : Error {
  explicit ParameterError(const std::string& w) : Error(ErrorKind::Parameter, w) {}
};

struct GeometryError : Error {
  GeometryError(const std::string& w, int face = -1) : Error(ErrorKind::Geometry, w), face(face) {}
  int face;
};

struct GaugeError : Error {
  explicit GaugeError(const std::string& w) : Error(ErrorKind::Gauge, w) {}
};

struct ConvergenceError : Error {
  ConvergenceError(const std::string& w, double residual)
      : Error(ErrorKind::Convergence, w), residual(residual) {}
  double residual;
};

struct PreconditionError : Error {
  explicit PreconditionError(const std::string& w) : Error(ErrorKind::Precondition, w) {}
};

struct IOError : Error {
  explicit IOError(const std::string& w) : Error(ErrorKind::IO, w) {}
};

}  // namespace wm
