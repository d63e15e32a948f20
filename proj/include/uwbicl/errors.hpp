#pragma once

#include <stdexcept>
#include <string>

namespace uwbicl {

// Raised when a frame or channel layout breaks the PRI timing budget
// (pulse + PPM shift + TH shift + delay spread must fit in one PRI).
class ConfigViolation : public std::runtime_error {
 public:
  explicit ConfigViolation(const std::string& what) : std::runtime_error(what) {}
};

class InsufficientData : public std::runtime_error {
 public:
  explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace uwbicl
