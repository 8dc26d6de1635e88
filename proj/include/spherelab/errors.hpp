#pragma once

#include <stdexcept>
#include <string>

namespace spherelab {

/// Invalid parameter or precondition violation.
class ParameterError : public std::invalid_argument {
public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Query outside the range of a precomputed table.
class RangeError : public std::out_of_range {
public:
  explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

/// A configured support/work budget would be exceeded.
class ResourceError : public std::runtime_error {
public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// Degenerate data for a fit or scan (zero blocks, too few samples, ...).
class AnalysisError : public std::runtime_error {
public:
  explicit AnalysisError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spherelab
