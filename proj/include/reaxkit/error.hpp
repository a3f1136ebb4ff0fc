#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reaxkit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input file / configuration.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A per-atom list slab overflowed its capacity.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& list, std::size_t atom, std::size_t capacity)
      : Error(list + " capacity exceeded at atom " + std::to_string(atom) + " (capacity " +
              std::to_string(capacity) + ")"),
        atom_(atom),
        capacity_(capacity) {}

  std::size_t atom() const { return atom_; }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t atom_;
  std::size_t capacity_;
};

/// Iterative solver hit its iteration limit.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual_s, double residual_t)
      : Error(what), residual_s_(residual_s), residual_t_(residual_t) {}

  double residual_s() const { return residual_s_; }
  double residual_t() const { return residual_t_; }

 private:
  double residual_s_;
  double residual_t_;
};

/// Geometry for which a term is undefined (coincident atoms).
class GeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace reaxkit
