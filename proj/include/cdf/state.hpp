#pragma once

#include <sstream>
#include <string>

#include "cdf/errors.hpp"
#include "cdf/linalg.hpp"

namespace cdf {

/// Full state U = (u, v): the conserved block u (first n entries) followed by
/// the dissipative block v (last m entries).
class StateVector {
 public:
  StateVector() = default;

  StateVector(int n_conserved, int n_dissipative)
      : data_(Vector::Zero(checked_size(n_conserved, n_dissipative))),
        n_(n_conserved),
        m_(n_dissipative) {}

  StateVector(int n_conserved, int n_dissipative, const Vector& data)
      : data_(data), n_(n_conserved), m_(n_dissipative) {
    if (data.size() != checked_size(n_conserved, n_dissipative)) {
      throw DomainError("state length " + std::to_string(data.size()) + " != n + m = " +
                        std::to_string(n_conserved + n_dissipative));
    }
    if (!all_finite()) throw DomainError("state has non-finite entries: " + to_string());
  }

  int n_conserved() const { return n_; }
  int n_dissipative() const { return m_; }
  int size() const { return n_ + m_; }

  const Vector& data() const { return data_; }
  Vector& data() { return data_; }

  auto conserved() const { return data_.head(n_); }
  auto conserved() { return data_.head(n_); }
  auto dissipative() const { return data_.tail(m_); }
  auto dissipative() { return data_.tail(m_); }

  double operator[](int i) const { return data_(i); }
  double& operator[](int i) { return data_(i); }

  bool all_finite() const { return data_.allFinite(); }

  std::string to_string() const {
    std::ostringstream os;
    os.precision(17);
    os << "(";
    for (int i = 0; i < size(); ++i) os << (i ? ", " : "") << data_(i);
    os << ")";
    return os.str();
  }

  friend bool operator==(const StateVector& a, const StateVector& b) {
    return a.n_ == b.n_ && a.m_ == b.m_ && a.data_ == b.data_;
  }

 private:
  static int checked_size(int n, int m) {
    if (n < 1 || m < 1 || n + m > kMaxComponents) {
      throw DomainError("state block sizes out of range: n=" + std::to_string(n) + ", m=" + std::to_string(m));
    }
    return n + m;
  }

  Vector data_;
  int n_ = 0;
  int m_ = 0;
};

}  // namespace cdf
