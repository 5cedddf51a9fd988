#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zdq {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A symbol whose cell carries (numerically) no probability under the belief.
class ZeroProbabilitySymbol : public Error {
 public:
  ZeroProbabilitySymbol(std::size_t symbol, double mass)
      : Error("zero-probability symbol " + std::to_string(symbol) +
              " (cell mass " + std::to_string(mass) + ")"),
        symbol_(symbol),
        mass_(mass) {}
  std::size_t symbol() const noexcept { return symbol_; }
  double mass() const noexcept { return mass_; }

 private:
  std::size_t symbol_;
  double mass_;
};

class NoInvariantDistribution : public Error {
 public:
  explicit NoInvariantDistribution(const std::string& why)
      : Error("no stable invariant distribution: " + why) {}
};

class EmptyClassification : public Error {
 public:
  EmptyClassification() : Error("empty classification: point lies in no cell") {}
};

// Search exceeded its node budget. partial_bound() is the value of the best
// fully evaluated root choice (an achievable cost), or +inf when none finished.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::size_t budget, double partial_bound)
      : Error("budget exceeded: node budget " + std::to_string(budget)),
        budget_(budget),
        partial_bound_(partial_bound) {}
  std::size_t budget() const noexcept { return budget_; }
  double partial_bound() const noexcept { return partial_bound_; }

 private:
  std::size_t budget_;
  double partial_bound_;
};

class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, double residual)
      : Error(what + " did not converge (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Encoder and decoder disagree on the belief state. Never expected.
class Desynchronized : public Error {
 public:
  explicit Desynchronized(std::size_t t)
      : Error("encoder/decoder belief desynchronization at t=" + std::to_string(t)) {}
};

}  // namespace zdq
