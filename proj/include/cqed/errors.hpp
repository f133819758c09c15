#pragma once

#include <stdexcept>
#include <string>

namespace cqed {

/// Base class for every error raised by the simulator.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad input: out-of-range parameters, malformed recipes, shape mismatches.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// The numbers themselves went wrong: truncation tails, impossible branches.
class NumericalError : public Error {
  public:
    using Error::Error;
};

class DimensionMismatch : public ValidationError {
  public:
    DimensionMismatch(std::size_t lhs, std::size_t rhs);
};

class DegenerateCat : public ValidationError {
  public:
    DegenerateCat();
};

class WrongLevelPair : public ValidationError {
  public:
    explicit WrongLevelPair(const std::string &what);
};

class NonUnitaryRotation : public ValidationError {
  public:
    explicit NonUnitaryRotation(double deviation);
};

class InvalidPhotonNumber : public ValidationError {
  public:
    explicit InvalidPhotonNumber(double nbar);
};

class UnknownAtom : public ValidationError {
  public:
    UnknownAtom(std::size_t atom, std::size_t atom_count);
};

class WrongAtomCount : public ValidationError {
  public:
    WrongAtomCount(std::size_t expected, std::size_t actual);
};

class TailMassExceeded : public NumericalError {
  public:
    TailMassExceeded(double tail_mass, double tolerance, std::size_t dim);

    double tail_mass() const noexcept { return tail_mass_; }

  private:
    double tail_mass_;
};

class ZeroProbabilityBranch : public NumericalError {
  public:
    ZeroProbabilityBranch(std::size_t atom, double probability);
};

} // namespace cqed
