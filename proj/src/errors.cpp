#include "cqed/errors.hpp"

#include <sstream>

namespace cqed {

namespace {

template <class... Args> std::string concat(const Args &...args) {
    std::ostringstream os;
    os.precision(6);
    (os << ... << args);
    return os.str();
}

} // namespace

DimensionMismatch::DimensionMismatch(std::size_t lhs, std::size_t rhs)
    : ValidationError(concat("dimension mismatch: ", lhs, " vs ", rhs)) {}

DegenerateCat::DegenerateCat()
    : ValidationError("degenerate cat state: odd cat at alpha = 0 is the zero vector") {}

WrongLevelPair::WrongLevelPair(const std::string &what)
    : ValidationError("wrong level pair: " + what) {}

NonUnitaryRotation::NonUnitaryRotation(double deviation)
    : ValidationError(concat("rotation is not unitary (|R^dag R - I| = ", deviation, ")")) {}

InvalidPhotonNumber::InvalidPhotonNumber(double nbar)
    : ValidationError(concat("invalid mean photon number ", nbar,
                             " (nearest integer must be >= 1)")) {}

UnknownAtom::UnknownAtom(std::size_t atom, std::size_t atom_count)
    : ValidationError(concat("unknown atom ", atom, " (state holds ", atom_count, " atoms)")) {}

WrongAtomCount::WrongAtomCount(std::size_t expected, std::size_t actual)
    : ValidationError(concat("expected ", expected, " atoms, got ", actual)) {}

TailMassExceeded::TailMassExceeded(double tail_mass, double tolerance, std::size_t dim)
    : NumericalError(concat("Fock truncation too small: tail mass ", tail_mass,
                            " at n = ", dim - 1, " exceeds tolerance ", tolerance,
                            " (increase dim)")),
      tail_mass_(tail_mass) {}

ZeroProbabilityBranch::ZeroProbabilityBranch(std::size_t atom, double probability)
    : NumericalError(concat("post-selected outcome on atom ", atom,
                            " has probability ", probability)) {}

} // namespace cqed
