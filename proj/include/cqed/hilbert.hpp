#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cqed/errors.hpp"
#include "cqed/random.hpp"

namespace cqed {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr Complex kI{0.0, 1.0};

struct Tolerances {
    /// Largest allowed pre-normalization probability in the top Fock level.
    double tail = 1e-12;
    /// Post-selecting an outcome below this probability is an error.
    double zero_branch = 1e-14;
    /// Largest allowed max-abs entry of R^dag R - I for a rotation.
    double unitarity = 1e-10;
};

// ---------------------------------------------------------------------------
// Atomic levels
// ---------------------------------------------------------------------------

/// f, g: the dispersively coupled pair of a cascade atom (f upper).
/// a, b: a probe atom resonant with the cavity (a upper).
enum class Level : std::uint8_t { f, g, a, b };

/// Index 0 of an atom's two-component amplitude belongs to the first-listed
/// level (f or a), index 1 to the second (g or b).
enum class LevelPair : std::uint8_t { fg, ab };

Level level_at(LevelPair pair, std::size_t index);
std::size_t level_index(LevelPair pair, Level level);
LevelPair pair_of(Level level);
char to_char(Level level);
Level level_from_char(char c);
std::string_view to_string(LevelPair pair);

enum class Sign : int { plus = 1, minus = -1 };

constexpr int value(Sign s) { return static_cast<int>(s); }
constexpr Sign flip(Sign s) { return s == Sign::plus ? Sign::minus : Sign::plus; }

// ---------------------------------------------------------------------------
// Field states
// ---------------------------------------------------------------------------

/// Cavity mode in a truncated Fock basis: amplitude n is the coefficient of |n>.
/// Not necessarily normalized (raw cat states and probe branches are not).
class FieldState {
  public:
    explicit FieldState(Vector amplitudes, double tail_mass = 0.0);

    static FieldState vacuum(std::size_t dim);
    static FieldState fock(std::size_t n, std::size_t dim);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(amps_.size()); }
    const Vector &amplitudes() const noexcept { return amps_; }
    Complex operator[](std::size_t n) const { return amps_[static_cast<Eigen::Index>(n)]; }

    double norm_squared() const { return amps_.squaredNorm(); }
    bool is_normalized(double tol = 1e-12) const;
    double mean_photon_number() const;
    /// |c_{dim-1}|^2 of the stored amplitudes.
    double top_level_mass() const;
    /// Top-level mass recorded before renormalization (coherent-state builders).
    double tail_mass() const noexcept { return tail_mass_; }

    FieldState normalized() const;

  private:
    Vector amps_;
    double tail_mass_ = 0.0;
};

/// c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!), n < dim, renormalized over the
/// truncated basis. Throws TailMassExceeded when the unnormalized weight of the
/// top level exceeds tol.tail.
FieldState make_coherent(Complex alpha, std::size_t dim, const Tolerances &tol = {});

/// |alpha> + sign |-alpha>. `raw_norm` is N = 2(1 +- exp(-2|alpha|^2)) evaluated on the
/// truncated vectors, reported whether or not the state was normalized.
struct CatState {
    FieldState state;
    double raw_norm;
};

CatState cat_state(Complex alpha, Sign sign, std::size_t dim, bool normalize,
                   const Tolerances &tol = {});

Complex inner(const FieldState &x, const FieldState &y);

// ---------------------------------------------------------------------------
// Atoms and composite states
// ---------------------------------------------------------------------------

class AtomState {
  public:
    AtomState(LevelPair levels, Complex first, Complex second);

    static AtomState basis(Level level);
    /// (|first> + |second>)/sqrt(2) style helper with arbitrary weights, normalized.
    static AtomState superposition(LevelPair levels, Complex first, Complex second);

    LevelPair levels() const noexcept { return levels_; }
    const Eigen::Vector2cd &amplitudes() const noexcept { return amps_; }
    bool is_normalized(double tol = 1e-12) const;

  private:
    LevelPair levels_;
    Eigen::Vector2cd amps_;
};

/// Tensor product of atoms (in creation order) and one field mode.
/// Flat index = ((b_0 * 2 + b_1) * 2 + ... + b_{m-1}) * dim + n, so atom 0 is the
/// slowest index and the photon number the fastest. An atoms-only state is a
/// CompositeState with dim == 1.
class CompositeState {
  public:
    CompositeState(std::vector<LevelPair> atoms, std::size_t dim, Vector amplitudes);

    static CompositeState field_only(const FieldState &field);

    std::size_t atom_count() const noexcept { return atoms_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(amps_.size()); }
    LevelPair levels(std::size_t atom) const;
    const std::vector<LevelPair> &atom_levels() const noexcept { return atoms_; }
    const Vector &amplitudes() const noexcept { return amps_; }
    Complex operator[](std::size_t index) const {
        return amps_[static_cast<Eigen::Index>(index)];
    }

    struct BasisLabel {
        std::vector<std::uint8_t> bits;
        std::size_t photons;
        friend bool operator==(const BasisLabel &, const BasisLabel &) = default;
    };

    std::size_t index(std::span<const std::uint8_t> bits, std::size_t photons) const;
    BasisLabel unflatten(std::size_t index) const;
    /// Distance in the flat vector between the two levels of `atom`.
    std::size_t stride(std::size_t atom) const;

    double norm_squared() const { return amps_.squaredNorm(); }
    /// Probability that the field occupies its top retained Fock level.
    double top_level_mass() const;

    /// Appends a new atom (label = current atom_count()).
    CompositeState with_atom(const AtomState &atom) const;
    CompositeState with_amplitudes(Vector amplitudes) const;
    bool same_shape(const CompositeState &other) const;

  private:
    std::vector<LevelPair> atoms_;
    std::size_t dim_;
    Vector amps_;
};

CompositeState compose(std::span<const AtomState> atoms, const FieldState &field);
CompositeState compose(std::initializer_list<AtomState> atoms, const FieldState &field);

Complex inner(const CompositeState &x, const CompositeState &y);

/// Atoms-only basis ket from letters, e.g. "ffg" -> |f>|f>|g>.
CompositeState atomic_ket(std::string_view letters);

/// Normalized atoms-only superposition, e.g. {{"ff", 1}, {"gg", 1}}.
CompositeState atomic_superposition(
    std::initializer_list<std::pair<std::string_view, Complex>> terms);

// ---------------------------------------------------------------------------
// Measurement
// ---------------------------------------------------------------------------

double outcome_probability(const CompositeState &state, std::size_t atom, Level level);

struct MeasurementOutcome {
    Level outcome;
    /// Exact Born probability of `outcome` before collapse.
    double probability;
    CompositeState collapsed;
};

/// Projective measurement of one atom in its own level basis; the outcome is
/// drawn from `rng` (first-listed level iff u < p_first).
MeasurementOutcome measure_atom(const CompositeState &state, std::size_t atom,
                                LevelPair basis, Rng &rng);

/// Post-selected variant: forces `outcome`. Throws ZeroProbabilityBranch below
/// tol.zero_branch.
MeasurementOutcome measure_atom(const CompositeState &state, std::size_t atom,
                                LevelPair basis, Level outcome, const Tolerances &tol = {});

// ---------------------------------------------------------------------------
// Reduced states and fidelity
// ---------------------------------------------------------------------------

struct SubsystemMask {
    std::vector<std::size_t> atoms;
    bool field = false;

    static SubsystemMask atoms_only(std::vector<std::size_t> atoms) { return {std::move(atoms), false}; }
};

/// Density matrix over a subset of subsystems, in the same ordering convention
/// as CompositeState (kept atoms ascending, field fastest; field_dim == 1 when
/// the field was traced out).
class DensityBlock {
  public:
    DensityBlock(std::vector<LevelPair> atoms, std::size_t field_dim, Matrix rho);

    const Matrix &matrix() const noexcept { return rho_; }
    const std::vector<LevelPair> &atom_levels() const noexcept { return atoms_; }
    std::size_t field_dim() const noexcept { return field_dim_; }

    double trace() const;
    double purity() const;
    double hermiticity_error() const;
    double min_eigenvalue() const;
    /// Eigenvector of the largest eigenvalue, as a pure state of the same shape.
    CompositeState principal_state() const;

  private:
    std::vector<LevelPair> atoms_;
    std::size_t field_dim_;
    Matrix rho_;
};

DensityBlock reduce(const CompositeState &state, const SubsystemMask &keep);

double fidelity(const CompositeState &state, const CompositeState &target);
double fidelity(const DensityBlock &state, const CompositeState &target);

} // namespace cqed
