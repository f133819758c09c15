#include "cqed/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cqed {

// ---------------------------------------------------------------------------
// Levels
// ---------------------------------------------------------------------------

Level level_at(LevelPair pair, std::size_t index) {
    if (index > 1) {
        throw ValidationError("level index must be 0 or 1");
    }
    if (pair == LevelPair::fg) {
        return index == 0 ? Level::f : Level::g;
    }
    return index == 0 ? Level::a : Level::b;
}

std::size_t level_index(LevelPair pair, Level level) {
    if (pair_of(level) != pair) {
        throw WrongLevelPair(std::string("level ") + to_char(level) + " is not in pair " +
                             std::string(to_string(pair)));
    }
    return (level == Level::f || level == Level::a) ? 0 : 1;
}

LevelPair pair_of(Level level) {
    return (level == Level::f || level == Level::g) ? LevelPair::fg : LevelPair::ab;
}

char to_char(Level level) {
    switch (level) {
    case Level::f: return 'f';
    case Level::g: return 'g';
    case Level::a: return 'a';
    case Level::b: return 'b';
    }
    return '?';
}

Level level_from_char(char c) {
    switch (c) {
    case 'f': return Level::f;
    case 'g': return Level::g;
    case 'a': return Level::a;
    case 'b': return Level::b;
    default: throw ValidationError(std::string("unknown level '") + c + "'");
    }
}

std::string_view to_string(LevelPair pair) { return pair == LevelPair::fg ? "fg" : "ab"; }

// ---------------------------------------------------------------------------
// FieldState
// ---------------------------------------------------------------------------

FieldState::FieldState(Vector amplitudes, double tail_mass)
    : amps_(std::move(amplitudes)), tail_mass_(tail_mass) {
    if (amps_.size() < 1) {
        throw ValidationError("field truncation dim must be >= 1");
    }
}

FieldState FieldState::vacuum(std::size_t dim) { return fock(0, dim); }

FieldState FieldState::fock(std::size_t n, std::size_t dim) {
    if (n >= dim) {
        throw ValidationError("Fock level " + std::to_string(n) + " outside truncation " +
                              std::to_string(dim));
    }
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
    v[static_cast<Eigen::Index>(n)] = 1.0;
    return FieldState(std::move(v));
}

bool FieldState::is_normalized(double tol) const { return std::abs(norm_squared() - 1.0) <= tol; }

double FieldState::mean_photon_number() const {
    double mean = 0.0;
    for (Eigen::Index n = 0; n < amps_.size(); ++n) {
        mean += static_cast<double>(n) * std::norm(amps_[n]);
    }
    return mean / norm_squared();
}

double FieldState::top_level_mass() const { return std::norm(amps_[amps_.size() - 1]); }

FieldState FieldState::normalized() const {
    const double norm = std::sqrt(norm_squared());
    if (norm == 0.0) {
        throw NumericalError("cannot normalize a zero field vector");
    }
    return FieldState(amps_ / norm, tail_mass_);
}

FieldState make_coherent(Complex alpha, std::size_t dim, const Tolerances &tol) {
    if (dim < 1) {
        throw ValidationError("field truncation dim must be >= 1");
    }
    Vector c(static_cast<Eigen::Index>(dim));
    // Recurrence c_n = c_{n-1} alpha / sqrt(n) avoids overflowing alpha^n and n!.
    c[0] = std::exp(-0.5 * std::norm(alpha));
    for (Eigen::Index n = 1; n < c.size(); ++n) {
        c[n] = c[n - 1] * alpha / std::sqrt(static_cast<double>(n));
    }
    const double tail = std::norm(c[c.size() - 1]);
    if (tail > tol.tail) {
        throw TailMassExceeded(tail, tol.tail, dim);
    }
    c /= c.norm();
    return FieldState(std::move(c), tail);
}

CatState cat_state(Complex alpha, Sign sign, std::size_t dim, bool normalize,
                   const Tolerances &tol) {
    if (sign == Sign::minus && alpha == Complex{0.0, 0.0}) {
        throw DegenerateCat();
    }
    const FieldState plus_alpha = make_coherent(alpha, dim, tol);
    const FieldState minus_alpha = make_coherent(-alpha, dim, tol);
    Vector raw = plus_alpha.amplitudes() + static_cast<double>(value(sign)) * minus_alpha.amplitudes();
    const double raw_norm = raw.squaredNorm();
    if (normalize) {
        raw /= std::sqrt(raw_norm);
    }
    return {FieldState(std::move(raw), plus_alpha.tail_mass()), raw_norm};
}

Complex inner(const FieldState &x, const FieldState &y) {
    if (x.dim() != y.dim()) {
        throw DimensionMismatch(x.dim(), y.dim());
    }
    return x.amplitudes().dot(y.amplitudes());
}

// ---------------------------------------------------------------------------
// AtomState
// ---------------------------------------------------------------------------

AtomState::AtomState(LevelPair levels, Complex first, Complex second)
    : levels_(levels), amps_(first, second) {}

AtomState AtomState::basis(Level level) {
    const LevelPair pair = pair_of(level);
    return level_index(pair, level) == 0 ? AtomState(pair, 1.0, 0.0) : AtomState(pair, 0.0, 1.0);
}

AtomState AtomState::superposition(LevelPair levels, Complex first, Complex second) {
    const double norm = std::sqrt(std::norm(first) + std::norm(second));
    if (norm == 0.0) {
        throw ValidationError("atomic superposition with zero weights");
    }
    return AtomState(levels, first / norm, second / norm);
}

bool AtomState::is_normalized(double tol) const {
    return std::abs(amps_.squaredNorm() - 1.0) <= tol;
}

// ---------------------------------------------------------------------------
// CompositeState
// ---------------------------------------------------------------------------

CompositeState::CompositeState(std::vector<LevelPair> atoms, std::size_t dim, Vector amplitudes)
    : atoms_(std::move(atoms)), dim_(dim), amps_(std::move(amplitudes)) {
    if (dim_ < 1) {
        throw ValidationError("field truncation dim must be >= 1");
    }
    if (atoms_.size() >= 8 * sizeof(std::size_t) - 1) {
        throw ValidationError("too many atoms");
    }
    const std::size_t expected = (std::size_t{1} << atoms_.size()) * dim_;
    if (static_cast<std::size_t>(amps_.size()) != expected) {
        throw DimensionMismatch(static_cast<std::size_t>(amps_.size()), expected);
    }
}

CompositeState CompositeState::field_only(const FieldState &field) {
    return CompositeState({}, field.dim(), field.amplitudes());
}

LevelPair CompositeState::levels(std::size_t atom) const {
    if (atom >= atoms_.size()) {
        throw UnknownAtom(atom, atoms_.size());
    }
    return atoms_[atom];
}

std::size_t CompositeState::index(std::span<const std::uint8_t> bits, std::size_t photons) const {
    if (bits.size() != atoms_.size()) {
        throw DimensionMismatch(bits.size(), atoms_.size());
    }
    if (photons >= dim_) {
        throw ValidationError("photon number outside truncation");
    }
    std::size_t config = 0;
    for (const std::uint8_t bit : bits) {
        if (bit > 1) {
            throw ValidationError("atom level bit must be 0 or 1");
        }
        config = config * 2 + bit;
    }
    return config * dim_ + photons;
}

CompositeState::BasisLabel CompositeState::unflatten(std::size_t index) const {
    if (index >= size()) {
        throw ValidationError("flat index outside state");
    }
    BasisLabel label{std::vector<std::uint8_t>(atoms_.size()), index % dim_};
    std::size_t config = index / dim_;
    for (std::size_t k = atoms_.size(); k-- > 0;) {
        label.bits[k] = static_cast<std::uint8_t>(config & 1U);
        config >>= 1U;
    }
    return label;
}

std::size_t CompositeState::stride(std::size_t atom) const {
    if (atom >= atoms_.size()) {
        throw UnknownAtom(atom, atoms_.size());
    }
    return (std::size_t{1} << (atoms_.size() - 1 - atom)) * dim_;
}

double CompositeState::top_level_mass() const {
    double mass = 0.0;
    for (std::size_t i = dim_ - 1; i < size(); i += dim_) {
        mass += std::norm(amps_[static_cast<Eigen::Index>(i)]);
    }
    return mass;
}

CompositeState CompositeState::with_atom(const AtomState &atom) const {
    const auto n = amps_.size();
    Vector out(2 * n);
    const auto blocks = n / static_cast<Eigen::Index>(dim_);
    const auto d = static_cast<Eigen::Index>(dim_);
    for (Eigen::Index blk = 0; blk < blocks; ++blk) {
        const auto src = amps_.segment(blk * d, d);
        out.segment((2 * blk) * d, d) = atom.amplitudes()[0] * src;
        out.segment((2 * blk + 1) * d, d) = atom.amplitudes()[1] * src;
    }
    auto levels = atoms_;
    levels.push_back(atom.levels());
    return CompositeState(std::move(levels), dim_, std::move(out));
}

CompositeState CompositeState::with_amplitudes(Vector amplitudes) const {
    return CompositeState(atoms_, dim_, std::move(amplitudes));
}

bool CompositeState::same_shape(const CompositeState &other) const {
    return atoms_ == other.atoms_ && dim_ == other.dim_;
}

CompositeState compose(std::span<const AtomState> atoms, const FieldState &field) {
    CompositeState state = CompositeState::field_only(field);
    for (const AtomState &atom : atoms) {
        state = state.with_atom(atom);
    }
    return state;
}

CompositeState compose(std::initializer_list<AtomState> atoms, const FieldState &field) {
    return compose(std::span<const AtomState>(atoms.begin(), atoms.size()), field);
}

Complex inner(const CompositeState &x, const CompositeState &y) {
    if (!x.same_shape(y)) {
        throw DimensionMismatch(x.size(), y.size());
    }
    return x.amplitudes().dot(y.amplitudes());
}

CompositeState atomic_ket(std::string_view letters) {
    CompositeState state({}, 1, Vector::Ones(1));
    for (const char c : letters) {
        state = state.with_atom(AtomState::basis(level_from_char(c)));
    }
    return state;
}

CompositeState atomic_superposition(
    std::initializer_list<std::pair<std::string_view, Complex>> terms) {
    if (terms.size() == 0) {
        throw ValidationError("empty superposition");
    }
    CompositeState first = atomic_ket(terms.begin()->first);
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(first.size()));
    for (const auto &[letters, weight] : terms) {
        const CompositeState ket = atomic_ket(letters);
        if (!ket.same_shape(first)) {
            throw DimensionMismatch(ket.size(), first.size());
        }
        sum += weight * ket.amplitudes();
    }
    const double norm = sum.norm();
    if (norm == 0.0) {
        throw ValidationError("superposition terms cancel");
    }
    return first.with_amplitudes(sum / norm);
}

// ---------------------------------------------------------------------------
// Measurement
// ---------------------------------------------------------------------------

namespace {

double first_level_probability(const CompositeState &state, std::size_t atom) {
    const std::size_t stride = state.stride(atom);
    const Vector &amps = state.amplitudes();
    double p = 0.0;
    for (std::size_t base = 0; base < state.size(); base += 2 * stride) {
        p += amps.segment(static_cast<Eigen::Index>(base), static_cast<Eigen::Index>(stride))
                 .squaredNorm();
    }
    return p / state.norm_squared();
}

CompositeState project(const CompositeState &state, std::size_t atom, std::size_t level,
                       double probability) {
    const std::size_t stride = state.stride(atom);
    Vector amps = state.amplitudes();
    const double scale = 1.0 / std::sqrt(probability * state.norm_squared());
    for (std::size_t base = 0; base < state.size(); base += 2 * stride) {
        const auto keep = static_cast<Eigen::Index>(base + level * stride);
        const auto drop = static_cast<Eigen::Index>(base + (1 - level) * stride);
        const auto s = static_cast<Eigen::Index>(stride);
        amps.segment(keep, s) *= scale;
        amps.segment(drop, s).setZero();
    }
    return state.with_amplitudes(std::move(amps));
}

void check_basis(const CompositeState &state, std::size_t atom, LevelPair basis) {
    if (state.levels(atom) != basis) {
        throw WrongLevelPair("atom " + std::to_string(atom) + " has levels " +
                             std::string(to_string(state.levels(atom))) +
                             ", measured in basis " + std::string(to_string(basis)));
    }
}

} // namespace

double outcome_probability(const CompositeState &state, std::size_t atom, Level level) {
    const double p_first = first_level_probability(state, atom);
    return level_index(state.levels(atom), level) == 0 ? p_first : 1.0 - p_first;
}

MeasurementOutcome measure_atom(const CompositeState &state, std::size_t atom, LevelPair basis,
                                Rng &rng) {
    check_basis(state, atom, basis);
    const double p_first = first_level_probability(state, atom);
    const std::size_t level = uniform01(rng) < p_first ? 0 : 1;
    const double p = level == 0 ? p_first : 1.0 - p_first;
    return {level_at(basis, level), p, project(state, atom, level, p)};
}

MeasurementOutcome measure_atom(const CompositeState &state, std::size_t atom, LevelPair basis,
                                Level outcome, const Tolerances &tol) {
    check_basis(state, atom, basis);
    const std::size_t level = level_index(basis, outcome);
    const double p_first = first_level_probability(state, atom);
    const double p = level == 0 ? p_first : 1.0 - p_first;
    if (p < tol.zero_branch) {
        throw ZeroProbabilityBranch(atom, p);
    }
    return {outcome, p, project(state, atom, level, p)};
}

// ---------------------------------------------------------------------------
// DensityBlock
// ---------------------------------------------------------------------------

DensityBlock::DensityBlock(std::vector<LevelPair> atoms, std::size_t field_dim, Matrix rho)
    : atoms_(std::move(atoms)), field_dim_(field_dim), rho_(std::move(rho)) {
    const auto expected = static_cast<Eigen::Index>((std::size_t{1} << atoms_.size()) * field_dim_);
    if (rho_.rows() != expected || rho_.cols() != expected) {
        throw DimensionMismatch(static_cast<std::size_t>(rho_.rows()),
                                static_cast<std::size_t>(expected));
    }
}

double DensityBlock::trace() const { return rho_.trace().real(); }

double DensityBlock::purity() const { return (rho_ * rho_).trace().real(); }

double DensityBlock::hermiticity_error() const {
    return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityBlock::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

CompositeState DensityBlock::principal_state() const {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho_);
    const Eigen::Index top = rho_.rows() - 1; // eigenvalues ascending
    return CompositeState(atoms_, field_dim_, solver.eigenvectors().col(top));
}

DensityBlock reduce(const CompositeState &state, const SubsystemMask &keep) {
    if (keep.atoms.empty() && !keep.field) {
        throw ValidationError("reduce: empty subsystem mask");
    }
    std::vector<std::size_t> kept = keep.atoms;
    std::sort(kept.begin(), kept.end());
    if (std::adjacent_find(kept.begin(), kept.end()) != kept.end()) {
        throw ValidationError("reduce: duplicate atom in mask");
    }
    std::vector<bool> is_kept(state.atom_count(), false);
    std::vector<LevelPair> kept_levels;
    for (const std::size_t atom : kept) {
        kept_levels.push_back(state.levels(atom));
        is_kept[atom] = true;
    }

    const std::size_t field_dim = keep.field ? state.dim() : 1;
    const std::size_t kept_dim = (std::size_t{1} << kept.size()) * field_dim;
    const std::size_t env_dim = state.size() / kept_dim;

    // Reshape |psi> into a kept x environment matrix, then rho = M M^dag.
    Matrix psi = Matrix::Zero(static_cast<Eigen::Index>(kept_dim), static_cast<Eigen::Index>(env_dim));
    for (std::size_t i = 0; i < state.size(); ++i) {
        const auto label = state.unflatten(i);
        std::size_t k = 0;
        std::size_t e = 0;
        for (std::size_t atom = 0; atom < state.atom_count(); ++atom) {
            if (is_kept[atom]) {
                k = 2 * k + label.bits[atom];
            } else {
                e = 2 * e + label.bits[atom];
            }
        }
        if (keep.field) {
            k = k * state.dim() + label.photons;
        } else {
            e = e * state.dim() + label.photons;
        }
        psi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(e)) = state[i];
    }
    Matrix rho = psi * psi.adjoint();
    rho /= state.norm_squared();
    return DensityBlock(std::move(kept_levels), field_dim, std::move(rho));
}

double fidelity(const CompositeState &state, const CompositeState &target) {
    return std::norm(inner(target, state));
}

double fidelity(const DensityBlock &state, const CompositeState &target) {
    if (target.atom_levels() != state.atom_levels() || target.dim() != state.field_dim()) {
        throw DimensionMismatch(target.size(), static_cast<std::size_t>(state.matrix().rows()));
    }
    const Vector &t = target.amplitudes();
    return t.dot(state.matrix() * t).real();
}

} // namespace cqed
