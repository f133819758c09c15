#include "cqed/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace cqed {

namespace {

void require_levels(const CompositeState &state, std::size_t atom, LevelPair expected,
                    const char *operation) {
    if (state.levels(atom) != expected) {
        throw WrongLevelPair(std::string(operation) + " needs an " +
                             std::string(to_string(expected)) + " atom, atom " +
                             std::to_string(atom) + " is " +
                             std::string(to_string(state.levels(atom))));
    }
}

// Applies a per-photon-number phase to each of the two levels of `atom`.
template <class FirstPhase, class SecondPhase>
CompositeState apply_level_phases(const CompositeState &state, std::size_t atom,
                                  FirstPhase first_phase, SecondPhase second_phase) {
    const std::size_t stride = state.stride(atom);
    const std::size_t dim = state.dim();
    Vector amps = state.amplitudes();
    for (std::size_t base = 0; base < state.size(); base += 2 * stride) {
        for (std::size_t off = 0; off < stride; ++off) {
            const std::size_t n = off % dim;
            amps[static_cast<Eigen::Index>(base + off)] *= first_phase(n);
            amps[static_cast<Eigen::Index>(base + stride + off)] *= second_phase(n);
        }
    }
    return state.with_amplitudes(std::move(amps));
}

Matrix single_atom_operator(std::size_t dim, const auto &apply) {
    const auto size = static_cast<Eigen::Index>(2 * dim);
    Matrix u(size, size);
    for (Eigen::Index col = 0; col < size; ++col) {
        Vector e = Vector::Zero(size);
        e[col] = 1.0;
        u.col(col) = apply(CompositeState({LevelPair::ab}, dim, std::move(e))).amplitudes();
    }
    return u;
}

} // namespace

// ---------------------------------------------------------------------------
// Rotations
// ---------------------------------------------------------------------------

Rotation2 Rotation2::ramsey() {
    Eigen::Matrix2cd m;
    m << 1.0, 1.0, -1.0, 1.0;
    return {m / std::numbers::sqrt2, RotationTag::R};
}

Rotation2 Rotation2::mermin() {
    Eigen::Matrix2cd m;
    m << 1.0, -1.0, 1.0, 1.0;
    return {m / std::numbers::sqrt2, RotationTag::K};
}

Rotation2 Rotation2::level_swap() {
    Eigen::Matrix2cd m;
    m << 0.0, -1.0, 1.0, 0.0;
    return {m, RotationTag::R5};
}

Rotation2 Rotation2::phase_flip() {
    Eigen::Matrix2cd m;
    m << 1.0, 0.0, 0.0, -1.0;
    return {m, RotationTag::custom};
}

Rotation2 Rotation2::custom(const Eigen::Matrix2cd &matrix) {
    Rotation2 r{matrix, RotationTag::custom};
    const double err = r.unitarity_error();
    if (err > Tolerances{}.unitarity) {
        throw NonUnitaryRotation(err);
    }
    return r;
}

double Rotation2::unitarity_error() const {
    return (matrix.adjoint() * matrix - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
}

CompositeState rotate(const CompositeState &state, std::size_t atom, const Rotation2 &rotation,
                      const Tolerances &tol) {
    const double err = rotation.unitarity_error();
    if (err > tol.unitarity) {
        throw NonUnitaryRotation(err);
    }
    const std::size_t stride = state.stride(atom);
    const Eigen::Matrix2cd &m = rotation.matrix;
    Vector amps = state.amplitudes();
    for (std::size_t base = 0; base < state.size(); base += 2 * stride) {
        for (std::size_t off = 0; off < stride; ++off) {
            const auto i0 = static_cast<Eigen::Index>(base + off);
            const auto i1 = static_cast<Eigen::Index>(base + stride + off);
            const Complex c0 = amps[i0];
            const Complex c1 = amps[i1];
            amps[i0] = m(0, 0) * c0 + m(0, 1) * c1;
            amps[i1] = m(1, 0) * c0 + m(1, 1) * c1;
        }
    }
    return state.with_amplitudes(std::move(amps));
}

// ---------------------------------------------------------------------------
// Dispersive phases
// ---------------------------------------------------------------------------

CompositeState apply_conditional_phase(const CompositeState &state, std::size_t atom, double phi) {
    require_levels(state, atom, LevelPair::fg, "conditional phase");
    return apply_level_phases(
        state, atom, [phi](std::size_t n) { return std::polar(1.0, phi * static_cast<double>(n)); },
        [](std::size_t) { return Complex{1.0, 0.0}; });
}

CompositeState apply_dispersive(const CompositeState &state, std::size_t atom, double phi) {
    require_levels(state, atom, LevelPair::ab, "dispersive propagator");
    return apply_level_phases(
        state, atom,
        [phi](std::size_t n) { return std::polar(1.0, -phi * static_cast<double>(n + 1)); },
        [phi](std::size_t n) { return std::polar(1.0, phi * static_cast<double>(n)); });
}

// ---------------------------------------------------------------------------
// Jaynes-Cummings
// ---------------------------------------------------------------------------

CompositeState apply_jc(const CompositeState &state, std::size_t atom, const JcParams &params) {
    require_levels(state, atom, LevelPair::ab, "Jaynes-Cummings propagator");
    if (!(params.g >= 0.0) || !(params.t >= 0.0) || !std::isfinite(params.delta)) {
        throw ValidationError("Jaynes-Cummings parameters need g >= 0, t >= 0, finite delta");
    }
    const std::size_t stride = state.stride(atom);
    const std::size_t dim = state.dim();
    const double g = params.g;
    const double t = params.t;
    const double half_delta = 0.5 * params.delta;
    const Complex phase_up = std::polar(1.0, half_delta * t);
    const Complex phase_down = std::conj(phase_up);

    // Block coefficients depend only on n; precompute them once.
    struct Block {
        Complex aa, ab, ba, bb;
    };
    std::vector<Block> blocks(dim > 0 ? dim - 1 : 0);
    for (std::size_t n = 0; n + 1 < dim; ++n) {
        const double coupling = g * std::sqrt(static_cast<double>(n + 1));
        const double mu = std::sqrt(coupling * coupling + half_delta * half_delta);
        const double c = std::cos(mu * t);
        const double sin_over_mu = mu > 0.0 ? std::sin(mu * t) / mu : t;
        const Complex mix = -kI * coupling * sin_over_mu;
        blocks[n] = {phase_up * Complex(c, -half_delta * sin_over_mu), phase_up * mix,
                     phase_down * mix, phase_down * Complex(c, half_delta * sin_over_mu)};
    }

    Vector amps = state.amplitudes();
    for (std::size_t base = 0; base < state.size(); base += 2 * stride) {
        for (std::size_t rest = 0; rest < stride; rest += dim) {
            for (std::size_t n = 0; n + 1 < dim; ++n) {
                const auto ia = static_cast<Eigen::Index>(base + rest + n);
                const auto ib = static_cast<Eigen::Index>(base + stride + rest + n + 1);
                const Complex ca = amps[ia];
                const Complex cb = amps[ib];
                const Block &u = blocks[n];
                amps[ia] = u.aa * ca + u.ab * cb;
                amps[ib] = u.ba * ca + u.bb * cb;
            }
        }
    }
    return state.with_amplitudes(std::move(amps));
}

ProbeBranches probe_branches(const FieldState &field, double gt) {
    const CompositeState in = compose({AtomState::basis(Level::b)}, field);
    const CompositeState out = apply_jc(in, 0, JcParams{1.0, gt, 0.0});
    const auto d = static_cast<Eigen::Index>(field.dim());
    FieldState chi_a(out.amplitudes().head(d));
    FieldState chi_b(out.amplitudes().tail(d));
    const double total = field.norm_squared();
    const double p_a = chi_a.norm_squared() / total;
    const double p_b = chi_b.norm_squared() / total;
    return {std::move(chi_a), std::move(chi_b), p_a, p_b};
}

double optimal_probe_time(double nbar, double g) {
    if (!(nbar > 0.0) || !std::isfinite(nbar)) {
        throw InvalidPhotonNumber(nbar);
    }
    if (!(g > 0.0)) {
        throw ValidationError("optimal probe time needs coupling g > 0");
    }
    const double nearest = std::round(nbar);
    if (nearest < 1.0) {
        throw InvalidPhotonNumber(nbar);
    }
    return std::numbers::pi / (2.0 * g * std::sqrt(nearest));
}

// ---------------------------------------------------------------------------
// Displacement
// ---------------------------------------------------------------------------

Matrix displacement_matrix(Complex beta, std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix generator = Matrix::Zero(d, d);
    for (Eigen::Index n = 0; n + 1 < d; ++n) {
        const double s = std::sqrt(static_cast<double>(n + 1));
        generator(n + 1, n) = beta * s;
        generator(n, n + 1) = -std::conj(beta) * s;
    }
    return generator.exp();
}

FieldState displace(const FieldState &field, Complex beta, const Tolerances &tol) {
    FieldState out(displacement_matrix(beta, field.dim()) * field.amplitudes());
    const double tail = out.top_level_mass() / out.norm_squared();
    if (tail > tol.tail) {
        throw TailMassExceeded(tail, tol.tail, field.dim());
    }
    return out;
}

CompositeState displace(const CompositeState &state, Complex beta, const Tolerances &tol) {
    const Matrix d = displacement_matrix(beta, state.dim());
    Vector amps = state.amplitudes();
    const auto rows = static_cast<Eigen::Index>(state.dim());
    Eigen::Map<Matrix> blocks(amps.data(), rows, amps.size() / rows);
    blocks = d * blocks;
    CompositeState out = state.with_amplitudes(std::move(amps));
    const double tail = out.top_level_mass() / out.norm_squared();
    if (tail > tol.tail) {
        throw TailMassExceeded(tail, tol.tail, state.dim());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Explicit propagator matrices
// ---------------------------------------------------------------------------

Matrix jc_matrix(const JcParams &params, std::size_t dim) {
    return single_atom_operator(
        dim, [&](const CompositeState &s) { return apply_jc(s, 0, params); });
}

Matrix dispersive_matrix(double phi, std::size_t dim) {
    return single_atom_operator(
        dim, [&](const CompositeState &s) { return apply_dispersive(s, 0, phi); });
}

Matrix effective_dispersive_propagator(double phi, std::size_t dim) {
    // With g = 1 and t = phi * delta, H t = phi * n * (|a><a| - |b><b|).
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix ht = Matrix::Zero(2 * d, 2 * d);
    for (Eigen::Index n = 0; n < d; ++n) {
        ht(n, n) = phi * static_cast<double>(n);
        ht(d + n, d + n) = -phi * static_cast<double>(n);
    }
    return Matrix(-kI * ht).exp();
}

double dispersive_distance(double delta_over_g, double phi, std::size_t dim) {
    if (!(delta_over_g > 0.0)) {
        throw ValidationError("delta/g must be positive");
    }
    if (dim < 2) {
        throw ValidationError("dispersive distance needs dim >= 2");
    }
    const JcParams params{1.0, phi * delta_over_g, delta_over_g};
    Matrix diff = jc_matrix(params, dim) - dispersive_matrix(phi, dim);
    const auto unpaired = static_cast<Eigen::Index>(dim - 1);
    diff.row(unpaired).setZero();
    diff.col(unpaired).setZero();
    return diff.norm();
}

} // namespace cqed
