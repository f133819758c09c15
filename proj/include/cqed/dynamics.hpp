#pragma once

#include "cqed/hilbert.hpp"

namespace cqed {

/// Resonant/detuned Jaynes-Cummings parameters. g and delta are in the same
/// (arbitrary) frequency unit and t in its inverse; only g*t and g/delta matter.
struct JcParams {
    double g = 1.0;
    double t = 0.0;
    /// (omega_upper - omega_lower) - omega_cavity
    double delta = 0.0;
};

enum class RotationTag { R, K, R5, custom };

/// Instantaneous single-atom rotation. The matrix acts on the coefficient
/// column (c_first, c_second), i.e. (c_f, c_g) or (c_a, c_b).
struct Rotation2 {
    Eigen::Matrix2cd matrix;
    RotationTag tag = RotationTag::custom;

    /// (1/sqrt2) [[1, 1], [-1, 1]]: |g> -> (|f>+|g>)/sqrt2, |f> -> (|f>-|g>)/sqrt2.
    static Rotation2 ramsey();
    /// (1/sqrt2) [[1, -1], [1, 1]], the rotation preceding each GHZ-test detection.
    static Rotation2 mermin();
    /// |g><f| - |f><g|; maps Phi(+-) onto Psi(-+). Squares to -1.
    static Rotation2 level_swap();
    /// diag(1, -1): relative sign flip between the two levels.
    static Rotation2 phase_flip();
    static Rotation2 custom(const Eigen::Matrix2cd &matrix);

    double unitarity_error() const;
};

/// exp(i phi n) on the f-level of a cascade atom, identity on g.
/// phi = pi maps |f>|alpha> to |f>|-alpha>.
CompositeState apply_conditional_phase(const CompositeState &state, std::size_t atom, double phi);

/// Large-detuning propagator on an {a, b} atom (a upper):
/// a-level gets exp(-i phi (n + 1)), b-level gets exp(+i phi n), phi = g^2 t / delta.
CompositeState apply_dispersive(const CompositeState &state, std::size_t atom, double phi);

/// Exact interaction-picture Jaynes-Cummings propagator on an {a, b} atom.
///
/// The propagator is block diagonal on the pairs {(a, n), (b, n+1)}; in each
/// block mu = sqrt(g^2 (n+1) + delta^2/4) and
///
///   U = diag(e^{i delta t/2}, e^{-i delta t/2})
///       * [[cos mu t - i (delta/2mu) sin mu t,  -i (g sqrt(n+1)/mu) sin mu t],
///          [-i (g sqrt(n+1)/mu) sin mu t,       cos mu t + i (delta/2mu) sin mu t]].
///
/// (b, 0) is invariant. (a, dim-1) has no partner inside the truncation and is
/// left unchanged; keep its population negligible via the tail checks.
CompositeState apply_jc(const CompositeState &state, std::size_t atom, const JcParams &params);

/// Result of sending a lower-level resonant probe through the field:
/// |b>|field> -> |a>|chi_a> + |b>|chi_b>.
struct ProbeBranches {
    FieldState chi_a;
    FieldState chi_b;
    double p_a;
    double p_b;
};

/// Probe branches at resonance for interaction time `gt` (coupling times time).
ProbeBranches probe_branches(const FieldState &field, double gt);

/// tau = pi / (2 g sqrt(nbar)), with nbar rounded to the nearest integer.
double optimal_probe_time(double nbar, double g = 1.0);

/// exp(beta a^dag - beta^* a) on the truncated Fock space.
Matrix displacement_matrix(Complex beta, std::size_t dim);

FieldState displace(const FieldState &field, Complex beta, const Tolerances &tol = {});
CompositeState displace(const CompositeState &state, Complex beta, const Tolerances &tol = {});

CompositeState rotate(const CompositeState &state, std::size_t atom, const Rotation2 &rotation,
                      const Tolerances &tol = {});

// Explicit matrices on one {a, b} atom times the field, flat index level * dim + n.

/// apply_jc assembled column by column.
Matrix jc_matrix(const JcParams &params, std::size_t dim);
Matrix dispersive_matrix(double phi, std::size_t dim);
/// exp(-i H t) for H = (g^2/delta) n (|a><a| - |b><b|), via a dense matrix
/// exponential. Differs from dispersive_matrix by the a-level phase exp(-i phi).
Matrix effective_dispersive_propagator(double phi, std::size_t dim);

/// Frobenius distance between the exact and dispersive propagators at fixed
/// phi, with g = 1, delta = delta_over_g and t = phi * delta. Only complete
/// excitation blocks enter: the unpaired (a, dim-1) level is excluded.
double dispersive_distance(double delta_over_g, double phi, std::size_t dim);

} // namespace cqed
