#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cqed/protocol.hpp"

namespace cqed {

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

/// Shape of a composite space: atom level pairs plus field truncation
/// (field_dim == 1 for atoms-only spaces).
struct SpaceShape {
    std::vector<LevelPair> atoms;
    std::size_t field_dim = 1;

    static SpaceShape of(const CompositeState &state);
    static SpaceShape atoms_only(std::size_t count, LevelPair levels = LevelPair::fg);
    std::size_t size() const { return (std::size_t{1} << atoms.size()) * field_dim; }
};

struct Observable {
    Matrix matrix;
    std::string label;

    double hermiticity_error() const;
};

Observable operator*(const Observable &lhs, const Observable &rhs);

enum class Axis { x, y, z };

/// Pauli operator on one atom, identity elsewhere. In the (first, second)
/// level basis: sigma_x = |f><g| + |g><f|, sigma_y = -i(|f><g| - |g><f|),
/// sigma_z = |f><f| - |g><g|.
Observable build_pauli(Axis axis, std::size_t atom, const SpaceShape &space);

enum class MerminOperator { A, B, C, D };

/// A = sx sy sy, B = sy sx sy, C = sy sy sx, D = sx sx sx over atoms 0, 1, 2
/// (tensored with the field identity when the space has a field).
Observable build_mermin(MerminOperator which, const SpaceShape &space);

/// |+><-| + |-><+| on the field alone, from normalized even/odd cats.
Observable build_cavity_sigma_x(double alpha, std::size_t dim, const Tolerances &tol = {});

/// D with the cavity as third party: sx(atom 0) sx(atom 1) sigma_x^C on two
/// atoms plus the field.
Observable build_hybrid_d(double alpha, std::size_t dim, const Tolerances &tol = {});

Complex expectation_complex(const Observable &obs, const CompositeState &state);
/// Real part of <psi|O|psi>; for Hermitian O the imaginary part is rounding noise.
double expectation(const Observable &obs, const CompositeState &state);
/// Tr(rho O).
double expectation(const Observable &obs, const DensityBlock &rho);

// ---------------------------------------------------------------------------
// Local hidden variables
// ---------------------------------------------------------------------------

/// Six pre-existing +-1 values, m_x^k and m_y^k for k = 1, 2, 3.
struct LhvAssignment {
    std::array<int, 3> mx;
    std::array<int, 3> my;

    int a() const { return mx[0] * my[1] * my[2]; }
    int b() const { return my[0] * mx[1] * my[2]; }
    int c() const { return my[0] * my[1] * mx[2]; }
    int d() const { return mx[0] * mx[1] * mx[2]; }
};

std::vector<LhvAssignment> all_lhv_assignments();

/// Eigenvalue of D on the GHZ state of the given sign: +1 for plus.
int qm_prediction(Sign sign);
/// Product of the x-values forced by a = b = c = -qm: -1 for plus.
int lhv_prediction(Sign sign);

struct LhvScan {
    std::size_t assignments = 0;
    /// Assignments with a = b = c equal to the QM eigenvalue of A, B, C.
    std::size_t consistent = 0;
    /// Consistent assignments whose x-product equals lhv_prediction.
    std::size_t product_matches_lhv = 0;
    /// Consistent assignments whose x-product equals qm_prediction.
    std::size_t product_matches_qm = 0;
};

LhvScan lhv_scan(Sign sign);

// ---------------------------------------------------------------------------
// The single-run test
// ---------------------------------------------------------------------------

/// Detection triples (atoms 1, 2, 3 or cavity read through atom 3) that the
/// quantum prediction allows, e.g. "ggg".
std::array<std::string, 4> allowed_branches(Sign sign);

/// sigma_x eigenvalue revealed by a detection after the K rotation (or by the
/// cavity read-out atom): g -> +1, f -> -1.
int eigenvalue_of(Level detected);

/// Sequence run on the prepared state: K then detection for atoms 1 and 2,
/// then either K and detection of atom 3 (atomic) or the cavity read-out
/// (fresh atom through R and the cavity, inject alpha, post-selected probe,
/// detect the fresh atom).
std::vector<ProtocolStep> ghz_readout_steps(GhzMode mode, const PrepConfig &prep);

/// The deterministic pre-measurement state (atomic: after the probe
/// post-selection; hybrid: two atoms plus cavity).
CompositeState ghz_prepared_state(Sign sign, GhzMode mode, const PrepConfig &prep);

struct GhzTestConfig {
    Sign sign = Sign::plus;
    GhzMode mode = GhzMode::atomic;
    std::size_t shots = 1000;
    std::uint64_t seed = 0;
    PrepConfig prep;
    unsigned threads = 1;
};

struct GhzTestResult {
    Sign sign;
    GhzMode mode;
    std::size_t shots = 0;
    std::map<std::string, std::size_t> branch_counts;
    /// Exact probability of each of the 8 detection triples.
    std::map<std::string, double> expected_probabilities;
    std::vector<std::string> shot_branches;
    std::vector<int> products;
    int qm_prediction = 0;
    int lhv_prediction = 0;
    /// Probability of the preparation post-selection.
    double preparation_probability = 1.0;
    /// Probability of the read-out probe post-selection (hybrid; 1 for atomic).
    double readout_probability = 1.0;
    std::size_t forbidden_count = 0;

    bool all_products_match_qm() const;
    std::string verdict() const;
};

/// Exact branch distribution of the read-out, keyed by detection triple.
std::map<std::string, double> exact_branch_probabilities(Sign sign, GhzMode mode,
                                                         const PrepConfig &prep);

/// Shot i uses shot_rng(seed, i) and draws one uniform per sampled detection,
/// so results do not depend on `threads`.
GhzTestResult run_ghz_test(const GhzTestConfig &config);

} // namespace cqed
