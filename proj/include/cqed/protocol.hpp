#pragma once

#include <numbers>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "cqed/dynamics.hpp"
#include "cqed/hilbert.hpp"

namespace cqed {

namespace step {

/// New atom entering the experiment; its label is the number of atoms before it.
struct AddAtom {
    AtomState initial;
};

/// Ramsey zone acting on one atom.
struct Rotate {
    std::size_t atom;
    Rotation2 rotation;
};

/// Dispersive passage of a cascade atom through the cavity.
struct ConditionalPhase {
    std::size_t atom;
    double phi = std::numbers::pi;
};

/// Passage of an {a, b} atom resonant (or detuned by delta_over_g) with the cavity.
struct ResonantProbe {
    std::size_t atom;
    double gt;
    double delta_over_g = 0.0;
};

/// Coherent injection into the cavity, D(beta).
struct Inject {
    Complex beta;
};

/// Level detection. With `postselect` set the outcome is forced and only its
/// probability is recorded.
struct Measure {
    std::size_t atom;
    LevelPair basis;
    std::optional<Level> postselect;
};

} // namespace step

using ProtocolStep = std::variant<step::AddAtom, step::Rotate, step::ConditionalPhase,
                                  step::ResonantProbe, step::Inject, step::Measure>;

struct MeasurementRecord {
    std::size_t atom;
    Level outcome;
    double probability;
    bool postselected;
};

struct ProtocolRun {
    CompositeState final_state;
    std::vector<MeasurementRecord> records;
    /// Product of the probabilities of every realized outcome.
    double branch_probability = 1.0;
};

/// Checks atom references, level pairs, and single measurement per atom.
/// `initial` supplies the atoms already present before the first step.
void validate_steps(const std::vector<ProtocolStep> &steps, const CompositeState &initial);

/// Runs `steps` with the cavity initially in |alpha> (truncated at dim).
ProtocolRun run_protocol(const std::vector<ProtocolStep> &steps, std::size_t dim, Complex alpha,
                         Rng &rng, const Tolerances &tol = {});

/// Runs `steps` starting from an arbitrary composite state.
ProtocolRun run_protocol(const CompositeState &initial, const std::vector<ProtocolStep> &steps,
                         Rng &rng, const Tolerances &tol = {});

/// Product of post-selected outcome probabilities (1 when there are none).
double success_probability_report(const ProtocolRun &run);

/// One leaf of the measurement tree.
struct Branch {
    std::vector<MeasurementRecord> records;
    /// Product of sampled-outcome probabilities, conditional on the post-selections.
    double probability;
    /// Product of post-selection probabilities along this branch.
    double postselection_probability;
    CompositeState final_state;
};

/// Every outcome combination of the sampled measurements, with exact
/// probabilities. Outcomes below tol.zero_branch are pruned. With
/// `expand_postselections` the post-selected measurements branch too.
std::vector<Branch> enumerate_branches(const CompositeState &initial,
                                       const std::vector<ProtocolStep> &steps,
                                       const Tolerances &tol = {},
                                       bool expand_postselections = false);

// ---------------------------------------------------------------------------
// Recipes
// ---------------------------------------------------------------------------

enum class BellVariant { phi_plus, phi_minus, psi_plus, psi_minus };
enum class GhzMode { atomic, hybrid };

std::string_view to_string(BellVariant v);
std::string_view to_string(GhzMode m);

struct PrepConfig {
    double alpha = 2.0;
    std::size_t dim = 64;
    /// Probe interaction time g*tau; defaults to the optimal time for |2 alpha>.
    std::optional<double> gt_probe;
    double phi = std::numbers::pi;
    Tolerances tol;

    double probe_time() const;
};

/// Optimal g*tau for a probe reading out |2 alpha> (mean photon number 4 alpha^2).
double default_probe_time(double alpha);

/// Steps that take a fresh |g> atom through R, the cavity, and R again.
void append_entangling_atom(std::vector<ProtocolStep> &steps, std::size_t atom, double phi);

std::vector<ProtocolStep> epr_recipe(BellVariant variant, const PrepConfig &config);
std::vector<ProtocolStep> ghz_recipe(Sign sign, GhzMode mode, const PrepConfig &config);

ProtocolRun prepare_epr(BellVariant variant, const PrepConfig &config, Rng &rng);
ProtocolRun prepare_ghz(Sign sign, GhzMode mode, const PrepConfig &config, Rng &rng);

/// Ideal two-atom Bell states, atoms-only.
CompositeState bell_target(BellVariant variant);
/// (|fff> + sign |ggg>)/sqrt2, atoms-only.
CompositeState ghz_target(Sign sign);
/// (|ff>|+> + sign |gg>|->)/2 with the unnormalized cats |+-> = |alpha> +- |-alpha>.
/// Unit norm because N+ + N- = 4. Two atoms plus field.
CompositeState hybrid_ghz_target(Sign sign, double alpha, std::size_t dim,
                                 const Tolerances &tol = {});

} // namespace cqed
