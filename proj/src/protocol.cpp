#include "cqed/protocol.hpp"

#include <cmath>
#include <string>
#include <type_traits>

namespace cqed {

namespace {

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

ValidationError step_error(std::size_t index, const std::string &what) {
    return ValidationError("step " + std::to_string(index) + ": " + what);
}

// Applies every step kind except Measure.
CompositeState apply_unitary(const CompositeState &state, const ProtocolStep &s,
                             const Tolerances &tol) {
    return std::visit(
        overloaded{
            [&](const step::AddAtom &x) { return state.with_atom(x.initial); },
            [&](const step::Rotate &x) { return rotate(state, x.atom, x.rotation, tol); },
            [&](const step::ConditionalPhase &x) {
                return apply_conditional_phase(state, x.atom, x.phi);
            },
            [&](const step::ResonantProbe &x) {
                return apply_jc(state, x.atom, JcParams{1.0, x.gt, x.delta_over_g});
            },
            [&](const step::Inject &x) { return displace(state, x.beta, tol); },
            [&](const step::Measure &) -> CompositeState {
                throw Error("internal: measurement routed to unitary executor");
            },
        },
        s);
}

void enumerate(const CompositeState &state, const std::vector<ProtocolStep> &steps,
               std::size_t next, std::vector<MeasurementRecord> &records, double probability,
               double postselection, const Tolerances &tol, bool expand,
               std::vector<Branch> &out) {
    CompositeState current = state;
    for (std::size_t i = next; i < steps.size(); ++i) {
        const auto *m = std::get_if<step::Measure>(&steps[i]);
        if (m == nullptr) {
            current = apply_unitary(current, steps[i], tol);
            continue;
        }
        if (m->postselect && !expand) {
            MeasurementOutcome r = measure_atom(current, m->atom, m->basis, *m->postselect, tol);
            records.push_back({m->atom, r.outcome, r.probability, true});
            enumerate(r.collapsed, steps, i + 1, records, probability,
                      postselection * r.probability, tol, expand, out);
            records.pop_back();
            return;
        }
        for (std::size_t level = 0; level < 2; ++level) {
            const Level outcome = level_at(m->basis, level);
            const double p = outcome_probability(current, m->atom, outcome);
            if (p < tol.zero_branch) {
                continue;
            }
            MeasurementOutcome r = measure_atom(current, m->atom, m->basis, outcome, tol);
            records.push_back({m->atom, outcome, p, m->postselect.has_value()});
            enumerate(r.collapsed, steps, i + 1, records, probability * p, postselection, tol,
                      expand, out);
            records.pop_back();
        }
        return;
    }
    out.push_back({records, probability, postselection, current});
}

} // namespace

void validate_steps(const std::vector<ProtocolStep> &steps, const CompositeState &initial) {
    std::vector<LevelPair> atoms = initial.atom_levels();
    std::vector<bool> measured(atoms.size(), false);

    auto require_atom = [&](std::size_t i, std::size_t atom) {
        if (atom >= atoms.size()) {
            throw step_error(i, "atom " + std::to_string(atom) + " does not exist yet");
        }
    };
    auto require_pair = [&](std::size_t i, std::size_t atom, LevelPair pair) {
        require_atom(i, atom);
        if (atoms[atom] != pair) {
            throw step_error(i, "atom " + std::to_string(atom) + " has levels " +
                                    std::string(to_string(atoms[atom])) + ", step needs " +
                                    std::string(to_string(pair)));
        }
    };

    for (std::size_t i = 0; i < steps.size(); ++i) {
        std::visit(overloaded{
                       [&](const step::AddAtom &x) {
                           if (!x.initial.is_normalized()) {
                               throw step_error(i, "new atom is not normalized");
                           }
                           atoms.push_back(x.initial.levels());
                           measured.push_back(false);
                       },
                       [&](const step::Rotate &x) { require_atom(i, x.atom); },
                       [&](const step::ConditionalPhase &x) {
                           require_pair(i, x.atom, LevelPair::fg);
                           if (!std::isfinite(x.phi)) {
                               throw step_error(i, "phase must be finite");
                           }
                       },
                       [&](const step::ResonantProbe &x) {
                           require_pair(i, x.atom, LevelPair::ab);
                           if (!(x.gt >= 0.0) || !std::isfinite(x.gt)) {
                               throw step_error(i, "probe time gt must be finite and >= 0");
                           }
                       },
                       [&](const step::Inject &x) {
                           if (!std::isfinite(x.beta.real()) || !std::isfinite(x.beta.imag())) {
                               throw step_error(i, "injection amplitude must be finite");
                           }
                       },
                       [&](const step::Measure &x) {
                           require_pair(i, x.atom, x.basis);
                           if (x.postselect && pair_of(*x.postselect) != x.basis) {
                               throw step_error(i, "post-selected level not in basis");
                           }
                           if (measured[x.atom]) {
                               throw step_error(i, "atom " + std::to_string(x.atom) +
                                                       " measured twice");
                           }
                           measured[x.atom] = true;
                       },
                   },
                   steps[i]);
    }
}

ProtocolRun run_protocol(const std::vector<ProtocolStep> &steps, std::size_t dim, Complex alpha,
                         Rng &rng, const Tolerances &tol) {
    return run_protocol(CompositeState::field_only(make_coherent(alpha, dim, tol)), steps, rng,
                        tol);
}

ProtocolRun run_protocol(const CompositeState &initial, const std::vector<ProtocolStep> &steps,
                         Rng &rng, const Tolerances &tol) {
    validate_steps(steps, initial);
    ProtocolRun run{initial, {}, 1.0};
    for (const ProtocolStep &s : steps) {
        const auto *m = std::get_if<step::Measure>(&s);
        if (m == nullptr) {
            run.final_state = apply_unitary(run.final_state, s, tol);
            continue;
        }
        MeasurementOutcome r =
            m->postselect ? measure_atom(run.final_state, m->atom, m->basis, *m->postselect, tol)
                          : measure_atom(run.final_state, m->atom, m->basis, rng);
        run.records.push_back({m->atom, r.outcome, r.probability, m->postselect.has_value()});
        run.branch_probability *= r.probability;
        run.final_state = std::move(r.collapsed);
    }
    return run;
}

double success_probability_report(const ProtocolRun &run) {
    double p = 1.0;
    for (const MeasurementRecord &r : run.records) {
        if (r.postselected) {
            p *= r.probability;
        }
    }
    return p;
}

std::vector<Branch> enumerate_branches(const CompositeState &initial,
                                       const std::vector<ProtocolStep> &steps,
                                       const Tolerances &tol, bool expand_postselections) {
    validate_steps(steps, initial);
    std::vector<Branch> out;
    std::vector<MeasurementRecord> records;
    enumerate(initial, steps, 0, records, 1.0, 1.0, tol, expand_postselections, out);
    return out;
}

// ---------------------------------------------------------------------------
// Recipes
// ---------------------------------------------------------------------------

std::string_view to_string(BellVariant v) {
    switch (v) {
    case BellVariant::phi_plus: return "phi+";
    case BellVariant::phi_minus: return "phi-";
    case BellVariant::psi_plus: return "psi+";
    case BellVariant::psi_minus: return "psi-";
    }
    return "?";
}

std::string_view to_string(GhzMode m) { return m == GhzMode::atomic ? "atomic" : "hybrid"; }

double default_probe_time(double alpha) { return optimal_probe_time(4.0 * alpha * alpha); }

double PrepConfig::probe_time() const {
    return gt_probe ? *gt_probe : default_probe_time(alpha);
}

namespace {

void check_alpha(double alpha) {
    if (alpha == 0.0) {
        throw DegenerateCat();
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw ValidationError("alpha must be real and > 0");
    }
}

// Inject beta, send a |b> probe through the cavity and keep only its |a> outcome.
void append_disentangling_probe(std::vector<ProtocolStep> &steps, std::size_t probe, double beta,
                                double gt) {
    steps.emplace_back(step::Inject{beta});
    steps.emplace_back(step::AddAtom{AtomState::basis(Level::b)});
    steps.emplace_back(step::ResonantProbe{probe, gt, 0.0});
    steps.emplace_back(step::Measure{probe, LevelPair::ab, Level::a});
}

} // namespace

void append_entangling_atom(std::vector<ProtocolStep> &steps, std::size_t atom, double phi) {
    steps.emplace_back(step::AddAtom{AtomState::basis(Level::g)});
    steps.emplace_back(step::Rotate{atom, Rotation2::ramsey()});
    steps.emplace_back(step::ConditionalPhase{atom, phi});
    steps.emplace_back(step::Rotate{atom, Rotation2::ramsey()});
}

std::vector<ProtocolStep> epr_recipe(BellVariant variant, const PrepConfig &config) {
    check_alpha(config.alpha);
    std::vector<ProtocolStep> steps;
    append_entangling_atom(steps, 0, config.phi);
    append_entangling_atom(steps, 1, config.phi);
    const bool inject_minus =
        variant == BellVariant::phi_minus || variant == BellVariant::psi_plus;
    append_disentangling_probe(steps, 2, inject_minus ? -config.alpha : config.alpha,
                               config.probe_time());
    if (variant == BellVariant::psi_plus || variant == BellVariant::psi_minus) {
        steps.emplace_back(step::Rotate{1, Rotation2::level_swap()});
    }
    return steps;
}

std::vector<ProtocolStep> ghz_recipe(Sign sign, GhzMode mode, const PrepConfig &config) {
    check_alpha(config.alpha);
    std::vector<ProtocolStep> steps;
    append_entangling_atom(steps, 0, config.phi);
    append_entangling_atom(steps, 1, config.phi);
    if (mode == GhzMode::hybrid) {
        if (sign == Sign::minus) {
            steps.emplace_back(step::Rotate{0, Rotation2::phase_flip()});
        }
        return steps;
    }
    append_entangling_atom(steps, 2, config.phi);
    append_disentangling_probe(steps, 3,
                               sign == Sign::plus ? config.alpha : -config.alpha,
                               config.probe_time());
    return steps;
}

ProtocolRun prepare_epr(BellVariant variant, const PrepConfig &config, Rng &rng) {
    return run_protocol(epr_recipe(variant, config), config.dim, config.alpha, rng, config.tol);
}

ProtocolRun prepare_ghz(Sign sign, GhzMode mode, const PrepConfig &config, Rng &rng) {
    return run_protocol(ghz_recipe(sign, mode, config), config.dim, config.alpha, rng,
                        config.tol);
}

CompositeState bell_target(BellVariant variant) {
    switch (variant) {
    case BellVariant::phi_plus: return atomic_superposition({{"ff", 1.0}, {"gg", 1.0}});
    case BellVariant::phi_minus: return atomic_superposition({{"ff", 1.0}, {"gg", -1.0}});
    case BellVariant::psi_plus: return atomic_superposition({{"fg", 1.0}, {"gf", 1.0}});
    case BellVariant::psi_minus: return atomic_superposition({{"fg", 1.0}, {"gf", -1.0}});
    }
    throw ValidationError("unknown Bell variant");
}

CompositeState ghz_target(Sign sign) {
    return atomic_superposition({{"fff", 1.0}, {"ggg", static_cast<double>(value(sign))}});
}

CompositeState hybrid_ghz_target(Sign sign, double alpha, std::size_t dim, const Tolerances &tol) {
    const FieldState even = cat_state(alpha, Sign::plus, dim, false, tol).state;
    const FieldState odd = cat_state(alpha, Sign::minus, dim, false, tol).state;
    const CompositeState ff = compose({AtomState::basis(Level::f), AtomState::basis(Level::f)}, even);
    const CompositeState gg = compose({AtomState::basis(Level::g), AtomState::basis(Level::g)}, odd);
    Vector amps = 0.5 * (ff.amplitudes() + static_cast<double>(value(sign)) * gg.amplitudes());
    return ff.with_amplitudes(std::move(amps));
}

} // namespace cqed
