#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "cqed/protocol.hpp"
#include "oracles.hpp"
#include "pipelines.hpp"

using namespace cqed;

namespace {

template <class Derived> double max_abs(const Eigen::MatrixBase<Derived> &m) {
    return m.cwiseAbs().maxCoeff();
}

double atomic_fidelity(const ProtocolRun &run, std::vector<std::size_t> atoms,
                       const Eigen::VectorXcd &target) {
    const DensityBlock rho = reduce(run.final_state, SubsystemMask::atoms_only(std::move(atoms)));
    return (target.adjoint() * rho.matrix() * target)(0, 0).real();
}

} // namespace

TEST(RunProtocol, EmptyStepsKeepCoherentField) {
    Rng rng(0);
    const ProtocolRun run = run_protocol({}, 48, 1.5, rng);
    EXPECT_EQ(run.final_state.atom_count(), 0u);
    EXPECT_NEAR(max_abs(run.final_state.amplitudes() - make_coherent(1.5, 48).amplitudes()), 0.0,
                1e-15);
    EXPECT_EQ(run.branch_probability, 1.0);
    EXPECT_EQ(success_probability_report(run), 1.0);
}

TEST(RunProtocol, FirstRamseyZone) {
    Rng rng(0);
    const std::vector<ProtocolStep> steps{step::AddAtom{AtomState::basis(Level::g)},
                                          step::Rotate{0, Rotation2::ramsey()}};
    const ProtocolRun run = run_protocol(steps, 40, 2.0, rng);
    const FieldState field = make_coherent(2.0, 40);
    const CompositeState expected =
        compose({AtomState::superposition(LevelPair::fg, 1.0, 1.0)}, field);
    EXPECT_NEAR(max_abs(run.final_state.amplitudes() - expected.amplitudes()), 0.0, 1e-15);
}

TEST(RunProtocol, PhiPlusAgainstHandBuiltState) {
    Rng rng(0);
    const ProtocolRun run = prepare_epr(BellVariant::phi_plus, PrepConfig{}, rng);
    const Eigen::VectorXcd target = (oracle::ket("ff") + oracle::ket("gg")) / std::sqrt(2.0);
    EXPECT_NEAR(atomic_fidelity(run, {0, 1}, target), 1.0, 1e-10);
}

TEST(Epr, AllVariantsReachTheirTargets) {
    const std::pair<BellVariant, Eigen::VectorXcd> cases[] = {
        {BellVariant::phi_plus, oracle::ket("ff") + oracle::ket("gg")},
        {BellVariant::phi_minus, oracle::ket("ff") - oracle::ket("gg")},
        {BellVariant::psi_plus, oracle::ket("fg") + oracle::ket("gf")},
        {BellVariant::psi_minus, oracle::ket("fg") - oracle::ket("gf")},
    };
    for (const auto &[variant, raw] : cases) {
        Rng rng(1);
        const ProtocolRun run = prepare_epr(variant, PrepConfig{}, rng);
        EXPECT_NEAR(atomic_fidelity(run, {0, 1}, raw / std::sqrt(2.0)), 1.0, 1e-10)
            << to_string(variant);
        EXPECT_NEAR(fidelity(reduce(run.final_state, SubsystemMask::atoms_only({0, 1})),
                             bell_target(variant)),
                    1.0, 1e-10);
    }
}

TEST(Epr, PsiMinusIsSwappedPhiPlus) {
    Rng rng(0);
    const ProtocolRun phi = prepare_epr(BellVariant::phi_plus, PrepConfig{}, rng);
    const CompositeState swapped = rotate(phi.final_state, 1, Rotation2::level_swap());
    EXPECT_NEAR(fidelity(reduce(swapped, SubsystemMask::atoms_only({0, 1})),
                         bell_target(BellVariant::psi_minus)),
                1.0, 1e-10);
}

TEST(Epr, FieldAndProbeFactorOut) {
    Rng rng(0);
    const ProtocolRun run = prepare_epr(BellVariant::phi_minus, PrepConfig{}, rng);
    EXPECT_NEAR(reduce(run.final_state, SubsystemMask::atoms_only({0, 1})).purity(), 1.0, 1e-10);
    EXPECT_NEAR(run.final_state.norm_squared(), 1.0, 1e-12);
}

TEST(Epr, ProbeSuccessProbability) {
    // Half the amplitude leaves the cavity empty after injection; the probe
    // only fires on the |2 alpha> half.
    Rng rng(0);
    const ProtocolRun run = prepare_epr(BellVariant::phi_plus, PrepConfig{}, rng);
    const double pa = oracle::probe_upper_probability(16.0, std::numbers::pi / 8);
    EXPECT_GE(pa, 0.9);
    EXPECT_NEAR(success_probability_report(run), pa / 2, 1e-12);
    ASSERT_EQ(run.records.size(), 1u);
    EXPECT_TRUE(run.records[0].postselected);
    EXPECT_EQ(run.records[0].outcome, Level::a);
}

TEST(Epr, AlphaValidation) {
    Rng rng(0);
    PrepConfig zero;
    zero.alpha = 0.0;
    EXPECT_THROW(prepare_epr(BellVariant::phi_plus, zero, rng), DegenerateCat);
    PrepConfig negative;
    negative.alpha = -1.0;
    EXPECT_THROW(prepare_epr(BellVariant::phi_plus, negative, rng), ValidationError);
    PrepConfig small_dim;
    small_dim.dim = 4;
    EXPECT_THROW(prepare_epr(BellVariant::phi_plus, small_dim, rng), TailMassExceeded);
}

TEST(Ghz, AtomicBothSigns) {
    for (const int sign : {1, -1}) {
        Rng rng(0);
        const ProtocolRun run =
            prepare_ghz(static_cast<Sign>(sign), GhzMode::atomic, PrepConfig{}, rng);
        EXPECT_NEAR(atomic_fidelity(run, {0, 1, 2}, oracle::ghz(sign)), 1.0, 1e-10) << sign;
    }
}

TEST(Ghz, HybridMatchesRawCatState) {
    const double alpha = 2.0;
    for (const int sign : {1, -1}) {
        Rng rng(0);
        const ProtocolRun run =
            prepare_ghz(static_cast<Sign>(sign), GhzMode::hybrid, PrepConfig{}, rng);
        const FieldState even = cat_state(alpha, Sign::plus, 64, false).state;
        const FieldState odd = cat_state(alpha, Sign::minus, 64, false).state;
        const Vector target =
            0.5 * (compose({AtomState::basis(Level::f), AtomState::basis(Level::f)}, even).amplitudes() +
                   double(sign) *
                       compose({AtomState::basis(Level::g), AtomState::basis(Level::g)}, odd).amplitudes());
        EXPECT_NEAR(std::norm(target.dot(run.final_state.amplitudes())), 1.0, 1e-10);
        EXPECT_NEAR(fidelity(run.final_state, hybrid_ghz_target(static_cast<Sign>(sign), alpha, 64)),
                    1.0, 1e-10);
    }
}

TEST(Ghz, HybridOverlapWithNormalizedCats) {
    // Equal weights on normalized cats are not the prepared state; the
    // overlap deficit is fixed by the cat norms.
    const double alpha = 2.0;
    Rng rng(0);
    const ProtocolRun run = prepare_ghz(Sign::plus, GhzMode::hybrid, PrepConfig{}, rng);
    const FieldState even = cat_state(alpha, Sign::plus, 64, true).state;
    const FieldState odd = cat_state(alpha, Sign::minus, 64, true).state;
    const Vector target =
        (compose({AtomState::basis(Level::f), AtomState::basis(Level::f)}, even).amplitudes() +
         compose({AtomState::basis(Level::g), AtomState::basis(Level::g)}, odd).amplitudes()) /
        std::sqrt(2.0);
    const double expected = 0.5 * (1 + std::sqrt(1 - std::exp(-4 * alpha * alpha)));
    EXPECT_NEAR(std::norm(target.dot(run.final_state.amplitudes())), expected, 1e-12);
    EXPECT_GT(expected, 1 - 1e-7);
}

TEST(Ghz, HybridReducedPurity) {
    const double alpha = 1.0;
    Rng rng(0);
    PrepConfig cfg;
    cfg.alpha = alpha;
    cfg.dim = 40;
    const ProtocolRun run = prepare_ghz(Sign::plus, GhzMode::hybrid, cfg, rng);
    const double purity = reduce(run.final_state, SubsystemMask::atoms_only({0, 1})).purity();
    EXPECT_NEAR(purity, 0.5 * (1 + std::exp(-4 * alpha * alpha)), 1e-12);
}

TEST(Protocol, ForcedImpossibleOutcome) {
    Rng rng(0);
    const std::vector<ProtocolStep> steps{
        step::AddAtom{AtomState::basis(Level::f)},
        step::Measure{0, LevelPair::fg, Level::g}};
    EXPECT_THROW(run_protocol(steps, 4, 0.0, rng), ZeroProbabilityBranch);
}

TEST(Protocol, ValidationErrors) {
    Rng rng(0);
    EXPECT_THROW(run_protocol({step::Rotate{0, Rotation2::ramsey()}}, 8, 0.0, rng), ValidationError);
    EXPECT_THROW(run_protocol({step::AddAtom{AtomState::basis(Level::g)},
                               step::ResonantProbe{0, 1.0, 0.0}},
                              8, 0.0, rng),
                 ValidationError);
    EXPECT_THROW(run_protocol({step::AddAtom{AtomState::basis(Level::g)},
                               step::Measure{0, LevelPair::fg, std::nullopt},
                               step::Measure{0, LevelPair::fg, std::nullopt}},
                              8, 0.0, rng),
                 ValidationError);
    EXPECT_THROW(run_protocol({step::AddAtom{AtomState::basis(Level::g)},
                               step::Measure{0, LevelPair::fg, Level::a}},
                              8, 0.0, rng),
                 ValidationError);
}

TEST(Protocol, Determinism) {
    std::mt19937_64 gen(99);
    for (int i = 0; i < 50; ++i) {
        const pipelines::Pipeline p = pipelines::random_pipeline(gen);
        Rng a(1234), b(1234);
        const ProtocolRun x = run_protocol(p.steps, p.dim, p.alpha, a);
        const ProtocolRun y = run_protocol(p.steps, p.dim, p.alpha, b);
        ASSERT_EQ(x.records.size(), y.records.size());
        for (std::size_t k = 0; k < x.records.size(); ++k) {
            EXPECT_EQ(x.records[k].outcome, y.records[k].outcome);
            EXPECT_EQ(x.records[k].probability, y.records[k].probability);
        }
        EXPECT_EQ(x.final_state.amplitudes(), y.final_state.amplitudes());
    }
}

TEST(Protocol, RandomPipelinesPreserveNorm) {
    std::mt19937_64 gen(7);
    for (int i = 0; i < 200; ++i) {
        const pipelines::Pipeline p = pipelines::random_pipeline(gen);
        Rng rng(static_cast<std::uint64_t>(i));
        EXPECT_NEAR(run_protocol(p.steps, p.dim, p.alpha, rng).final_state.norm_squared(), 1.0,
                    1e-10);
    }
}

TEST(Branches, ClosureOverAllOutcomes) {
    std::mt19937_64 gen(5);
    for (int i = 0; i < 40; ++i) {
        const pipelines::Pipeline p = pipelines::random_pipeline(gen);
        const CompositeState initial = CompositeState::field_only(make_coherent(p.alpha, p.dim));
        const std::vector<Branch> branches = enumerate_branches(initial, p.steps);
        double total = 0.0;
        for (const Branch &b : branches) {
            total += b.probability;
            EXPECT_NEAR(b.final_state.norm_squared(), 1.0, 1e-10);
        }
        EXPECT_NEAR(total, 1.0, 1e-10);
    }
}

TEST(Branches, ExpandedPostselectionsCloseToo) {
    const std::vector<ProtocolStep> steps = epr_recipe(BellVariant::phi_plus, PrepConfig{});
    const CompositeState initial = CompositeState::field_only(make_coherent(2.0, 64));
    const std::vector<Branch> forced = enumerate_branches(initial, steps);
    ASSERT_EQ(forced.size(), 1u);
    EXPECT_NEAR(forced[0].postselection_probability,
                oracle::probe_upper_probability(16.0, std::numbers::pi / 8) / 2, 1e-12);

    const std::vector<Branch> all = enumerate_branches(initial, steps, {}, true);
    EXPECT_EQ(all.size(), 2u);
    double total = 0.0;
    for (const Branch &b : all) {
        total += b.probability;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Branches, EprCollapseCorrelation) {
    Rng rng(0);
    const ProtocolRun run = prepare_epr(BellVariant::phi_plus, PrepConfig{}, rng);
    const std::vector<ProtocolStep> readout{step::Measure{0, LevelPair::fg, std::nullopt},
                                            step::Measure{1, LevelPair::fg, std::nullopt}};
    const std::vector<Branch> branches = enumerate_branches(run.final_state, readout);
    double same = 0.0;
    for (const Branch &b : branches) {
        ASSERT_EQ(b.records.size(), 2u);
        if (b.records[0].outcome == b.records[1].outcome) {
            same += b.probability;
            EXPECT_NEAR(b.records[1].probability, 1.0, 1e-12);
        }
    }
    EXPECT_NEAR(same, 1.0, 1e-12);
}
