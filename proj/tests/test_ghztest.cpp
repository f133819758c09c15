#include <cmath>

#include <gtest/gtest.h>

#include "cqed/ghztest.hpp"
#include "oracles.hpp"

using namespace cqed;

namespace {

template <class Derived> double max_abs(const Eigen::MatrixBase<Derived> &m) {
    return m.cwiseAbs().maxCoeff();
}

const SpaceShape kThree = SpaceShape::atoms_only(3);

CompositeState ghz_state(int sign) {
    return CompositeState(std::vector<LevelPair>(3, LevelPair::fg), 1, oracle::ghz(sign));
}

std::string branch_of(const ProtocolRun &run) {
    std::string key;
    for (const MeasurementRecord &r : run.records) {
        if (!r.postselected) {
            key.push_back(to_char(r.outcome));
        }
    }
    return key;
}

} // namespace

TEST(Pauli, SingleAtomPlacement) {
    const SpaceShape one = SpaceShape::atoms_only(1);
    EXPECT_NEAR(max_abs(build_pauli(Axis::x, 0, one).matrix - oracle::sigma_x()), 0.0, 0.0);
    EXPECT_NEAR(max_abs(build_pauli(Axis::y, 0, one).matrix - oracle::sigma_y()), 0.0, 0.0);
    Eigen::Matrix2cd z;
    z << 1, 0, 0, -1;
    EXPECT_NEAR(max_abs(build_pauli(Axis::z, 0, one).matrix - z), 0.0, 0.0);
}

TEST(Pauli, EmbeddingWithField) {
    SpaceShape space{{LevelPair::fg, LevelPair::fg}, 3};
    const Matrix expected =
        oracle::kron3(Matrix::Identity(2, 2), oracle::sigma_y(), Matrix::Identity(3, 3));
    EXPECT_NEAR(max_abs(build_pauli(Axis::y, 1, space).matrix - expected), 0.0, 0.0);
}

TEST(Mermin, MatchesKroneckerProducts) {
    const Matrix x = oracle::sigma_x(), y = oracle::sigma_y();
    EXPECT_NEAR(max_abs(build_mermin(MerminOperator::A, kThree).matrix - oracle::kron3(x, y, y)), 0.0, 1e-15);
    EXPECT_NEAR(max_abs(build_mermin(MerminOperator::B, kThree).matrix - oracle::kron3(y, x, y)), 0.0, 1e-15);
    EXPECT_NEAR(max_abs(build_mermin(MerminOperator::C, kThree).matrix - oracle::kron3(y, y, x)), 0.0, 1e-15);
    EXPECT_NEAR(max_abs(build_mermin(MerminOperator::D, kThree).matrix - oracle::kron3(x, x, x)), 0.0, 1e-15);
}

TEST(Mermin, AlgebraicIdentities) {
    const Observable a = build_mermin(MerminOperator::A, kThree);
    const Observable b = build_mermin(MerminOperator::B, kThree);
    const Observable c = build_mermin(MerminOperator::C, kThree);
    const Observable d = build_mermin(MerminOperator::D, kThree);
    EXPECT_LT(max_abs(a.matrix * b.matrix - b.matrix * a.matrix), 1e-12);
    EXPECT_LT(max_abs(a.matrix * c.matrix - c.matrix * a.matrix), 1e-12);
    EXPECT_LT(max_abs(b.matrix * c.matrix - c.matrix * b.matrix), 1e-12);
    EXPECT_LT(max_abs(d.matrix + (a * b * c).matrix), 1e-12);
    for (const Observable *o : {&a, &b, &c, &d}) {
        EXPECT_LT(o->hermiticity_error(), 1e-15);
    }
}

TEST(Mermin, GhzExpectations) {
    for (const int sign : {1, -1}) {
        const CompositeState s = ghz_state(sign);
        EXPECT_NEAR(expectation(build_mermin(MerminOperator::D, kThree), s), sign, 1e-12);
        for (const MerminOperator op : {MerminOperator::A, MerminOperator::B, MerminOperator::C}) {
            EXPECT_NEAR(expectation(build_mermin(op, kThree), s), -sign, 1e-12);
        }
    }
}

TEST(Mermin, DensityExpectationAgrees) {
    const CompositeState s = ghz_state(1);
    const DensityBlock rho = reduce(s, SubsystemMask::atoms_only({0, 1, 2}));
    for (const MerminOperator op :
         {MerminOperator::A, MerminOperator::B, MerminOperator::C, MerminOperator::D}) {
        EXPECT_NEAR(expectation(build_mermin(op, kThree), rho),
                    expectation(build_mermin(op, kThree), s), 1e-14);
    }
}

TEST(Mermin, NeedsThreeCascadeAtoms) {
    EXPECT_THROW(build_mermin(MerminOperator::A, SpaceShape::atoms_only(2)), WrongAtomCount);
    EXPECT_THROW(build_mermin(MerminOperator::A, SpaceShape::atoms_only(3, LevelPair::ab)),
                 WrongLevelPair);
}

TEST(CavityPauli, SwapsNormalizedCats) {
    const double alpha = 2.0;
    const Observable sx = build_cavity_sigma_x(alpha, 64);
    const Vector even = cat_state(alpha, Sign::plus, 64, true).state.amplitudes();
    const Vector odd = cat_state(alpha, Sign::minus, 64, true).state.amplitudes();
    EXPECT_NEAR((sx.matrix * odd - even).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    EXPECT_NEAR((sx.matrix * even - odd).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    EXPECT_LT(sx.hermiticity_error(), 1e-15);
}

TEST(CavityPauli, CoherentStateIsNearEigenvector) {
    const double alpha = 2.0;
    const Observable sx = build_cavity_sigma_x(alpha, 64);
    const Vector coh = make_coherent(alpha, 64).amplitudes();
    const double residual = (sx.matrix * coh - coh).norm();
    EXPECT_LT(residual, 2 * std::exp(-2 * alpha * alpha));
}

TEST(CavityPauli, HybridDExpectation) {
    const double alpha = 2.0;
    for (const int sign : {1, -1}) {
        Rng rng(0);
        const ProtocolRun run = prepare_ghz(static_cast<Sign>(sign), GhzMode::hybrid, PrepConfig{}, rng);
        EXPECT_NEAR(expectation(build_hybrid_d(alpha, 64), run.final_state), sign,
                    2 * std::exp(-2 * alpha * alpha));
    }
}

TEST(Lhv, Predictions) {
    EXPECT_EQ(lhv_prediction(Sign::plus), -1);
    EXPECT_EQ(lhv_prediction(Sign::minus), 1);
    EXPECT_EQ(qm_prediction(Sign::plus), 1);
    EXPECT_EQ(qm_prediction(Sign::minus), -1);
}

TEST(Lhv, ExhaustiveScan) {
    EXPECT_EQ(all_lhv_assignments().size(), 64u);
    for (const Sign sign : {Sign::plus, Sign::minus}) {
        std::size_t consistent = 0, forced = 0;
        for (int bits = 0; bits < 64; ++bits) {
            int m[6];
            for (int k = 0; k < 6; ++k) {
                m[k] = (bits >> k) & 1 ? -1 : 1;
            }
            const int want = -value(sign);
            if (m[0] * m[4] * m[5] == want && m[3] * m[1] * m[5] == want &&
                m[3] * m[4] * m[2] == want) {
                ++consistent;
                forced += m[0] * m[1] * m[2] == -value(sign) ? 1 : 0;
            }
        }
        const LhvScan scan = lhv_scan(sign);
        EXPECT_EQ(scan.assignments, 64u);
        EXPECT_EQ(scan.consistent, consistent);
        EXPECT_EQ(scan.consistent, 8u);
        EXPECT_EQ(scan.product_matches_lhv, forced);
        EXPECT_EQ(scan.product_matches_lhv, scan.consistent);
        EXPECT_EQ(scan.product_matches_qm, 0u);
    }
}

TEST(Readout, EigenvalueMapping) {
    EXPECT_EQ(eigenvalue_of(Level::g), 1);
    EXPECT_EQ(eigenvalue_of(Level::f), -1);
    EXPECT_THROW(eigenvalue_of(Level::a), WrongLevelPair);
}

TEST(Readout, AllowedBranchesHaveQmProduct) {
    for (const Sign sign : {Sign::plus, Sign::minus}) {
        for (const std::string &key : allowed_branches(sign)) {
            int product = 1;
            for (const char c : key) {
                product *= eigenvalue_of(level_from_char(c));
            }
            EXPECT_EQ(product, qm_prediction(sign)) << key;
        }
    }
}

TEST(Readout, UnravelingMatchesJointBorn) {
    const Matrix k = oracle::mermin_rotation();
    const Matrix kkk = oracle::kron3(k, k, k);
    for (const int sign : {1, -1}) {
        const Vector rotated = kkk * oracle::ghz(sign);
        const auto exact = exact_branch_probabilities(static_cast<Sign>(sign), GhzMode::atomic, PrepConfig{});
        ASSERT_EQ(exact.size(), 8u);
        for (const auto &[key, p] : exact) {
            const double born = std::norm(rotated.dot(oracle::ket(key)));
            EXPECT_NEAR(p, born, 1e-12) << key;
        }
    }
}

TEST(Readout, AllowedBranchesAreQuarter) {
    for (const Sign sign : {Sign::plus, Sign::minus}) {
        const auto exact = exact_branch_probabilities(sign, GhzMode::atomic, PrepConfig{});
        const auto allowed = allowed_branches(sign);
        for (const auto &[key, p] : exact) {
            const bool ok = std::find(allowed.begin(), allowed.end(), key) != allowed.end();
            EXPECT_NEAR(p, ok ? 0.25 : 0.0, 1e-12) << key;
        }
    }
}

TEST(Readout, HybridMatchesAtomic) {
    const double alpha = 2.0;
    for (const Sign sign : {Sign::plus, Sign::minus}) {
        const auto atomic = exact_branch_probabilities(sign, GhzMode::atomic, PrepConfig{});
        const auto hybrid = exact_branch_probabilities(sign, GhzMode::hybrid, PrepConfig{});
        for (const auto &[key, p] : atomic) {
            EXPECT_NEAR(hybrid.at(key), p, 2 * std::exp(-2 * alpha * alpha) + 1e-3) << key;
        }
    }
}

TEST(GhzTest, SingleShot) {
    GhzTestConfig cfg;
    cfg.shots = 1;
    const GhzTestResult r = run_ghz_test(cfg);
    ASSERT_EQ(r.shot_branches.size(), 1u);
    const auto allowed = allowed_branches(Sign::plus);
    EXPECT_NE(std::find(allowed.begin(), allowed.end(), r.shot_branches[0]), allowed.end());
    EXPECT_EQ(r.products[0], 1);
    EXPECT_EQ(r.verdict(), "QM");
}

TEST(GhzTest, HybridMinusProducts) {
    GhzTestConfig cfg;
    cfg.sign = Sign::minus;
    cfg.mode = GhzMode::hybrid;
    cfg.seed = 3;
    const GhzTestResult r = run_ghz_test(cfg);
    EXPECT_EQ(r.forbidden_count, 0u);
    for (const int p : r.products) {
        ASSERT_EQ(p, -1);
    }
    EXPECT_EQ(r.lhv_prediction, -r.qm_prediction);
    EXPECT_EQ(r.verdict(), "QM");
}

TEST(GhzTest, ZeroShotsRejected) {
    GhzTestConfig cfg;
    cfg.shots = 0;
    EXPECT_THROW(run_ghz_test(cfg), ValidationError);
}

TEST(GhzTest, SampledFrequenciesMatchExact) {
    for (const Sign sign : {Sign::plus, Sign::minus}) {
        GhzTestConfig cfg;
        cfg.sign = sign;
        cfg.shots = 4000;
        cfg.seed = 42;
        const GhzTestResult r = run_ghz_test(cfg);
        const double band = 4 * std::sqrt(0.25 * 0.75 / double(cfg.shots));
        for (const std::string &key : allowed_branches(sign)) {
            const auto it = r.branch_counts.find(key);
            const double freq = it == r.branch_counts.end() ? 0.0 : double(it->second) / double(cfg.shots);
            EXPECT_NEAR(freq, r.expected_probabilities.at(key), band) << key;
        }
        EXPECT_EQ(r.forbidden_count, 0u);
        EXPECT_TRUE(r.all_products_match_qm());
    }
}

TEST(GhzTest, ThreadCountDoesNotChangeResults) {
    GhzTestConfig cfg;
    cfg.shots = 997;
    cfg.seed = 8;
    const GhzTestResult one = run_ghz_test(cfg);
    cfg.threads = 5;
    const GhzTestResult many = run_ghz_test(cfg);
    EXPECT_EQ(one.shot_branches, many.shot_branches);
    EXPECT_EQ(one.branch_counts, many.branch_counts);
}

TEST(GhzTest, SamplerAgreesWithDirectProtocolRuns) {
    for (const GhzMode mode : {GhzMode::atomic, GhzMode::hybrid}) {
        GhzTestConfig cfg;
        cfg.mode = mode;
        cfg.shots = 200;
        cfg.seed = 77;
        const GhzTestResult r = run_ghz_test(cfg);
        const CompositeState prepared = ghz_prepared_state(cfg.sign, mode, cfg.prep);
        const auto readout = ghz_readout_steps(mode, cfg.prep);
        for (std::size_t shot = 0; shot < cfg.shots; ++shot) {
            Rng rng = shot_rng(cfg.seed, shot);
            EXPECT_EQ(branch_of(run_protocol(prepared, readout, rng)), r.shot_branches[shot])
                << to_string(mode) << " shot " << shot;
        }
    }
}
