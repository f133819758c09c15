#include "cqed/ghztest.hpp"

#include <algorithm>
#include <thread>

namespace cqed {

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

SpaceShape SpaceShape::of(const CompositeState &state) {
    return {state.atom_levels(), state.dim()};
}

SpaceShape SpaceShape::atoms_only(std::size_t count, LevelPair levels) {
    return {std::vector<LevelPair>(count, levels), 1};
}

double Observable::hermiticity_error() const {
    return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

Observable operator*(const Observable &lhs, const Observable &rhs) {
    if (lhs.matrix.rows() != rhs.matrix.rows()) {
        throw DimensionMismatch(static_cast<std::size_t>(lhs.matrix.rows()),
                                static_cast<std::size_t>(rhs.matrix.rows()));
    }
    return {lhs.matrix * rhs.matrix, lhs.label + rhs.label};
}

namespace {

Eigen::Matrix2cd pauli(Axis axis) {
    Eigen::Matrix2cd m;
    switch (axis) {
    case Axis::x: m << 0.0, 1.0, 1.0, 0.0; break;
    case Axis::y: m << 0.0, -kI, kI, 0.0; break;
    case Axis::z: m << 1.0, 0.0, 0.0, -1.0; break;
    }
    return m;
}

std::string axis_name(Axis axis) {
    switch (axis) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
    }
    return "?";
}

// op on one atom, identity on the rest of the space.
Matrix embed_atom_operator(const Eigen::Matrix2cd &op, std::size_t atom, const SpaceShape &space) {
    if (atom >= space.atoms.size()) {
        throw UnknownAtom(atom, space.atoms.size());
    }
    const std::size_t size = space.size();
    const std::size_t stride = (std::size_t{1} << (space.atoms.size() - 1 - atom)) * space.field_dim;
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
    for (std::size_t col = 0; col < size; ++col) {
        const std::size_t bit = (col / stride) & 1U;
        const std::size_t base = col - bit * stride;
        for (std::size_t row_bit = 0; row_bit < 2; ++row_bit) {
            m(static_cast<Eigen::Index>(base + row_bit * stride), static_cast<Eigen::Index>(col)) =
                op(static_cast<Eigen::Index>(row_bit), static_cast<Eigen::Index>(bit));
        }
    }
    return m;
}

// I_atoms (x) op for a field operator.
Matrix embed_field_operator(const Matrix &op, const SpaceShape &space) {
    if (static_cast<std::size_t>(op.rows()) != space.field_dim) {
        throw DimensionMismatch(static_cast<std::size_t>(op.rows()), space.field_dim);
    }
    const auto d = static_cast<Eigen::Index>(space.field_dim);
    const auto size = static_cast<Eigen::Index>(space.size());
    Matrix m = Matrix::Zero(size, size);
    for (Eigen::Index blk = 0; blk < size; blk += d) {
        m.block(blk, blk, d, d) = op;
    }
    return m;
}

} // namespace

Observable build_pauli(Axis axis, std::size_t atom, const SpaceShape &space) {
    return {embed_atom_operator(pauli(axis), atom, space),
            "s" + axis_name(axis) + "^" + std::to_string(atom + 1)};
}

Observable build_mermin(MerminOperator which, const SpaceShape &space) {
    if (space.atoms.size() != 3) {
        throw WrongAtomCount(3, space.atoms.size());
    }
    for (const LevelPair p : space.atoms) {
        if (p != LevelPair::fg) {
            throw WrongLevelPair("Mermin operators act on fg atoms");
        }
    }
    std::array<Axis, 3> axes{};
    std::string label;
    switch (which) {
    case MerminOperator::A: axes = {Axis::x, Axis::y, Axis::y}; label = "A"; break;
    case MerminOperator::B: axes = {Axis::y, Axis::x, Axis::y}; label = "B"; break;
    case MerminOperator::C: axes = {Axis::y, Axis::y, Axis::x}; label = "C"; break;
    case MerminOperator::D: axes = {Axis::x, Axis::x, Axis::x}; label = "D"; break;
    }
    Matrix m = build_pauli(axes[0], 0, space).matrix;
    m = m * build_pauli(axes[1], 1, space).matrix;
    m = m * build_pauli(axes[2], 2, space).matrix;
    return {std::move(m), label};
}

Observable build_cavity_sigma_x(double alpha, std::size_t dim, const Tolerances &tol) {
    const Vector even = cat_state(alpha, Sign::plus, dim, true, tol).state.amplitudes();
    const Vector odd = cat_state(alpha, Sign::minus, dim, true, tol).state.amplitudes();
    return {even * odd.adjoint() + odd * even.adjoint(), "sx^C"};
}

Observable build_hybrid_d(double alpha, std::size_t dim, const Tolerances &tol) {
    const SpaceShape space{{LevelPair::fg, LevelPair::fg}, dim};
    const Observable cavity = build_cavity_sigma_x(alpha, dim, tol);
    Matrix m = build_pauli(Axis::x, 0, space).matrix * build_pauli(Axis::x, 1, space).matrix *
               embed_field_operator(cavity.matrix, space);
    return {std::move(m), "D^C"};
}

Complex expectation_complex(const Observable &obs, const CompositeState &state) {
    if (static_cast<std::size_t>(obs.matrix.rows()) != state.size()) {
        throw DimensionMismatch(static_cast<std::size_t>(obs.matrix.rows()), state.size());
    }
    return state.amplitudes().dot(obs.matrix * state.amplitudes());
}

double expectation(const Observable &obs, const CompositeState &state) {
    return expectation_complex(obs, state).real();
}

double expectation(const Observable &obs, const DensityBlock &rho) {
    if (obs.matrix.rows() != rho.matrix().rows()) {
        throw DimensionMismatch(static_cast<std::size_t>(obs.matrix.rows()),
                                static_cast<std::size_t>(rho.matrix().rows()));
    }
    return (rho.matrix() * obs.matrix).trace().real();
}

// ---------------------------------------------------------------------------
// Local hidden variables
// ---------------------------------------------------------------------------

std::vector<LhvAssignment> all_lhv_assignments() {
    std::vector<LhvAssignment> out;
    out.reserve(64);
    for (unsigned bits = 0; bits < 64; ++bits) {
        LhvAssignment m{};
        for (unsigned k = 0; k < 3; ++k) {
            m.mx[k] = (bits >> k) & 1U ? -1 : 1;
            m.my[k] = (bits >> (k + 3)) & 1U ? -1 : 1;
        }
        out.push_back(m);
    }
    return out;
}

int qm_prediction(Sign sign) { return value(sign); }

int lhv_prediction(Sign sign) {
    // a b c = m_x^1 m_x^2 m_x^3 (m_y^k)^2, and each of a, b, c equals -sign.
    const int abc = -value(sign);
    return abc * abc * abc;
}

LhvScan lhv_scan(Sign sign) {
    LhvScan scan;
    const int constrained = -value(sign);
    for (const LhvAssignment &m : all_lhv_assignments()) {
        ++scan.assignments;
        if (m.a() != constrained || m.b() != constrained || m.c() != constrained) {
            continue;
        }
        ++scan.consistent;
        if (m.d() == lhv_prediction(sign)) {
            ++scan.product_matches_lhv;
        }
        if (m.d() == qm_prediction(sign)) {
            ++scan.product_matches_qm;
        }
    }
    return scan;
}

// ---------------------------------------------------------------------------
// The single-run test
// ---------------------------------------------------------------------------

std::array<std::string, 4> allowed_branches(Sign sign) {
    if (sign == Sign::plus) {
        return {"ggg", "gff", "ffg", "fgf"};
    }
    return {"ggf", "gfg", "fff", "fgg"};
}

int eigenvalue_of(Level detected) {
    switch (detected) {
    case Level::g: return 1;
    case Level::f: return -1;
    default: throw WrongLevelPair("GHZ detections are f or g");
    }
}

std::vector<ProtocolStep> ghz_readout_steps(GhzMode mode, const PrepConfig &prep) {
    std::vector<ProtocolStep> steps;
    for (std::size_t atom = 0; atom < 2; ++atom) {
        steps.emplace_back(step::Rotate{atom, Rotation2::mermin()});
        steps.emplace_back(step::Measure{atom, LevelPair::fg, std::nullopt});
    }
    if (mode == GhzMode::atomic) {
        steps.emplace_back(step::Rotate{2, Rotation2::mermin()});
        steps.emplace_back(step::Measure{2, LevelPair::fg, std::nullopt});
        return steps;
    }
    // Cavity left in |alpha> or |-alpha>: a fresh atom through R and C maps this
    // onto |g>|alpha> or |f>|alpha>, which the probe then disentangles.
    steps.emplace_back(step::AddAtom{AtomState::basis(Level::g)});
    steps.emplace_back(step::Rotate{2, Rotation2::ramsey()});
    steps.emplace_back(step::ConditionalPhase{2, prep.phi});
    steps.emplace_back(step::Inject{prep.alpha});
    steps.emplace_back(step::AddAtom{AtomState::basis(Level::b)});
    steps.emplace_back(step::ResonantProbe{3, prep.probe_time(), 0.0});
    steps.emplace_back(step::Measure{3, LevelPair::ab, Level::a});
    steps.emplace_back(step::Measure{2, LevelPair::fg, std::nullopt});
    return steps;
}

namespace {

struct Preparation {
    CompositeState state;
    double probability;
};

Preparation prepare(Sign sign, GhzMode mode, const PrepConfig &prep) {
    Rng unused(0); // every measurement in the recipes is post-selected
    ProtocolRun run = prepare_ghz(sign, mode, prep, unused);
    return {std::move(run.final_state), success_probability_report(run)};
}

std::string branch_key(const std::vector<MeasurementRecord> &records) {
    std::string key;
    for (const MeasurementRecord &r : records) {
        if (!r.postselected) {
            key.push_back(to_char(r.outcome));
        }
    }
    return key;
}

std::map<std::string, double> all_triples_zero() {
    std::map<std::string, double> out;
    for (const char a : {'f', 'g'}) {
        for (const char b : {'f', 'g'}) {
            for (const char c : {'f', 'g'}) {
                out[std::string{a, b, c}] = 0.0;
            }
        }
    }
    return out;
}

// Sequential Born sampler over the memoized measurement tree: the conditional
// probability of each detection given the earlier ones.
class BranchSampler {
  public:
    explicit BranchSampler(const std::map<std::string, double> &leaves) {
        for (const auto &[key, p] : leaves) {
            for (std::size_t len = 0; len <= key.size(); ++len) {
                prefix_mass_[key.substr(0, len)] += p;
            }
        }
    }

    std::string sample(Rng &rng, std::size_t detections) const {
        std::string prefix;
        for (std::size_t k = 0; k < detections; ++k) {
            const double total = mass(prefix);
            const double p_first = total > 0.0 ? mass(prefix + 'f') / total : 0.0;
            prefix.push_back(uniform01(rng) < p_first ? 'f' : 'g');
        }
        return prefix;
    }

  private:
    double mass(const std::string &prefix) const {
        const auto it = prefix_mass_.find(prefix);
        return it == prefix_mass_.end() ? 0.0 : it->second;
    }

    std::map<std::string, double> prefix_mass_;
};

} // namespace

CompositeState ghz_prepared_state(Sign sign, GhzMode mode, const PrepConfig &prep) {
    return prepare(sign, mode, prep).state;
}

std::map<std::string, double> exact_branch_probabilities(Sign sign, GhzMode mode,
                                                         const PrepConfig &prep) {
    const CompositeState state = ghz_prepared_state(sign, mode, prep);
    std::map<std::string, double> out = all_triples_zero();
    for (const Branch &b : enumerate_branches(state, ghz_readout_steps(mode, prep), prep.tol)) {
        out[branch_key(b.records)] += b.probability;
    }
    return out;
}

bool GhzTestResult::all_products_match_qm() const {
    return std::all_of(products.begin(), products.end(),
                       [this](int p) { return p == qm_prediction; });
}

std::string GhzTestResult::verdict() const {
    if (products.empty()) {
        return "NONE";
    }
    if (all_products_match_qm()) {
        return "QM";
    }
    const bool all_lhv = std::all_of(products.begin(), products.end(),
                                     [this](int p) { return p == lhv_prediction; });
    return all_lhv ? "LHV" : "MIXED";
}

GhzTestResult run_ghz_test(const GhzTestConfig &config) {
    if (config.shots < 1) {
        throw ValidationError("shots must be >= 1");
    }
    const Preparation prepared = prepare(config.sign, config.mode, config.prep);
    const auto readout = ghz_readout_steps(config.mode, config.prep);

    GhzTestResult result;
    result.sign = config.sign;
    result.mode = config.mode;
    result.shots = config.shots;
    result.qm_prediction = qm_prediction(config.sign);
    result.lhv_prediction = lhv_prediction(config.sign);
    result.preparation_probability = prepared.probability;
    result.expected_probabilities = all_triples_zero();
    result.readout_probability = 0.0;
    for (const Branch &b : enumerate_branches(prepared.state, readout, config.prep.tol)) {
        result.expected_probabilities[branch_key(b.records)] += b.probability;
        result.readout_probability += b.probability * b.postselection_probability;
    }

    const BranchSampler sampler(result.expected_probabilities);
    result.shot_branches.resize(config.shots);
    result.products.resize(config.shots);
    auto run_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t shot = lo; shot < hi; ++shot) {
            Rng rng = shot_rng(config.seed, shot);
            std::string key = sampler.sample(rng, 3);
            int product = 1;
            for (const char c : key) {
                product *= eigenvalue_of(level_from_char(c));
            }
            result.shot_branches[shot] = std::move(key);
            result.products[shot] = product;
        }
    };
    const std::size_t threads =
        std::clamp<std::size_t>(config.threads, 1, std::max<std::size_t>(1, config.shots));
    if (threads == 1) {
        run_range(0, config.shots);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (config.shots + threads - 1) / threads;
        for (std::size_t lo = 0; lo < config.shots; lo += chunk) {
            pool.emplace_back(run_range, lo, std::min(config.shots, lo + chunk));
        }
    }

    const auto allowed = allowed_branches(config.sign);
    for (const std::string &key : result.shot_branches) {
        ++result.branch_counts[key];
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            ++result.forbidden_count;
        }
    }
    return result;
}

} // namespace cqed
