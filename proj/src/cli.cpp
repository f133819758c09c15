#include "cqed/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace cqed::cli {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

ValidationError bad_value(const std::string &key, const std::string &value, const char *expected) {
    return ValidationError("invalid value '" + value + "' for " + key + " (expected " + expected +
                           ")");
}

double parse_double(const std::string &key, const std::string &value) {
    double out = 0.0;
    const auto *end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end || !std::isfinite(out)) {
        throw bad_value(key, value, "a finite number");
    }
    return out;
}

std::uint64_t parse_uint(const std::string &key, const std::string &value) {
    std::uint64_t out = 0;
    const auto *end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw bad_value(key, value, "a non-negative integer");
    }
    return out;
}

std::vector<double> parse_list(const std::string &key, const std::string &value) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        out.push_back(parse_double(key, trim(item)));
    }
    return out;
}

std::string format_double(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

void apply(RunConfig &c, const std::string &key, const std::string &value) {
    if (key == "alpha") {
        c.alpha = parse_double(key, value);
    } else if (key == "dim") {
        c.dim = parse_uint(key, value);
    } else if (key == "shots") {
        c.shots = parse_uint(key, value);
    } else if (key == "seed") {
        c.seed = parse_uint(key, value);
    } else if (key == "gt") {
        c.gt_probe = parse_double(key, value);
    } else if (key == "phi") {
        c.phi = parse_double(key, value);
    } else if (key == "delta_over_g") {
        c.delta_over_g = parse_list(key, value);
    } else if (key == "output") {
        c.output = value;
    } else if (key == "mode") {
        c.mode = value;
    } else if (key == "sign") {
        c.sign = value;
    } else if (key == "variant") {
        c.variant = value;
    } else if (key == "format") {
        c.format = value;
    } else if (key == "threads") {
        c.threads = static_cast<unsigned>(parse_uint(key, value));
    } else if (key == "convergence_dim") {
        c.convergence_dim = parse_uint(key, value);
    } else if (key == "convergence_phi") {
        c.convergence_phi = parse_double(key, value);
    } else if (key == "sweep_points") {
        c.sweep_points = parse_uint(key, value);
    } else {
        throw ValidationError("unknown config key '" + key + "'");
    }
}

void check_common(const RunConfig &c) {
    if (c.dim < 2) {
        throw ValidationError("dim must be >= 2");
    }
    if (c.gt_probe && *c.gt_probe < 0.0) {
        throw ValidationError("gt must be >= 0");
    }
    if (c.format != "json" && c.format != "csv") {
        throw ValidationError("format must be json or csv");
    }
    if (c.threads < 1) {
        throw ValidationError("threads must be >= 1");
    }
}

Sign parse_sign(const std::string &s) {
    if (s == "+" || s == "plus") {
        return Sign::plus;
    }
    if (s == "-" || s == "minus") {
        return Sign::minus;
    }
    throw ValidationError("sign must be + or -, got '" + s + "'");
}

GhzMode parse_mode(const std::string &s) {
    if (s == "atomic") {
        return GhzMode::atomic;
    }
    if (s == "hybrid") {
        return GhzMode::hybrid;
    }
    throw ValidationError("mode must be atomic or hybrid, got '" + s + "'");
}

BellVariant parse_variant(const std::string &s) {
    for (const BellVariant v : {BellVariant::phi_plus, BellVariant::phi_minus,
                                BellVariant::psi_plus, BellVariant::psi_minus}) {
        if (s == to_string(v)) {
            return v;
        }
    }
    throw ValidationError("variant must be one of phi+, phi-, psi+, psi-, got '" + s + "'");
}

PrepConfig prep_config(const RunConfig &c) {
    if (c.alpha < 0.0) {
        throw ValidationError("alpha must be > 0");
    }
    PrepConfig p;
    p.alpha = c.alpha;
    p.dim = c.dim;
    p.gt_probe = c.gt_probe;
    p.phi = c.phi;
    return p;
}

json header(std::string_view command, const RunConfig &c) {
    json doc;
    doc["command"] = command;
    doc["artifact_version"] = kVersion;
    doc["seed"] = c.seed;
    doc["config"] = echo(c);
    return doc;
}

json records_json(const std::vector<MeasurementRecord> &records) {
    json out = json::array();
    for (const MeasurementRecord &r : records) {
        out.push_back({{"atom", r.atom},
                       {"outcome", std::string(1, to_char(r.outcome))},
                       {"probability", r.probability},
                       {"postselected", r.postselected}});
    }
    return out;
}

std::string csv_table(std::string_view command, const RunConfig &c,
                      const std::vector<std::string> &columns,
                      const std::vector<std::vector<double>> &rows) {
    std::ostringstream os;
    os << "# command=" << command << "\n# artifact_version=" << kVersion
       << "\n# seed=" << c.seed << '\n';
    for (const auto &[key, value] : echo(c)) {
        os << "# config." << key << '=' << value << '\n';
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        os << (i ? "," : "") << columns[i];
    }
    os << '\n';
    for (const auto &row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i ? "," : "") << format_double(row[i]);
        }
        os << '\n';
    }
    return os.str();
}

std::string render(const json &doc) { return doc.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

std::string cmd_prepare_epr(const RunConfig &c) {
    const BellVariant variant = parse_variant(c.variant);
    const PrepConfig prep = prep_config(c);
    Rng rng(c.seed);
    const ProtocolRun run = prepare_epr(variant, prep, rng);
    const DensityBlock atoms = reduce(run.final_state, SubsystemMask::atoms_only({0, 1}));

    json doc = header("prepare-epr", c);
    doc["variant"] = to_string(variant);
    doc["gt_probe"] = prep.probe_time();
    doc["fidelity"] = fidelity(atoms, bell_target(variant));
    doc["atomic_purity"] = atoms.purity();
    doc["probe_success_probability"] = success_probability_report(run);
    doc["branch_probability"] = run.branch_probability;
    doc["records"] = records_json(run.records);
    return render(doc);
}

std::string cmd_prepare_ghz(const RunConfig &c) {
    const Sign sign = parse_sign(c.sign);
    const GhzMode mode = parse_mode(c.mode);
    const PrepConfig prep = prep_config(c);
    Rng rng(c.seed);
    const ProtocolRun run = prepare_ghz(sign, mode, prep, rng);

    json doc = header("prepare-ghz", c);
    doc["sign"] = c.sign == "plus" || c.sign == "+" ? "+" : "-";
    doc["mode"] = to_string(mode);
    doc["gt_probe"] = prep.probe_time();
    doc["probe_success_probability"] = success_probability_report(run);
    doc["records"] = records_json(run.records);
    if (mode == GhzMode::atomic) {
        const DensityBlock atoms = reduce(run.final_state, SubsystemMask::atoms_only({0, 1, 2}));
        const SpaceShape space = SpaceShape::atoms_only(3);
        doc["fidelity"] = fidelity(atoms, ghz_target(sign));
        json ev;
        ev["A"] = expectation(build_mermin(MerminOperator::A, space), atoms);
        ev["B"] = expectation(build_mermin(MerminOperator::B, space), atoms);
        ev["C"] = expectation(build_mermin(MerminOperator::C, space), atoms);
        ev["D"] = expectation(build_mermin(MerminOperator::D, space), atoms);
        doc["expectations"] = ev;
    } else {
        doc["fidelity"] = fidelity(run.final_state, hybrid_ghz_target(sign, prep.alpha, prep.dim));
        doc["expectations"] = {
            {"D_cavity", expectation(build_hybrid_d(prep.alpha, prep.dim), run.final_state)}};
    }
    return render(doc);
}

std::string cmd_ghz_test(const RunConfig &c) {
    if (c.shots < 1) {
        throw ValidationError("shots must be >= 1");
    }
    GhzTestConfig cfg;
    cfg.sign = parse_sign(c.sign);
    cfg.mode = parse_mode(c.mode);
    cfg.shots = c.shots;
    cfg.seed = c.seed;
    cfg.prep = prep_config(c);
    cfg.threads = c.threads;
    const GhzTestResult r = run_ghz_test(cfg);

    json doc = header("ghz-test", c);
    doc["sign"] = value(r.sign) > 0 ? "+" : "-";
    doc["mode"] = to_string(r.mode);
    doc["shots"] = r.shots;
    doc["branch_counts"] = r.branch_counts;
    doc["expected_probabilities"] = r.expected_probabilities;
    doc["allowed_branches"] = allowed_branches(r.sign);
    doc["forbidden_count"] = r.forbidden_count;
    std::size_t plus = 0;
    for (const int p : r.products) {
        plus += p > 0 ? 1 : 0;
    }
    doc["product_counts"] = {{"+1", plus}, {"-1", r.products.size() - plus}};
    doc["qm_prediction"] = r.qm_prediction;
    doc["lhv_prediction"] = r.lhv_prediction;
    doc["preparation_probability"] = r.preparation_probability;
    doc["readout_probability"] = r.readout_probability;
    doc["all_products_match_qm"] = r.all_products_match_qm();
    doc["verdict"] = r.verdict();
    return render(doc);
}

std::string cmd_probe_sweep(const RunConfig &c) {
    if (!(c.alpha > 0.0)) {
        throw ValidationError("alpha must be > 0");
    }
    if (c.sweep_points < 2) {
        throw ValidationError("sweep_points must be >= 2");
    }
    const FieldState field = make_coherent(2.0 * c.alpha, c.dim);
    const double nbar = 4.0 * c.alpha * c.alpha;
    const double optimal = optimal_probe_time(nbar);
    const double peak = std::round(nbar);
    const double max_gt = 2.0 * optimal;

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < c.sweep_points; ++i) {
        const double gt = max_gt * static_cast<double>(i) / static_cast<double>(c.sweep_points - 1);
        const ProbeBranches b = probe_branches(field, gt);
        const double sharp = std::pow(std::sin(std::sqrt(peak) * gt), 2);
        rows.push_back({gt, b.p_a, b.p_b, sharp});
    }
    const std::vector<std::string> columns{"gt", "p_a", "p_b", "p_a_sharp_peak"};
    if (c.format == "csv") {
        return csv_table("probe-sweep", c, columns, rows);
    }
    json doc = header("probe-sweep", c);
    doc["nbar"] = nbar;
    doc["optimal_gt"] = optimal;
    doc["p_a_at_optimal"] = probe_branches(field, optimal).p_a;
    doc["columns"] = columns;
    doc["rows"] = rows;
    return render(doc);
}

std::string cmd_dispersive_convergence(const RunConfig &c) {
    if (c.delta_over_g.empty()) {
        throw ValidationError("delta_over_g must list at least one value");
    }
    for (const double r : c.delta_over_g) {
        if (!(r >= 10.0)) {
            throw ValidationError("delta_over_g entries must be >= 10, got " + format_double(r));
        }
    }
    if (c.convergence_dim < 2) {
        throw ValidationError("convergence_dim must be >= 2");
    }
    std::vector<std::vector<double>> rows;
    for (const double r : c.delta_over_g) {
        rows.push_back({r, dispersive_distance(r, c.convergence_phi, c.convergence_dim)});
    }
    const std::vector<std::string> columns{"delta_over_g", "distance"};
    if (c.format == "csv") {
        return csv_table("dispersive-convergence", c, columns, rows);
    }
    json doc = header("dispersive-convergence", c);
    doc["columns"] = columns;
    doc["rows"] = rows;
    if (rows.size() >= 2) {
        bool decreasing = true;
        json ratios = json::array();
        for (std::size_t i = 1; i < rows.size(); ++i) {
            decreasing = decreasing && rows[i][1] < rows[i - 1][1];
            ratios.push_back(rows[i - 1][1] / rows[i][1]);
        }
        doc["monotone_decreasing"] = decreasing;
        doc["consecutive_ratios"] = ratios;
    } else {
        doc["monotone_decreasing"] = nullptr;
    }
    return render(doc);
}

} // namespace

KeyValues parse_config_text(std::string_view text) {
    KeyValues out;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": expected key = value");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        if (key.empty()) {
            throw ValidationError("config line " + std::to_string(line_no) + ": empty key");
        }
        out[key] = trim(std::string_view(body).substr(eq + 1));
    }
    return out;
}

KeyValues read_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot read config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

const std::vector<std::string> &config_keys() {
    static const std::vector<std::string> keys{
        "alpha", "dim",    "shots",   "seed",    "gt",     "phi",
        "delta_over_g",    "output",  "mode",    "sign",   "variant",
        "format", "threads", "convergence_dim", "convergence_phi", "sweep_points"};
    return keys;
}

RunConfig resolve_config(const KeyValues &file, const KeyValues &flags) {
    RunConfig c;
    for (const auto &[key, value] : file) {
        apply(c, key, value);
    }
    for (const auto &[key, value] : flags) {
        apply(c, key, value);
    }
    check_common(c);
    return c;
}

KeyValues echo(const RunConfig &c) {
    KeyValues out;
    out["alpha"] = format_double(c.alpha);
    out["dim"] = std::to_string(c.dim);
    out["shots"] = std::to_string(c.shots);
    out["seed"] = std::to_string(c.seed);
    out["gt"] = c.gt_probe ? format_double(*c.gt_probe) : "optimal";
    out["phi"] = format_double(c.phi);
    std::string list;
    for (std::size_t i = 0; i < c.delta_over_g.size(); ++i) {
        list += (i ? "," : "") + format_double(c.delta_over_g[i]);
    }
    out["delta_over_g"] = list;
    out["mode"] = c.mode;
    out["sign"] = c.sign;
    out["variant"] = c.variant;
    out["format"] = c.format;
    out["threads"] = std::to_string(c.threads);
    out["convergence_dim"] = std::to_string(c.convergence_dim);
    out["convergence_phi"] = format_double(c.convergence_phi);
    out["sweep_points"] = std::to_string(c.sweep_points);
    return out;
}

const std::vector<std::string> &commands() {
    static const std::vector<std::string> names{"prepare-epr", "prepare-ghz", "ghz-test",
                                                "probe-sweep", "dispersive-convergence"};
    return names;
}

CommandResult execute(std::string_view command, const RunConfig &config) {
    CommandResult result;
    try {
        if (command == "prepare-epr") {
            result.report = cmd_prepare_epr(config);
        } else if (command == "prepare-ghz") {
            result.report = cmd_prepare_ghz(config);
        } else if (command == "ghz-test") {
            result.report = cmd_ghz_test(config);
        } else if (command == "probe-sweep") {
            result.report = cmd_probe_sweep(config);
        } else if (command == "dispersive-convergence") {
            result.report = cmd_dispersive_convergence(config);
        } else {
            throw ValidationError("unknown command '" + std::string(command) + "'");
        }
    } catch (const ValidationError &e) {
        result.exit_code = kValidation;
        result.error = e.what();
    } catch (const NumericalError &e) {
        result.exit_code = kNumerical;
        result.error = e.what();
    } catch (const Error &e) {
        result.exit_code = kNumerical;
        result.error = e.what();
    }
    return result;
}

} // namespace cqed::cli
