// ztot: command-line front end. One command per invocation; reports go to
// --out or stdout, diagnostics to stderr.
//
// Exit status: 0 ok, 1 malformed input or usage, 2 invariant violation,
// 3 non-convergence, 4 capacity limit.

#include "ztot/annealing.hpp"
#include "ztot/deviations.hpp"
#include "ztot/duality.hpp"
#include "ztot/errors.hpp"
#include "ztot/oracle.hpp"
#include "ztot/potentials.hpp"
#include "ztot/problem.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using json = nlohmann::ordered_json;
using namespace ztot;

constexpr const char* kVersion = "0.1.0";
constexpr int kFormatVersion = 1;

enum Exit { kOk = 0, kUsage = 1, kInvariant = 2, kNoConvergence = 3, kCapacity = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string problem;
    double beta = 1.0;
    double betaMax = 16384.0;
    double factor = 2.0;
    double tol = 1e-10;
    std::string out;
    std::string format;
    bool noTriangleCheck = false;
    long oracleCap = OracleLimits{}.maxVertexNodes;
};

// --- output ---------------------------------------------------------------

// nlohmann prints the shortest round-trip form; reports use a fixed 17
// significant digits so the bytes depend only on the values.
void write_value(std::ostream& os, const json& v, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    switch (v.type()) {
        case json::value_t::object: {
            if (v.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) os << ",\n";
                first = false;
                os << pad << json(it.key()).dump() << ": ";
                write_value(os, it.value(), indent + 2);
            }
            os << "\n" << close << "}";
            return;
        }
        case json::value_t::array: {
            // Arrays of scalars stay on one line.
            bool flat = true;
            for (const auto& e : v) flat = flat && !e.is_structured();
            if (v.empty()) {
                os << "[]";
            } else if (flat) {
                os << "[";
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i) os << ", ";
                    write_value(os, v[i], indent);
                }
                os << "]";
            } else {
                os << "[\n";
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i) os << ",\n";
                    os << pad;
                    write_value(os, v[i], indent + 2);
                }
                os << "\n" << close << "]";
            }
            return;
        }
        case json::value_t::number_float: {
            const double d = v.get<double>();
            if (!std::isfinite(d)) {
                os << "null";
                return;
            }
            if (d == 0.0) {  // no "-0"
                os << "0";
                return;
            }
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", d);
            os << buf;
            return;
        }
        default:
            os << v.dump();
    }
}

json to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json to_json(const Matrix& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vector(m.row(i).transpose())));
    return a;
}

class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw UsageError("cannot open output file '" + path + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void emit_json(const json& doc, const std::string& path) {
    Sink sink(path);
    write_value(sink.stream(), doc, 0);
    sink.stream() << "\n";
}

// --- commands ----------------------------------------------------------------

SolveOptions solve_options(const Config& cfg) {
    SolveOptions opts;
    opts.tol = cfg.tol;
    return opts;
}

AnnealOptions anneal_options(const Config& cfg) {
    AnnealOptions opts;
    opts.solve = solve_options(cfg);
    opts.oracle.maxVertexNodes = cfg.oracleCap;
    return opts;
}

Trajectory run_anneal(const TransportProblem& prob, const Config& cfg) {
    const Schedule schedule = default_schedule(cfg.betaMax, cfg.factor);
    spdlog::info("annealing over {} values of beta up to {}", schedule.size(), cfg.betaMax);
    Trajectory traj = anneal(prob, schedule, anneal_options(cfg));
    for (const auto& r : traj.records) {
        spdlog::debug("beta={} iterations={} newton={} residual={}", r.beta, r.report.iterations,
                      r.report.newtonSteps, r.report.residual);
    }
    if (!traj.mAExact) spdlog::warn("problem exceeds the oracle cap; m(A) is a dual upper bound");
    return traj;
}

void require_format(const Config& cfg, std::initializer_list<const char*> allowed) {
    for (const char* f : allowed)
        if (cfg.format == f) return;
    std::string list;
    for (const char* f : allowed) list += (list.empty() ? "" : ", ") + std::string(f);
    throw UsageError("--format " + cfg.format + " is not available for this command (use " + list + ")");
}

int cmd_solve(const TransportProblem& prob, const Config& cfg) {
    require_format(cfg, {"json"});
    const auto res = schrodinger_solve(prob, cfg.beta, solve_options(cfg));
    spdlog::info("solved at beta={} in {} sweeps ({} Newton), residual {}", cfg.beta, res.report.iterations,
                 res.report.newtonSteps, res.report.residual);
    const TransportPlan plan = gibbs_plan(prob, res.pair);
    json doc;
    doc["command"] = "solve";
    doc["beta"] = cfg.beta;
    doc["phi"] = to_json(res.pair.phi);
    doc["psi"] = to_json(res.pair.psi);
    doc["gauge"] = "max_phi_zero";
    doc["l"] = res.pair.l;
    doc["residual"] = res.report.residual;
    doc["iterations"] = res.report.iterations;
    doc["pressure"] = pressure(prob, res.pair);
    doc["entropy"] = relative_entropy(plan, prob.mu, prob.nu).value();
    doc["cost"] = linear_cost(plan, prob.cost);
    doc["planResidual"] = plan.max_residual();
    doc["plan"] = to_json(plan.p());
    emit_json(doc, cfg.out);
    return kOk;
}

json limit_json(const Config& cfg, const Trajectory& traj, const ZeroTempResult& limit) {
    json doc;
    doc["command"] = "anneal";
    doc["betaMax"] = cfg.betaMax;
    doc["factor"] = cfg.factor;
    doc["beta"] = limit.beta;
    doc["mA"] = traj.mA;
    doc["mAExact"] = traj.mAExact;
    doc["finalExcess"] = traj.records.back().excess;
    doc["converged"] = limit.converged;
    doc["phiDelta"] = limit.phiDelta;
    doc["psiDelta"] = limit.psiDelta;
    doc["planDelta"] = limit.planDelta;
    doc["hMaxEstimate"] = limit.hMaxEstimate;
    doc["entropyConsistent"] = limit.entropyConsistent;
    doc["phi"] = to_json(limit.phi);
    doc["psi"] = to_json(limit.psi);
    doc["rawPsi"] = to_json(limit.rawPsi);
    doc["plan"] = to_json(limit.plan.p());
    return doc;
}

int cmd_anneal(const TransportProblem& prob, const Config& cfg) {
    require_format(cfg, {"json", "csv"});
    const Trajectory traj = run_anneal(prob, cfg);
    const ZeroTempResult limit = extract_limit(prob, traj);
    if (!limit.converged) spdlog::warn("zero-temperature limit not converged at beta={}", limit.beta);
    const json doc = limit_json(cfg, traj, limit);

    if (cfg.out.empty()) {
        if (cfg.format == "csv") write_trajectory_csv(std::cout, traj);
        else emit_json(doc, "");
        return kOk;
    }
    // With --out both artifacts are written, side by side.
    std::filesystem::path base(cfg.out);
    const std::string csvPath = std::filesystem::path(base).replace_extension(".csv").string();
    const std::string jsonPath = std::filesystem::path(base).replace_extension(".json").string();
    {
        Sink sink(csvPath);
        write_trajectory_csv(sink.stream(), traj);
    }
    emit_json(doc, jsonPath);
    spdlog::info("wrote {} and {}", csvPath, jsonPath);
    return kOk;
}

int cmd_duality(const TransportProblem& prob, const Config& cfg) {
    require_format(cfg, {"json"});
    const Trajectory traj = run_anneal(prob, cfg);
    const ZeroTempResult limit = extract_limit(prob, traj);
    const Certificate cert = certify(prob, limit);
    json doc;
    doc["command"] = "duality";
    doc["beta"] = limit.beta;
    doc["primalValue"] = cert.primalValue;
    doc["dualValue"] = cert.dualValue;
    doc["gap"] = cert.gap;
    doc["feasible"] = cert.feasible;
    doc["conjugate"] = cert.conjugate;
    doc["conjugacyError"] = cert.conjugacyError;
    doc["converged"] = limit.converged;
    if (prob.is_distance_cost()) {
        try {
            doc["krValue"] = kr_value(prob, limit.phi);
            doc["krAntisymmetric"] = kr_antisymmetry_check(limit.phi, limit.psi, 1e-3);
        } catch (const InvariantError& e) {
            spdlog::warn("Kantorovich-Rubinstein value skipped: {}", e.what());
            doc["krValue"] = nullptr;
        }
    }
    doc["phi"] = to_json(limit.phi);
    doc["psi"] = to_json(limit.psi);
    doc["plan"] = to_json(limit.plan.p());
    emit_json(doc, cfg.out);
    return kOk;
}

int cmd_ldp(const TransportProblem& prob, const Config& cfg) {
    require_format(cfg, {"csv"});
    const Trajectory traj = run_anneal(prob, cfg);
    const RateFunction rate = rate_function(prob, extract_limit(prob, traj));
    spdlog::info("rate error at beta={}: {}", traj.records.back().beta, rate_error(traj.records.back(), rate));
    Sink sink(cfg.out);
    write_rate_csv(sink.stream(), traj, rate);
    return kOk;
}

int cmd_pressure_curve(const TransportProblem& prob, const Config& cfg) {
    require_format(cfg, {"csv"});
    const Trajectory traj = run_anneal(prob, cfg);
    Sink sink(cfg.out);
    auto& os = sink.stream();
    os << "beta,excess\n";
    char buf[64];
    for (const auto& p : pressure_excess(traj)) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.beta, p.excess);
        os << buf;
    }
    return kOk;
}

int cmd_oracle(const TransportProblem& prob, const Config& cfg) {
    require_format(cfg, {"json"});
    OracleLimits limits;
    limits.maxVertexNodes = cfg.oracleCap;
    const OracleResult res = exact_ot(prob.mu, prob.nu, prob.cost.c(), limits);
    const TransportPlan best = max_entropy_optimal(res, prob.mu, prob.nu);
    json doc;
    doc["command"] = "oracle";
    doc["method"] = to_string(res.method);
    doc["alpha"] = res.alpha;
    doc["mA"] = res.mA;
    doc["vertexCount"] = res.optimalVertices.size();
    json verts = json::array();
    for (const auto& v : res.optimalVertices) verts.push_back(to_json(v.p()));
    doc["optimalVertices"] = verts;
    doc["maxEntropy"] = relative_entropy(best, prob.mu, prob.nu).value();
    doc["maxEntropyPlan"] = to_json(best.p());
    emit_json(doc, cfg.out);
    return kOk;
}

int cmd_validate(const TransportProblem& prob, const Config& cfg) {
    require_format(cfg, {"json"});
    json doc;
    doc["command"] = "validate";
    doc["valid"] = true;
    doc["rows"] = prob.rows();
    doc["cols"] = prob.cols();
    doc["sameSpace"] = prob.sameSpace;
    doc["distanceCost"] = prob.is_distance_cost();
    doc["lipA"] = prob.cost.lip_payoff();
    doc["diameterX"] = prob.x.diameter();
    doc["oracleApplicable"] = oracle_applicable(prob.mu, prob.nu, OracleLimits{8, cfg.oracleCap});
    emit_json(doc, cfg.out);
    return kOk;
}

void configure_logging() {
    auto logger = spdlog::stderr_logger_st("ztot");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%Y-%m-%d %H:%M:%S.%e] [%l] %v");
    spdlog::set_level(spdlog::level::warn);
    const char* env = std::getenv("ZT_LOG_LEVEL");
    if (env == nullptr || *env == '\0') return;
    const std::string level(env);
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "warn") spdlog::set_level(spdlog::level::warn);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else throw UsageError("ZT_LOG_LEVEL must be one of error, warn, info, debug (got '" + level + "')");
}

void validate_config(const Config& cfg, const std::string& command) {
    if (!(cfg.tol > 0.0)) throw UsageError("--tol must be positive");
    if (command == "solve" && !(cfg.beta > 0.0)) throw UsageError("--beta must be positive");
    if (!(cfg.betaMax > 1.0)) throw UsageError("--beta-max must exceed 1");
    if (!(cfg.factor > 1.0)) throw UsageError("--factor must exceed 1");
    if (cfg.oracleCap < 2) throw UsageError("--oracle-cap must be at least 2");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropic optimal transport on finite metric spaces"};
    app.require_subcommand(1);
    Config cfg;

    auto add_common = [&](CLI::App* sub, const char* defaultFormat) {
        sub->add_option("problem", cfg.problem, "Problem file (JSON)")->required();
        sub->add_option("--tol", cfg.tol, "Solver residual tolerance")->capture_default_str();
        sub->add_option("--out", cfg.out, "Output path (default: stdout)");
        sub->add_option("--format", cfg.format, "Output format: json or csv")
            ->check(CLI::IsMember({"json", "csv"}))
            ->default_str(defaultFormat);
        sub->add_flag("--no-triangle-check", cfg.noTriangleCheck, "Skip the triangle inequality check on input");
        sub->add_option("--oracle-cap", cfg.oracleCap, "Largest n + m handed to the exact oracle")
            ->capture_default_str();
    };
    auto add_schedule = [&](CLI::App* sub) {
        sub->add_option("--beta-max", cfg.betaMax, "Final inverse temperature")->capture_default_str();
        sub->add_option("--factor", cfg.factor, "Geometric schedule ratio")->capture_default_str();
    };

    std::map<std::string, std::pair<CLI::App*, const char*>> commands;
    auto solve = app.add_subcommand("solve", "Schroedinger potentials, Gibbs plan and pressure at one beta");
    add_common(solve, "json");
    solve->add_option("--beta", cfg.beta, "Inverse temperature")->capture_default_str();
    commands["solve"] = {solve, "json"};

    auto annealCmd = app.add_subcommand("anneal", "Trajectory CSV and zero-temperature limit JSON");
    add_common(annealCmd, "json");
    add_schedule(annealCmd);
    commands["anneal"] = {annealCmd, "json"};

    auto duality = app.add_subcommand("duality", "Primal/dual certificate at the zero-temperature limit");
    add_common(duality, "json");
    add_schedule(duality);
    commands["duality"] = {duality, "json"};

    auto ldp = app.add_subcommand("ldp", "Empirical rate r_beta against I = c - phi - psi (CSV)");
    add_common(ldp, "csv");
    add_schedule(ldp);
    commands["ldp"] = {ldp, "csv"};

    auto curve = app.add_subcommand("pressure-curve", "(beta, excess) along the schedule (CSV)");
    add_common(curve, "csv");
    add_schedule(curve);
    commands["pressure-curve"] = {curve, "csv"};

    auto oracle = app.add_subcommand("oracle", "Exact optimal cost, optimal vertices, max-entropy plan");
    add_common(oracle, "json");
    commands["oracle"] = {oracle, "json"};

    auto validate = app.add_subcommand("validate", "Check the input invariants and exit");
    add_common(validate, "json");
    commands["validate"] = {validate, "json"};

    auto version = app.add_subcommand("version", "Print artifact and format versions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (version->parsed()) {
        std::printf("ztot %s (problem format %d)\n", kVersion, kFormatVersion);
        return kOk;
    }

    std::string command;
    for (const auto& [name, entry] : commands) {
        if (entry.first->parsed()) {
            command = name;
            if (cfg.format.empty()) cfg.format = entry.second;
        }
    }

    try {
        configure_logging();
        validate_config(cfg, command);
        LoadOptions load;
        load.checkTriangle = !cfg.noTriangleCheck;
        const TransportProblem prob = load_problem(cfg.problem, load);
        spdlog::info("loaded {} ({} x {})", cfg.problem, prob.rows(), prob.cols());

        if (command == "solve") return cmd_solve(prob, cfg);
        if (command == "anneal") return cmd_anneal(prob, cfg);
        if (command == "duality") return cmd_duality(prob, cfg);
        if (command == "ldp") return cmd_ldp(prob, cfg);
        if (command == "pressure-curve") return cmd_pressure_curve(prob, cfg);
        if (command == "oracle") return cmd_oracle(prob, cfg);
        return cmd_validate(prob, cfg);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "ztot: %s\n", e.what());
        return kUsage;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "ztot: parse error: %s\n", e.what());
        return kUsage;
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "ztot: no convergence: %s\n", e.what());
        return kNoConvergence;
    } catch (const CapacityError& e) {
        std::fprintf(stderr, "ztot: capacity: %s\n", e.what());
        return kCapacity;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "ztot: invariant violation: %s\n", e.what());
        return kInvariant;
    }
}
