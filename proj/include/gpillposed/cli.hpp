#pragma once

// Command-line front end: configuration (defaults < config file < flags),
// the six commands and their artifacts, and the exit-code contract.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coalescence.hpp"
#include "diagnostics.hpp"
#include "estimation.hpp"
#include "highprec.hpp"
#include "io.hpp"
#include "posterior.hpp"
#include "trace.hpp"

namespace gpill::cli {

using nlohmann::json;

enum ExitCode : int {
    kSuccess = 0,
    kInputError = 1,
    kRuntimeFailure = 2,
    kMConstant = 3,
    kInconclusive = 4,
};

inline constexpr const char* kMConstantVerdict = "m-constant: λ_ML = ∞, predictions degenerate";

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"objective-trace", "estimate",       "flat-limit",
                                                "delta-scan",      "table1",         "hellinger-probe"};
    return names;
}

struct RunConfig {
    std::string command;
    KernelSpec kernel = KernelSpec::matern(MaternNu::ThreeHalves);
    GridSpec grid;
    std::optional<double> delta;
    /// Decimal digits. table1 always runs in MPFR (500 digits when unset);
    /// the other commands switch to extended arithmetic when this is set.
    std::optional<unsigned> digits;
    std::string input;
    std::string output;

    std::string objective = "ml";
    std::vector<double> lambdas;  ///< trace: replaces the grid; flat-limit: curves (1, 10, 100 when empty)
    std::size_t mesh = 101;
    std::optional<double> mesh_min;
    std::optional<double> mesh_max;
    std::vector<double> deltas;  ///< delta-scan grid (default_delta_grid() when empty)
    std::size_t n_max = kConjectureRowCap;
    std::string table_lambda = "1e5";
    std::string compare;  ///< hellinger-probe: second dataset; otherwise perturb by each epsilon
    std::vector<double> epsilons;
    std::optional<std::size_t> perturb_index;
    std::vector<double> x0;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// ---------------------------------------------------------------------------
// Serialization

template <class T>
json optional_to_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

inline json to_json(const RunConfig& c) {
    return {{"command", c.command},
            {"kernel", io::kernel_to_json(c.kernel)},
            {"grid", {{"lambda_min", c.grid.lambda_min}, {"lambda_max", c.grid.lambda_max}, {"points", c.grid.points}}},
            {"delta", optional_to_json(c.delta)},
            {"digits", optional_to_json(c.digits)},
            {"input", c.input},
            {"output", c.output},
            {"objective", c.objective},
            {"lambdas", c.lambdas},
            {"mesh", c.mesh},
            {"mesh_min", optional_to_json(c.mesh_min)},
            {"mesh_max", optional_to_json(c.mesh_max)},
            {"deltas", c.deltas},
            {"n_max", c.n_max},
            {"table_lambda", c.table_lambda},
            {"compare", c.compare},
            {"epsilons", c.epsilons},
            {"perturb_index", optional_to_json(c.perturb_index)},
            {"x0", c.x0}};
}

/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
inline RunConfig overlay_json(RunConfig c, const json& j) {
    if (!j.is_object()) throw io::ParseError("config must be a JSON object");
    static const std::vector<std::string> known{
        "command", "kernel", "grid",   "delta",  "digits",       "input",   "output",
        "objective", "lambdas", "mesh", "mesh_min", "mesh_max", "deltas", "n_max",
        "table_lambda", "compare", "epsilons", "perturb_index", "x0"};
    for (const auto& [key, value] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw io::ParseError("config: unknown key '" + key + "'");

    auto opt = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        using T = typename std::decay_t<decltype(field)>::value_type;
        if (j[key].is_null()) field.reset();
        else field = j[key].template get<T>();
    };
    try {
        if (j.contains("command")) c.command = j["command"].get<std::string>();
        if (j.contains("kernel")) {
            json merged = io::kernel_to_json(c.kernel);
            merged.update(j["kernel"]);
            c.kernel = io::kernel_from_json(merged);
        }
        if (j.contains("grid")) {
            const auto& g = j["grid"];
            if (g.is_string()) {
                c.grid = GridSpec::parse(g.get<std::string>());
            } else {
                c.grid = {g.value("lambda_min", c.grid.lambda_min), g.value("lambda_max", c.grid.lambda_max),
                          g.value("points", c.grid.points)};
                c.grid.validate();
            }
        }
        opt("delta", c.delta);
        opt("digits", c.digits);
        if (j.contains("input")) c.input = j["input"].get<std::string>();
        if (j.contains("output")) c.output = j["output"].get<std::string>();
        if (j.contains("objective")) c.objective = j["objective"].get<std::string>();
        if (j.contains("lambdas")) c.lambdas = j["lambdas"].get<std::vector<double>>();
        if (j.contains("mesh")) c.mesh = j["mesh"].get<std::size_t>();
        opt("mesh_min", c.mesh_min);
        opt("mesh_max", c.mesh_max);
        if (j.contains("deltas")) c.deltas = j["deltas"].get<std::vector<double>>();
        if (j.contains("n_max")) c.n_max = j["n_max"].get<std::size_t>();
        if (j.contains("table_lambda")) c.table_lambda = j["table_lambda"].get<std::string>();
        if (j.contains("compare")) c.compare = j["compare"].get<std::string>();
        if (j.contains("epsilons")) c.epsilons = j["epsilons"].get<std::vector<double>>();
        opt("perturb_index", c.perturb_index);
        if (j.contains("x0")) c.x0 = j["x0"].get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw io::ParseError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw io::ParseError(std::string("config: ") + e.what());
    }
    return c;
}

inline RunConfig from_json(const json& j) { return overlay_json(RunConfig{}, j); }

// ---------------------------------------------------------------------------
// Argument parsing

/// Either a configuration to run or an exit code (help, usage error).
using ParseOutcome = std::variant<RunConfig, int>;

namespace detail {

inline std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::istringstream is(text);
    std::string cell;
    while (std::getline(is, cell, ',')) out.push_back(io::detail::parse_number(io::detail::trim(cell), what));
    return out;
}

}  // namespace detail

inline ParseOutcome parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gaussian process lengthscale estimation diagnostics"};
    app.set_help_all_flag("--help-all");
    std::string command, config_path, family, grid, lambdas, deltas, epsilons, x0;
    double nu = 0, sigma = 0, lengthscale = 0, delta = 0, mesh_min = 0, mesh_max = 0;
    unsigned digits = 0;
    std::size_t mesh = 0, n_max = 0, perturb_index = 0;
    RunConfig flags;

    app.add_option("command", command, "objective-trace | estimate | flat-limit | delta-scan | table1 | hellinger-probe")
        ->required()
        ->check(CLI::IsMember(command_names()));
    app.add_option("--config", config_path, "JSON config; flags override it")->check(CLI::ExistingFile);
    auto* o_kernel = app.add_option("--kernel", family, "matern | gaussian | inverse-quadratic");
    auto* o_nu = app.add_option("--nu", nu, "Matern smoothness: 0.5, 1.5, 2.5 or 3.5");
    auto* o_sigma = app.add_option("--sigma", sigma, "kernel scale sigma");
    auto* o_lengthscale = app.add_option("--lengthscale", lengthscale, "kernel lengthscale (where fixed)");
    auto* o_grid = app.add_option("--grid", grid, "lambda grid MIN:MAX:POINTS");
    auto* o_delta = app.add_option("--delta", delta, "regularisation delta (nugget delta^2)");
    auto* o_digits = app.add_option("--digits", digits, "decimal digits of MPFR arithmetic");
    auto* o_input = app.add_option("--input", flags.input, "dataset (.csv or .json)");
    auto* o_output = app.add_option("--output", flags.output, "output directory");
    auto* o_objective = app.add_option("--objective", flags.objective,
                                       "ml | ml-regularized | cv | cv2 | ml-profiled-sigma | ml-parametric-mean");
    auto* o_lambdas = app.add_option("--lambdas", lambdas, "comma-separated lambda list");
    auto* o_mesh = app.add_option("--mesh", mesh, "query mesh size (flat-limit)");
    auto* o_mesh_min = app.add_option("--mesh-min", mesh_min, "query mesh lower end");
    auto* o_mesh_max = app.add_option("--mesh-max", mesh_max, "query mesh upper end");
    auto* o_deltas = app.add_option("--deltas", deltas, "comma-separated delta list (delta-scan)");
    auto* o_n_max = app.add_option("--n-max", n_max, "largest n (table1)");
    auto* o_table_lambda = app.add_option("--lambda", flags.table_lambda, "lengthscale for table1, decimal");
    auto* o_compare = app.add_option("--compare", flags.compare, "second dataset (hellinger-probe)");
    auto* o_epsilons = app.add_option("--epsilon", epsilons, "comma-separated perturbation sizes (hellinger-probe)");
    auto* o_perturb = app.add_option("--perturb-index", perturb_index, "data index to perturb (hellinger-probe)");
    auto* o_x0 = app.add_option("--x0", x0, "probe point, comma-separated coordinates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kInputError;
    }

    try {
        RunConfig c;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            json j;
            try {
                j = json::parse(in);
            } catch (const json::exception& e) {
                throw io::ParseError(config_path + ": " + e.what());
            }
            c = overlay_json(c, j);
        }
        c.command = command;
        if (o_kernel->count() || o_nu->count() || o_sigma->count() || o_lengthscale->count()) {
            json k = io::kernel_to_json(c.kernel);
            if (o_kernel->count()) k["family"] = family;
            if (o_nu->count()) k["nu"] = nu;
            if (o_sigma->count()) k["sigma"] = sigma;
            if (o_lengthscale->count()) k["lengthscale"] = lengthscale;
            c.kernel = io::kernel_from_json(k);
        }
        if (o_grid->count()) c.grid = GridSpec::parse(grid);
        if (o_delta->count()) c.delta = delta;
        if (o_digits->count()) c.digits = digits;
        if (o_input->count()) c.input = flags.input;
        if (o_output->count()) c.output = flags.output;
        if (o_objective->count()) c.objective = flags.objective;
        if (o_lambdas->count()) c.lambdas = detail::parse_list(lambdas, "--lambdas");
        if (o_mesh->count()) c.mesh = mesh;
        if (o_mesh_min->count()) c.mesh_min = mesh_min;
        if (o_mesh_max->count()) c.mesh_max = mesh_max;
        if (o_deltas->count()) c.deltas = detail::parse_list(deltas, "--deltas");
        if (o_n_max->count()) c.n_max = n_max;
        if (o_table_lambda->count()) c.table_lambda = flags.table_lambda;
        if (o_compare->count()) c.compare = flags.compare;
        if (o_epsilons->count()) c.epsilons = detail::parse_list(epsilons, "--epsilon");
        if (o_perturb->count()) c.perturb_index = perturb_index;
        if (o_x0->count()) c.x0 = detail::parse_list(x0, "--x0");
        return c;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

// ---------------------------------------------------------------------------
// Commands

namespace detail {

/// JSON has no infinity or NaN; those become the strings "inf", "-inf", "nan".
inline json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline json numbers(const std::vector<double>& vs) {
    json out = json::array();
    for (double v : vs) out.push_back(number(v));
    return out;
}

inline Arithmetic arithmetic(const RunConfig& c) {
    return c.digits ? Arithmetic::extended(*c.digits) : Arithmetic{};
}

inline Dataset require_input(const RunConfig& c) {
    if (c.input.empty()) throw io::ParseError("--input is required for " + c.command);
    return io::load_dataset(c.input);
}

/// Writes `content` to output/name, or to `out` when no output directory is set.
class Sink {
public:
    Sink(const RunConfig& c, std::ostream& out) : config_(c), out_(out) {}

    [[nodiscard]] bool to_directory() const { return !config_.output.empty(); }

    void emit(const std::string& name, const std::string& content) {
        if (to_directory()) io::write_file_atomic(std::filesystem::path(config_.output) / name, content);
        else out_ << content;
    }

    /// The resolved configuration, next to the outputs.
    void finish() {
        if (to_directory())
            io::write_file_atomic(std::filesystem::path(config_.output) / "config.json",
                                  to_json(config_).dump(2) + "\n");
    }

private:
    const RunConfig& config_;
    std::ostream& out_;
};

inline json estimate_to_json(const EstimateResult& r) {
    json j{{"status", std::string(r.status())}};
    if (r.is_finite()) {
        j["lambda_star"] = r.finite().lambda_star;
        j["objective_value"] = number(r.finite().objective_value);
    } else if (r.diverges()) {
        const auto& d = std::get<verdict::DivergesToInfinity>(r.verdict);
        j["lambda_star"] = "inf";
        j["tail_lambdas"] = d.tail_lambdas;
        j["tail_values"] = numbers(d.tail_values);
    } else {
        j["reason"] = std::get<verdict::Inconclusive>(r.verdict).reason;
    }
    j["evaluable_points"] = r.trace.finite_count();
    return j;
}

inline std::string trace_csv(const ObjectiveTrace& t) {
    std::ostringstream os;
    write_trace_csv(os, t);
    return os.str();
}

/// Constancy test matching the objective: the generalized test when the
/// mean is a basis still to be fitted, the plain test otherwise. Empty when
/// the objective is regularised (a nugget keeps the estimate finite).
inline std::optional<ConstancyReport> constancy_for(const ObjectiveKind& kind, const Dataset& data) {
    if (std::holds_alternative<objective::MLRegularized>(kind)) return std::nullopt;
    if (const auto* pm = std::get_if<objective::MLParametricMean>(&kind); pm && pm->delta > 0.0)
        return std::nullopt;
    if (!mean_resolved(data.mean())) {
        const auto& b = std::get<BasisMean>(data.mean());
        if (data.size() < static_cast<Eigen::Index>(b.basis.size()) + 1) return std::nullopt;
        return check_generalized_constant(data);
    }
    return check_m_constant(data);
}

}  // namespace detail

inline int cmd_objective_trace(RunConfig c, std::ostream& out) {
    const Dataset data = detail::require_input(c);
    const ObjectiveKind kind = objective_from_name(c.objective, c.delta.value_or(0.0));
    const auto lambdas = c.lambdas.empty() ? c.grid.lambdas() : c.lambdas;
    const ObjectiveTrace t = objective_trace(kind, c.kernel, data, lambdas, detail::arithmetic(c));
    detail::Sink sink(c, out);
    sink.emit("trace.csv", detail::trace_csv(t));
    sink.finish();
    if (sink.to_directory())
        out << objective_name(kind) << ": " << t.finite_count() << " of " << t.size()
            << " lambdas evaluable; wrote " << (std::filesystem::path(c.output) / "trace.csv").string() << '\n';
    return kSuccess;
}

inline int cmd_estimate(RunConfig c, std::ostream& out, std::ostream& err) {
    const Dataset data = detail::require_input(c);
    const ObjectiveKind kind = objective_from_name(c.objective, c.delta.value_or(0.0));
    detail::Sink sink(c, out);
    json report{{"objective", objective_name(kind)}, {"kernel", io::kernel_to_json(c.kernel)}};

    if (const auto constancy = detail::constancy_for(kind, data); constancy && constancy->is_constant) {
        report["status"] = "m-constant";
        report["verdict"] = kMConstantVerdict;
        report["shift_c"] = *constancy->shift_c;
        report["residual"] = constancy->residual;
        if (constancy->non_unique) report["non_unique"] = true;
        if (constancy->beta_star)
            report["beta_star"] = std::vector<double>(constancy->beta_star->begin(), constancy->beta_star->end());
        // Degenerate prediction: mean m(x) + c with zero variance everywhere.
        const Dataset resolved =
            constancy->beta_star
                ? data.with_mean(BasisMean{std::get<BasisMean>(data.mean()).basis, *constancy->beta_star})
                : data;
        const auto m = flat_limit_moments(resolved, *constancy->shift_c, resolved.points());
        report["prediction"] = {{"lambda", "inf"},
                                {"variance", 0.0},
                                {"mean_at_data", std::vector<double>(m.mean.begin(), m.mean.end())}};
        sink.emit("estimate.json", report.dump(2) + "\n");
        sink.finish();
        if (sink.to_directory()) out << report.dump(2) << '\n';
        err << kMConstantVerdict << '\n';
        return kMConstant;
    }

    const EstimateResult r = grid_minimize(kind, c.kernel, data, c.grid, detail::arithmetic(c));
    report.update(detail::estimate_to_json(r));
    if (sink.to_directory()) sink.emit("trace.csv", detail::trace_csv(r.trace));
    sink.emit("estimate.json", report.dump(2) + "\n");
    sink.finish();
    if (sink.to_directory()) out << report.dump(2) << '\n';
    if (r.inconclusive()) {
        err << "inconclusive: " << std::get<verdict::Inconclusive>(r.verdict).reason << '\n';
        return kInconclusive;
    }
    return kSuccess;
}

inline int cmd_flat_limit(RunConfig c, std::ostream& out, std::ostream& err) {
    const Dataset data = detail::require_input(c);
    if (data.dimension() != 1) throw std::invalid_argument("flat-limit builds a one-dimensional query mesh");
    if (c.mesh < 1) throw std::invalid_argument("--mesh must be at least 1");
    if (c.lambdas.empty()) c.lambdas = {1.0, 10.0, 100.0};
    if (!c.mesh_min) c.mesh_min = data.points().col(0).minCoeff();
    if (!c.mesh_max) c.mesh_max = data.points().col(0).maxCoeff();
    const double delta = c.delta.value_or(0.0);
    const Eigen::MatrixXd queries = linspace_1d(*c.mesh_min, *c.mesh_max, static_cast<Eigen::Index>(c.mesh));
    const Arithmetic arith = detail::arithmetic(c);

    std::ostringstream csv;
    csv << "lambda,x,mean,variance,status\n" << std::setprecision(17);
    for (double lam : c.lambdas) {
        try {
            const auto m = posterior_moments(c.kernel.with_lengthscale(lam), data, delta, queries, arith);
            for (Eigen::Index j = 0; j < queries.rows(); ++j)
                csv << lam << ',' << queries(j, 0) << ',' << m.mean(j) << ',' << m.variance(j) << ",ok\n";
        } catch (const NotPositiveDefinite&) {
            for (Eigen::Index j = 0; j < queries.rows(); ++j)
                csv << lam << ',' << queries(j, 0) << ",nan,nan,not_positive_definite\n";
        }
    }

    if (delta > 0.0) {
        // K -> sigma^2 11^T + delta^2 I: the unit-kernel limit with delta / sigma, variance scaled by sigma^2.
        const double s2 = c.kernel.variance();
        for (Eigen::Index j = 0; j < queries.rows(); ++j) {
            const auto m = regularized_flat_limit(delta / c.kernel.sigma(), data, queries.row(j).transpose());
            csv << "inf," << queries(j, 0) << ',' << m.mean << ',' << s2 * m.variance << ",flat-limit\n";
        }
    } else if (mean_resolved(data.mean())) {
        const auto constancy = check_m_constant(data);
        if (constancy.is_constant) {
            const auto m = flat_limit_moments(data, *constancy.shift_c, queries);
            for (Eigen::Index j = 0; j < queries.rows(); ++j)
                csv << "inf," << queries(j, 0) << ',' << m.mean(j) << ",0,flat-limit\n";
        } else {
            err << "note: data are not m-constant, so there is no degenerate lambda = inf line\n";
        }
    }

    detail::Sink sink(c, out);
    sink.emit("flat_limit.csv", csv.str());
    sink.finish();
    if (sink.to_directory())
        out << "wrote " << (std::filesystem::path(c.output) / "flat_limit.csv").string() << '\n';
    return kSuccess;
}

inline int cmd_delta_scan(RunConfig c, std::ostream& out) {
    const Dataset data = detail::require_input(c);
    if (c.deltas.empty()) c.deltas = default_delta_grid();
    const DeltaScan scan = delta_scan(c.kernel, data, c.deltas, c.grid, detail::arithmetic(c));
    std::ostringstream csv;
    write_delta_scan_csv(csv, scan);
    detail::Sink sink(c, out);
    sink.emit("delta_scan.csv", csv.str());
    sink.finish();
    if (sink.to_directory()) {
        out << "delta_infinity = ";
        if (scan.delta_infinity) out << std::setprecision(17) << *scan.delta_infinity;
        else out << "none on this grid";
        out << '\n';
    }
    return kSuccess;
}

inline int cmd_table1(RunConfig c, std::ostream& out) {
    if (!c.digits) c.digits = PrecisionContext::kDefaultDigits;
    const PrecisionContext ctx(*c.digits);
    const BigReal lambda(c.table_lambda, ctx);
    const auto rows = verify_conjecture(c.n_max, lambda, ctx);
    std::ostringstream text;
    write_conjecture_table(text, rows);
    std::ostringstream csv;
    write_conjecture_csv(csv, rows);
    detail::Sink sink(c, out);
    if (sink.to_directory()) {
        sink.emit("table1.txt", text.str());
        sink.emit("table1.csv", csv.str());
        sink.finish();
    }
    out << text.str();
    return kSuccess;
}

inline int cmd_hellinger_probe(RunConfig c, std::ostream& out) {
    const Dataset a = detail::require_input(c);
    const Arithmetic arith = detail::arithmetic(c);
    if (c.x0.empty()) {
        if (a.dimension() != 1 || a.size() < 2)
            throw std::invalid_argument("--x0 is required unless the data are one-dimensional with n >= 2");
        std::vector<double> xs(a.points().col(0).begin(), a.points().col(0).end());
        std::sort(xs.begin(), xs.end());
        c.x0 = {0.5 * (xs[0] + xs[1])};
    }
    if (static_cast<Eigen::Index>(c.x0.size()) != a.dimension())
        throw std::invalid_argument("--x0 must have the data dimension");
    const Point x0 = Eigen::Map<const Eigen::VectorXd>(c.x0.data(), static_cast<Eigen::Index>(c.x0.size()));

    auto side = [](const ProbeSide& s) {
        return json{{"source", s.source},
                    {"lambda_used", detail::number(s.lambda_used)},
                    {"mean", s.predictive.mean},
                    {"variance", s.predictive.variance},
                    {"estimate", std::string(s.estimate.status())}};
    };
    auto probe_json = [&](const LipschitzProbe& p) {
        return json{{"distance", p.distance},
                    {"data_distance", p.data_distance},
                    {"quotient", detail::number(p.quotient)},
                    {"a", side(p.a)},
                    {"b", side(p.b)}};
    };

    json report{{"x0", c.x0}, {"kernel", io::kernel_to_json(c.kernel)}};
    if (!c.compare.empty()) {
        const Dataset b = io::load_dataset(c.compare);
        report["probes"] = json::array({probe_json(lipschitz_probe(c.kernel, a, b, x0, c.grid, arith))});
    } else {
        if (c.epsilons.empty()) c.epsilons = {0.1, 0.01, 0.001};
        if (!c.perturb_index) c.perturb_index = static_cast<std::size_t>(a.size() / 2);
        if (static_cast<Eigen::Index>(*c.perturb_index) >= a.size())
            throw std::invalid_argument("--perturb-index is out of range");
        report["perturb_index"] = *c.perturb_index;
        json probes = json::array();
        for (double eps : c.epsilons) {
            Eigen::VectorXd y = a.values();
            y(static_cast<Eigen::Index>(*c.perturb_index)) += eps;
            json p = probe_json(lipschitz_probe(c.kernel, a, a.with_values(y), x0, c.grid, arith));
            p["epsilon"] = eps;
            probes.push_back(p);
        }
        report["probes"] = probes;
    }
    detail::Sink sink(c, out);
    sink.emit("probe.json", report.dump(2) + "\n");
    sink.finish();
    if (sink.to_directory()) out << report.dump(2) << '\n';
    return kSuccess;
}

/// Dispatches one command and maps failures onto the exit-code contract:
/// input, parse and configuration errors give 1, anything else 2.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        if (c.command == "objective-trace") return cmd_objective_trace(c, out);
        if (c.command == "estimate") return cmd_estimate(c, out, err);
        if (c.command == "flat-limit") return cmd_flat_limit(c, out, err);
        if (c.command == "delta-scan") return cmd_delta_scan(c, out);
        if (c.command == "table1") return cmd_table1(c, out);
        if (c.command == "hellinger-probe") return cmd_hellinger_probe(c, out);
        err << "error: unknown command '" << c.command << "'\n";
        return kInputError;
    } catch (const io::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const InsufficientPrecision& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "error (" << c.command << "): " << e.what() << '\n';
        return kRuntimeFailure;
    }
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    const ParseOutcome parsed = parse_args(argc, argv, out, err);
    if (const int* code = std::get_if<int>(&parsed)) return *code;
    return run(std::get<RunConfig>(parsed), out, err);
}

}  // namespace gpill::cli
