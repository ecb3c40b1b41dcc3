#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace ctxauth::cli {

Evaluation evaluate(const scenario::Scenario& sc) {
    Evaluation e{scenario::run(sc), {}};
    e.summary = metrics::summarize(
        e.run.trace, {sc.name, sc.mode, sc.lease_ms, sc.seed, sc.jitter.hi - sc.jitter.lo, e.run.end});
    return e;
}

int exit_code(const metrics::Summary& summary) {
    return summary.violations == 0 ? kOk : kViolation;
}

Comparison compare_modes(const scenario::Scenario& base) {
    Comparison c;
    std::ostringstream out;
    out << std::left << std::setw(8) << "mode" << std::right << std::setw(16) << "reaction_max_ms" << std::setw(19)
        << "reaction_median_ms" << std::setw(10) << "auth_msgs" << std::setw(8) << "leaks" << std::setw(12)
        << "violations" << '\n';
    for (auto mode : {authz::AuthMode::Static, authz::AuthMode::QuasiStatic, authz::AuthMode::Dynamic}) {
        auto sc = base;
        sc.mode = mode;
        const auto s = evaluate(sc).summary;
        out << std::left << std::setw(8) << authz::to_string(mode) << std::right << std::setw(16)
            << s.reaction_max_ms << std::setw(19) << s.reaction_median_ms << std::setw(10)
            << s.messages.authorization_messages << std::setw(8) << s.leaked_deliveries << std::setw(12)
            << s.violations << '\n';
        c.violations += s.violations;
    }
    c.table = out.str();
    return c;
}

namespace {

bool write_file(const std::string& path, const std::string& text, std::ostream& err) {
    std::ofstream f(path);
    if (!f) {
        err << "error: cannot write '" << path << "'\n";
        return false;
    }
    f << text;
    return true;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Run a context-aware authorization scenario in the simulator", "ctxauth"};
    std::string scenario_path;
    std::string mode_text;
    std::optional<Ms> lease;
    std::optional<std::uint64_t> seed;
    std::string jitter_text;
    std::string trace_out;
    std::string metrics_out;
    bool compare = false;
    app.add_option("--scenario", scenario_path, "Scenario file (YAML)")->required();
    app.add_option("--mode", mode_text, "static | quasi | dynamic (overrides the scenario)");
    app.add_option("--lease-ms", lease, "Lease duration in ms for quasi-static mode");
    app.add_option("--seed", seed, "Seed for the jitter generator and key material");
    app.add_option("--jitter-ms", jitter_text, "Jitter bounds as lo,hi in ms");
    app.add_option("--trace-out", trace_out, "Write the event trace here");
    app.add_option("--metrics-out", metrics_out, "Write the metrics summary (YAML) here");
    app.add_flag("--compare", compare, "Run static, quasi and dynamic side by side");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    scenario::Overrides o;
    if (!mode_text.empty()) {
        o.mode = authz::parse_mode(mode_text);
        if (!o.mode) {
            err << "error: unknown mode '" << mode_text << "' (static, quasi, dynamic)\n";
            return kUsage;
        }
    }
    o.lease_ms = lease;
    o.seed = seed;
    if (!jitter_text.empty()) {
        sim::JitterBounds j;
        char comma = 0;
        std::istringstream in(jitter_text);
        if (!(in >> j.lo >> comma >> j.hi) || comma != ',' || !in.eof()) {
            err << "error: --jitter-ms expects lo,hi\n";
            return kUsage;
        }
        o.jitter = j;
    }

    scenario::Scenario sc;
    try {
        sc = scenario::apply(scenario::load_scenario(scenario_path), o);
    } catch (const scenario::ScenarioError& e) {
        err << scenario_path << ":" << e.line() << ": error: " << e.message() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    for (const auto& w : scenario::warnings(sc)) err << scenario_path << ": warning: " << w << '\n';

    if (compare) {
        const auto c = compare_modes(sc);
        out << c.table;
        return c.violations == 0 ? kOk : kViolation;
    }

    const auto e = evaluate(sc);
    if (!trace_out.empty() && !write_file(trace_out, e.run.trace.render(), err)) return kUsage;
    if (!metrics_out.empty() && !write_file(metrics_out, metrics::to_yaml(e.summary), err)) return kUsage;
    out << metrics::to_key_value(e.summary);
    for (const auto& v : e.summary.violation_messages) err << "violation: " << v << '\n';
    return exit_code(e.summary);
}

} // namespace ctxauth::cli
