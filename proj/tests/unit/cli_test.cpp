#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace ctxauth::cli {
namespace {

const std::string kSmartHome = std::string(CTXAUTH_SOURCE_DIR) + "/scenarios/smart_home.yaml";

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "ctxauth");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::map<std::string, std::string> key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << content;
    return p;
}

TEST(Cli, DynamicRunIsCleanAndLeakFree) {
    const auto r = invoke({"--scenario", kSmartHome, "--mode", "dynamic"});
    EXPECT_EQ(r.code, kOk) << r.err;
    const auto kv = key_values(r.out);
    EXPECT_EQ(kv.at("leaked_deliveries"), "0");
    EXPECT_EQ(kv.at("violations"), "0");
}

TEST(Cli, QuasiRunReportsLeaks) {
    const auto r = invoke({"--scenario", kSmartHome, "--mode", "quasi", "--lease-ms", "60000"});
    EXPECT_EQ(r.code, kOk) << r.err;
    EXPECT_GT(std::stoi(key_values(r.out).at("leaked_deliveries")), 0);
}

TEST(Cli, MalformedScenarioIsUsageErrorWithLine) {
    const auto bad = temp_file("ctxauth_bad.yaml", "name: \"x\"\nseed: 1\nmode: [\n");
    const auto r = invoke({"--scenario", bad.string()});
    EXPECT_EQ(r.code, kUsage);
    EXPECT_NE(r.err.find(bad.string() + ":"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find(": error: "), std::string::npos) << r.err;
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(invoke({}).code, kUsage);
    EXPECT_EQ(invoke({"--scenario", kSmartHome, "--mode", "sometimes"}).code, kUsage);
    EXPECT_EQ(invoke({"--scenario", kSmartHome, "--jitter-ms", "5"}).code, kUsage);
    EXPECT_EQ(invoke({"--scenario", "/nonexistent/file.yaml"}).code, kUsage);
    EXPECT_EQ(invoke({"--help"}).code, kOk);
}

TEST(Cli, ViolationsMapToExitOne) {
    metrics::Summary s;
    EXPECT_EQ(exit_code(s), kOk);
    s.violations = 1;
    EXPECT_EQ(exit_code(s), kViolation);
}

TEST(Cli, LeaseBelowFloorWarns) {
    const auto r = invoke({"--scenario", kSmartHome, "--mode", "quasi", "--lease-ms", "30000"});
    EXPECT_EQ(r.code, kOk);
    EXPECT_NE(r.err.find("warning:"), std::string::npos);
}

TEST(Cli, WritesTraceAndMetricsFiles) {
    const auto dir = std::filesystem::temp_directory_path();
    const auto trace = (dir / "ctxauth_cli.trace").string();
    const auto metrics = (dir / "ctxauth_cli.yaml").string();
    const auto r = invoke({"--scenario", kSmartHome, "--trace-out", trace, "--metrics-out", metrics});
    ASSERT_EQ(r.code, kOk);
    std::ifstream t(trace);
    std::string first;
    std::getline(t, first);
    EXPECT_EQ(first.rfind("t=0 seq=", 0), 0u) << first;
    std::ifstream m(metrics);
    std::stringstream ms;
    ms << m.rdbuf();
    EXPECT_NE(ms.str().find("leaked_deliveries: 0"), std::string::npos);
}

TEST(Compare, ModesOrderAsExpected) {
    const auto sc = scenario::load_scenario(kSmartHome);
    std::map<authz::AuthMode, metrics::Summary> by_mode;
    for (auto mode : {authz::AuthMode::Static, authz::AuthMode::QuasiStatic, authz::AuthMode::Dynamic}) {
        auto copy = sc;
        copy.mode = mode;
        by_mode[mode] = evaluate(copy).summary;
    }
    EXPECT_LT(by_mode[authz::AuthMode::Dynamic].reaction_max_ms, by_mode[authz::AuthMode::QuasiStatic].reaction_max_ms);
    EXPECT_GE(by_mode[authz::AuthMode::Static].leaked_deliveries, by_mode[authz::AuthMode::QuasiStatic].leaked_deliveries);
    EXPECT_EQ(by_mode[authz::AuthMode::Dynamic].leaked_deliveries, 0u);
}

TEST(Compare, TableIsDeterministic) {
    const auto a = invoke({"--scenario", kSmartHome, "--compare"});
    const auto b = invoke({"--scenario", kSmartHome, "--compare"});
    EXPECT_EQ(a.code, kOk);
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out.find("dynamic"), std::string::npos);
}

} // namespace
} // namespace ctxauth::cli
