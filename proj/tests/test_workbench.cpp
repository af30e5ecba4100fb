#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ddlab/workbench.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ddlab;
namespace fs = std::filesystem;

namespace {

WorkbenchConfig quiet_config(std::ostringstream& sink) {
    WorkbenchConfig cfg;
    cfg.out = &sink;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("kind parsing accepts the four kinds and rejects everything else") {
    CHECK(parse_kind("dd") == Kind::dd);
    CHECK(parse_kind("chord") == Kind::chord);
    CHECK(parse_kind("wedge") == Kind::wedge);
    CHECK(parse_kind("trivalent") == Kind::trivalent);
    CHECK_THROWS_AS(parse_kind("knots"), UsageError);
}

TEST_CASE("cache directory resolution prefers the flag, then the environment") {
    unsetenv("DDLAB_CACHE");
    CHECK(resolve_cache_dir("") == "");
    CHECK(resolve_cache_dir("/tmp/from-flag") == "/tmp/from-flag");
    setenv("DDLAB_CACHE", "/tmp/from-env", 1);
    CHECK(resolve_cache_dir("") == "/tmp/from-env");
    CHECK(resolve_cache_dir("/tmp/from-flag") == "/tmp/from-flag");
    unsetenv("DDLAB_CACHE");
}

TEST_CASE("dimension reports carry the full generator/relation/rank breakdown") {
    DimensionReport r = compute_dims(Kind::dd, 2, 2);
    CHECK(r.kind == "dd");
    CHECK(r.degree == 2);
    CHECK(r.components == 2);
    CHECK(r.generator_count > 0);
    CHECK(r.relation_count > 0);
    CHECK(r.rank == r.generator_count - r.quotient_dim);
    CHECK(r.quotient_dim == 2);

    CHECK(compute_dims(Kind::wedge, 2, 2).quotient_dim == 4);
    CHECK(compute_dims(Kind::chord, 2, 1).quotient_dim == 2);
    CHECK_THROWS_AS(compute_dims(Kind::trivalent, 1, 1), UsageError);
}

TEST_CASE("a too-small budget aborts with an estimate instead of running") {
    std::ostringstream sink;
    WorkbenchConfig cfg = quiet_config(sink);
    cfg.budget = 5;
    CHECK_THROWS_AS(cmd_dims(cfg, Kind::dd, 2, 3), BudgetError);
}

TEST_CASE("dims caching: entries are written, trusted when valid, and ignored when stale") {
    std::ostringstream sink;
    WorkbenchConfig cfg = quiet_config(sink);
    fs::path dir = fs::temp_directory_path() / "ddlab_wb_cache_test";
    fs::remove_all(dir);
    cfg.cache_dir = dir.string();

    DimensionReport cold = cmd_dims(cfg, Kind::dd, 2, 2);
    CHECK(cold.quotient_dim == 2);

    // exactly one entry, named for the stratum and the active template hash
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
    REQUIRE(files.size() == 1);
    std::string hash = templates_hash_hex(load_templates());
    CHECK(files[0].filename().string() == "dims-dd-d2-m2-" + hash + ".json");

    DimensionReport warm = cmd_dims(cfg, Kind::dd, 2, 2);
    CHECK(warm.quotient_dim == cold.quotient_dim);
    CHECK(warm.rank == cold.rank);
    CHECK(warm.relation_count == cold.relation_count);

    // a valid matching entry is trusted: edits to it show up in the result
    nlohmann::json j = nlohmann::json::parse(slurp(files[0]));
    j["quotient_dim"] = 999;
    std::ofstream(files[0]) << j.dump();
    CHECK(cmd_dims(cfg, Kind::dd, 2, 2).quotient_dim == 999);

    // an entry recorded under a different template hash is recomputed
    j["templates_hash"] = "0000000000000000";
    std::ofstream(files[0]) << j.dump();
    CHECK(cmd_dims(cfg, Kind::dd, 2, 2).quotient_dim == 2);

    // unreadable garbage is recomputed too
    std::ofstream(files[0]) << "not json at all";
    CHECK(cmd_dims(cfg, Kind::dd, 2, 2).quotient_dim == 2);

    fs::remove_all(dir);
}

TEST_CASE("caching disabled leaves no files behind") {
    std::ostringstream sink;
    WorkbenchConfig cfg = quiet_config(sink);
    fs::path dir = fs::temp_directory_path() / "ddlab_wb_nocache_test";
    fs::remove_all(dir);
    CHECK(cmd_dims(cfg, Kind::wedge, 1, 2).quotient_dim == 0);
    CHECK(!fs::exists(dir));
}

TEST_CASE("hardcoded expectations: 1 in degree 0, 0 in degree 1, m-choose-3 in degree 2") {
    CHECK(expected_dd_dim(0, 1) == 1);
    CHECK(expected_dd_dim(1, 4) == 0);
    CHECK(expected_dd_dim(2, 2) == 0);
    CHECK(expected_dd_dim(2, 3) == 1);
    CHECK(expected_dd_dim(2, 4) == 4);
    CHECK(expected_dd_dim(3, 1) == -1);
}

TEST_CASE("the degree-1 table agrees with the expected values everywhere") {
    std::ostringstream sink;
    WorkbenchConfig cfg = quiet_config(sink);
    CHECK(cmd_table(cfg, 1, 3) == 0);
    CHECK(sink.str().find("all expected cells agree") != std::string::npos);
    CHECK(sink.str().find("!") == std::string::npos);
}

TEST_CASE("the degree-2 table reports mismatching cells and exits nonzero") {
    std::ostringstream sink;
    WorkbenchConfig cfg = quiet_config(sink);
    CHECK(cmd_table(cfg, 2, 3) == 1);
    std::string text = sink.str();
    CHECK(text.find("!") != std::string::npos);
    CHECK(text.find("expected-cell mismatches present") != std::string::npos);

    std::ostringstream jsink;
    WorkbenchConfig jcfg = quiet_config(jsink);
    jcfg.format = "json";
    CHECK(cmd_table(jcfg, 2, 2) == 1);
    nlohmann::json j = nlohmann::json::parse(jsink.str());
    CHECK(j.at("pass") == false);
    bool found_fail = false, found_pass = false;
    for (const auto& cell : j.at("cells")) {
        if (!cell.contains("pass")) continue;
        (cell.at("pass").get<bool>() ? found_pass : found_fail) = true;
    }
    CHECK(found_pass);
    CHECK(found_fail);
}

TEST_CASE("relation rows map into the four-term span under iota") {
    VerificationResult r = verify_iota_relations(2, 2);
    INFO(r.witness);
    CHECK(r.passed);
}

TEST_CASE("partner insertion applied to four-term rows stays in the relation span") {
    VerificationResult r = verify_nu_wellposed(3);
    INFO(r.witness);
    CHECK(r.passed);
}

TEST_CASE("expanding an inserted diagram returns it up to isolated-chord terms") {
    VerificationResult r = verify_iota_nu(2);
    INFO(r.witness);
    CHECK(r.passed);
}

TEST_CASE("embedded wedge classes span the pair-diagram quotient") {
    VerificationResult r = verify_wedge_onto(2, 2);
    INFO(r.witness);
    CHECK(r.passed);
}

TEST_CASE("wedge images and reduced strutless diagrams span the same subspace") {
    VerificationResult r = verify_strutless(2);
    INFO(r.witness);
    CHECK(r.passed);
}

TEST_CASE("one-circle quotients match the chord quotient with framing rows") {
    VerificationResult r = verify_knot_bijection(2);
    INFO(r.witness);
    CHECK(r.passed);
}

TEST_CASE("three-strand partner insertion is order-dependent, with witness") {
    VerificationResult r = verify_nu3_fails(2);
    CHECK(r.passed);
    CHECK(r.witness.find("outside the relation span") != std::string::npos);
}

TEST_CASE("all reduction orders of a trivalent diagram agree modulo four-term rows") {
    VerificationResult r = verify_stu_confluence(2, 2);
    INFO(r.witness);
    CHECK(r.passed);
}

TEST_CASE("verification dispatch honors overrides and rejects unknown checks") {
    std::ostringstream sink;
    WorkbenchConfig cfg = quiet_config(sink);
    VerificationResult r = cmd_verify(cfg, "strutless", -1, 2);
    CHECK(r.check == "strutless");
    CHECK(r.parameters.find("components<=2") != std::string::npos);
    CHECK(r.passed);
    CHECK_THROWS_AS(cmd_verify(cfg, "no-such-check"), UsageError);
}

TEST_CASE("verification results render in both formats") {
    VerificationResult r{"demo", "degree<=1", false, "something specific"};
    std::ostringstream sink;
    WorkbenchConfig cfg = quiet_config(sink);
    print_verification(cfg, r);
    CHECK(sink.str().find("status  fail") != std::string::npos);
    CHECK(sink.str().find("something specific") != std::string::npos);

    std::ostringstream jsink;
    WorkbenchConfig jcfg = quiet_config(jsink);
    jcfg.format = "json";
    print_verification(jcfg, r);
    nlohmann::json j = nlohmann::json::parse(jsink.str());
    CHECK(j.at("status") == "fail");
    CHECK(j.at("witness") == "something specific");
}

TEST_CASE("degree-2 enumeration output is grouped by isolated-pair count") {
    std::ostringstream sink;
    WorkbenchConfig cfg = quiet_config(sink);
    CHECK(cmd_enumerate(cfg, Kind::dd, 2, 2) == 0);
    std::string text = sink.str();
    std::size_t n = enumerate_diagrams(Kind::dd, 2, 2).size();
    CHECK(text.find(degree2_class_name(Degree2Class::TwoIsolated)) != std::string::npos);
    CHECK(text.find(degree2_class_name(Degree2Class::OneIsolated)) != std::string::npos);
    CHECK(text.find(degree2_class_name(Degree2Class::NoneIsolated)) != std::string::npos);
    CHECK(text.find("total " + std::to_string(n)) != std::string::npos);

    // group sizes printed in parentheses must sum to the total
    std::size_t sum = 0, pos = 0;
    while ((pos = text.find(" (", pos)) != std::string::npos) {
        sum += std::stoul(text.substr(pos + 2));
        pos += 2;
    }
    CHECK(sum == n);
}

TEST_CASE("json enumeration annotates degree-2 pair diagrams with their class") {
    std::ostringstream sink;
    WorkbenchConfig cfg = quiet_config(sink);
    cfg.format = "json";
    CHECK(cmd_enumerate(cfg, Kind::dd, 2, 1) == 0);
    nlohmann::json j = nlohmann::json::parse(sink.str());
    CHECK(j.at("count").get<std::size_t>() == j.at("diagrams").size());
    for (const auto& d : j.at("diagrams")) CHECK(d.contains("class"));

    std::ostringstream csink;
    WorkbenchConfig ccfg = quiet_config(csink);
    ccfg.format = "json";
    CHECK(cmd_enumerate(ccfg, Kind::chord, 2, 1) == 0);
    nlohmann::json cj = nlohmann::json::parse(csink.str());
    CHECK(cj.at("count").get<int>() == 2);
    for (const auto& d : cj.at("diagrams")) CHECK(!d.contains("class"));
}

TEST_CASE("template dump round-trips and the hash matches the dumped set") {
    std::ostringstream dump_sink;
    WorkbenchConfig cfg = quiet_config(dump_sink);
    CHECK(cmd_templates(cfg, "dump") == 0);
    auto parsed = parse_templates(dump_sink.str());
    CHECK(parsed.size() == load_templates().size());

    std::ostringstream hash_sink;
    WorkbenchConfig hcfg = quiet_config(hash_sink);
    CHECK(cmd_templates(hcfg, "hash") == 0);
    std::string line = hash_sink.str();
    if (!line.empty() && line.back() == '\n') line.pop_back();
    CHECK(line == templates_hash_hex(parsed));
    CHECK(line == templates_hash_hex(load_templates()));

    CHECK_THROWS_AS(cmd_templates(cfg, "install"), UsageError);
}
