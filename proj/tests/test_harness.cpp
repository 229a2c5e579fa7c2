#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "tsns/config.hpp"
#include "tsns/experiments.hpp"
#include "tsns/registry.hpp"

using namespace tsns;
namespace fs = std::filesystem;

namespace
{
fs::path scratch(std::string const& name)
{
    auto p = fs::temp_directory_path()
             / ("tsns-harness-" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ExperimentConfig parse_ok(std::string const& text,
                          std::vector<std::string> const& overrides = {})
{
    auto r = parse_config(text, overrides);
    for (auto const& d : r.diagnostics)
        MESSAGE(to_string(d));
    REQUIRE(r.ok());
    return *r.config;
}

std::string slurp(fs::path const& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

// Small, fast configs for every kind
std::string quick(ExperimentKind kind)
{
    switch (kind)
    {
        case ExperimentKind::simulate:
            return R"({"kind": "simulate", "N": 2, "T": 0.05, "dt": 0.01})";
        case ExperimentKind::couple:
            return R"({"kind": "couple", "replicas": 2, "T": 0.1})";
        case ExperimentKind::tails:
            return R"({"kind": "tails", "samples": 200, "bootstrap": 0})";
        case ExperimentKind::blowup:
            return R"({"kind": "blowup", "samples": 20})";
        case ExperimentKind::inequalities:
            return R"({"kind": "inequalities", "trials": 4, "N_values": [2, 3],
                       "weight_tuples": 2, "series2_l_max": 4,
                       "series2_cutoff": 4, "k0_values": [1, 2]})";
        case ExperimentKind::feller:
            return R"({"kind": "feller", "samples": 10, "halvings": 1})";
        case ExperimentKind::bel:
            return R"({"kind": "bel", "samples": 10, "probe_samples": 4})";
    }
    return "{}";
}
}  // namespace

TEST_CASE("configs round-trip through their canonical text")
{
    for (auto kind : all_kinds())
    {
        CAPTURE(to_string(kind));
        auto cfg = parse_ok(quick(kind));
        auto text = serialize(cfg);
        auto again = parse_ok(text);
        CHECK(again == cfg);
        CHECK(serialize(again) == text);
        CHECK(fingerprint(again) == fingerprint(cfg));
    }
}

TEST_CASE("defaults are filled in and typed")
{
    auto cfg = parse_ok(R"({"kind": "simulate"})");
    CHECK(cfg.integer("N") == 4);
    CHECK(cfg.number("alpha") == 1.2);
    CHECK(cfg.params.at("N").is_number_integer());
    CHECK(cfg.params.at("nu").is_number_float());
    // an integer literal for a real parameter is stored as a real
    auto c2 = parse_ok(R"({"kind": "simulate", "nu": 1})");
    CHECK(c2 == cfg);
}

TEST_CASE("overrides use shell spellings")
{
    auto cfg = parse_ok(R"({"kind": "simulate"})",
                        {"record-norms=0.5,1.5", "cutoff=off", "N=3"});
    CHECK(cfg.numbers("record_norms") == std::vector<double>{0.5, 1.5});
    CHECK_FALSE(cfg.flag("cutoff"));
    CHECK(cfg.integer("N") == 3);

    auto bad = parse_config(R"({"kind": "simulate"})",
                            std::vector<std::string>{"N"});
    CHECK_FALSE(bad.ok());
}

TEST_CASE("alpha below one half is rejected with the key named")
{
    auto r = parse_config(R"({"kind": "simulate", "alpha": 0.4})");
    REQUIRE_FALSE(r.ok());
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].key == "alpha");
    CHECK(r.diagnostics[0].reason.find("1/2") != std::string::npos);

    // the upper end of the window moves with alpha0
    auto hi = parse_config(R"({"kind": "blowup", "alpha": 2.0})");
    CHECK_FALSE(hi.ok());
    auto ok = parse_config(R"({"kind": "blowup", "alpha": 2.0, "alpha0": 0.75})");
    CHECK(ok.ok());
}

TEST_CASE("an unknown key yields exactly one diagnostic")
{
    auto r = parse_config(R"({"kind": "tails", "foo": 1})");
    REQUIRE_FALSE(r.ok());
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].key == "foo");
}

TEST_CASE("type and precondition diagnostics")
{
    auto r = parse_config(R"({"kind": "simulate", "N": "four", "dt": -1})");
    REQUIRE_FALSE(r.ok());
    std::set<std::string> keys;
    for (auto const& d : r.diagnostics)
        keys.insert(d.key);
    CHECK(keys.count("N"));

    CHECK_FALSE(parse_config(R"({"kind": "nope"})").ok());
    CHECK_FALSE(parse_config(R"([1, 2])").ok());
    CHECK_FALSE(parse_config("{not json").ok());
    CHECK_FALSE(parse_config(R"({"kind": "bel", "c0": 0})").ok());
    CHECK_FALSE(parse_config(R"({"kind": "bel", "integrator": "midpoint"})").ok());
    CHECK_FALSE(parse_config(R"({"kind": "feller", "h_norm": 1.5})").ok());
    CHECK_FALSE(parse_config(R"({"kind": "feller", "times": [0.26]})").ok());
    CHECK_FALSE(parse_config(R"({"kind": "couple", "x_fraction": 0.5})").ok());
    CHECK_FALSE(parse_config(R"({"kind": "simulate", "output": "../x"})").ok());
}

TEST_CASE("fingerprints track every field")
{
    auto a = parse_ok(quick(ExperimentKind::simulate));
    auto b = parse_ok(quick(ExperimentKind::simulate), {"seed=1"});
    auto c = parse_ok(quick(ExperimentKind::simulate), {"nu=0.5"});
    CHECK(fingerprint(a) != fingerprint(b));
    CHECK(fingerprint(a) != fingerprint(c));
    CHECK(fingerprint(a).size() == 64);
    CHECK(sha256_hex("abc")
          == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(a.run_name() == "simulate-" + fingerprint(a).substr(0, 12));
}

TEST_CASE("every kind runs and reruns byte-identically")
{
    auto root = scratch("rerun");
    for (auto kind : all_kinds())
    {
        CAPTURE(to_string(kind));
        auto cfg = parse_ok(quick(kind));
        auto m1 = run_experiment(cfg, {root / "a", {}});
        auto m2 = run_experiment(cfg, {root / "b", {}});
        REQUIRE(m1.outputs.size() == m2.outputs.size());
        for (std::size_t i = 0; i < m1.outputs.size(); ++i)
        {
            CHECK(m1.outputs[i].name == m2.outputs[i].name);
            CHECK(m1.outputs[i].sha256 == m2.outputs[i].sha256);
            CHECK(slurp(m1.directory / m1.outputs[i].name)
                  == slurp(m2.directory / m2.outputs[i].name));
        }
        auto summary = load_summary(m1.directory);
        CHECK(summary.at("kind") == to_string(kind));
        CHECK(summary.at("seed") == 0);
        CHECK(summary.contains("checks"));

        auto loaded = load_manifest(m1.directory / "manifest.json");
        CHECK(loaded.fingerprint == fingerprint(cfg));
        CHECK(loaded.tool_version == kToolVersion);

        auto rep = replay_manifest(m1.directory / "manifest.json", root / "c");
        CHECK(rep.identical);
    }
}

TEST_CASE("a failed write leaves the previous run intact")
{
    auto root = scratch("atomic");
    auto cfg = parse_ok(quick(ExperimentKind::simulate), {"output=run"});
    auto first = run_experiment(cfg, {root, {}});
    auto before = slurp(first.directory / "manifest.json");

    auto other = parse_ok(quick(ExperimentKind::simulate),
                          {"output=run", "seed=9"});
    RunOptions opts{root, [](std::string const& name) {
                        if (name == "summary.json")
                            throw IoError(name, "disk full (simulated)");
                    }};
    CHECK_THROWS_AS(run_experiment(other, opts), IoError);
    CHECK(slurp(root / "run" / "manifest.json") == before);
    // no staging directory survives
    std::size_t entries = 0;
    for ([[maybe_unused]] auto const& e : fs::directory_iterator(root))
        ++entries;
    CHECK(entries == 1);

    // a later successful run replaces the old one
    auto second = run_experiment(other, {root, {}});
    CHECK(load_manifest(second.directory / "manifest.json").seed == 9);
}

TEST_CASE("replay detects tampered outputs")
{
    auto root = scratch("tamper");
    auto cfg = parse_ok(quick(ExperimentKind::tails));
    auto m = run_experiment(cfg, {root / "a", {}});
    auto manifest = m.to_json();
    manifest["outputs"][0]["sha256"] = std::string(64, '0');
    std::ofstream(m.directory / "manifest.json") << manifest.dump(2);
    auto rep = replay_manifest(m.directory / "manifest.json", root / "b");
    CHECK_FALSE(rep.identical);
    REQUIRE(rep.mismatched.size() == 1);
    CHECK(rep.mismatched[0] == m.outputs[0].name);
}

TEST_CASE("the registry covers every probed statement")
{
    std::set<std::string> ids;
    std::set<std::string> kinds_used;
    for (auto const& e : list_experiments())
    {
        CHECK(ids.insert(e.id).second);
        CHECK_FALSE(e.statement.empty());
        CHECK_FALSE(e.kinds.empty());
        for (auto const& k : e.kinds)
        {
            CHECK(parse_kind(k).has_value());
            kinds_used.insert(k);
        }
    }
    for (char const* id :
         {"noise-decay", "noise-assumption", "sns-equation", "wiener-expansion",
          "stokes-ou", "v-equation", "energy-functional", "cutoff-system",
          "cutoff-v-equation", "energy-identity", "mild-bound", "mild-form",
          "stopping-time", "weak-strong", "cutoff-lipschitz",
          "semigroup-smoothing", "z-tails", "blowup-probability",
          "weight-convolution", "lattice-sum", "constrained-lattice-sum",
          "trilinear-estimate", "trilinear-smoothing", "gradient-formula",
          "tangent-equation", "tangent-high-bound", "tangent-low-bound",
          "log-lipschitz", "initial-continuity", "martingale-diagnostic"})
        CHECK_MESSAGE(ids.count(id), id);
    for (auto kind : all_kinds())
        CHECK(kinds_used.count(to_string(kind)));
}

TEST_CASE("describe")
{
    auto blowup = describe("blowup");
    CHECK(blowup.find("blowup-probability") != std::string::npos);
    CHECK(blowup.find("R^2/T") != std::string::npos);
    auto bel = describe("bel");
    CHECK(bel.find("gradient-formula") != std::string::npos);
    CHECK(bel.find("Q^(-1/2)") != std::string::npos);
    CHECK(describe("z-tails").find("K^2/eps") != std::string::npos);
    CHECK_THROWS_AS(describe("nope"), std::invalid_argument);
}
