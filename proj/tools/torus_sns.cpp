// torus-sns: command-line front end for the experiments.
//
// Exit codes: 0 success, 1 invalid config or arguments, 2 numeric abort,
// 3 filesystem error, 4 replay produced different bytes.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tsns/config.hpp"
#include "tsns/experiments.hpp"
#include "tsns/registry.hpp"

namespace
{
using namespace tsns;

enum Exit
{
    ok = 0,
    validation = 1,
    numeric_abort = 2,
    io = 3,
    replay_mismatch = 4,
};

// Turn leftover "--key=value" / "--key value" arguments into key=value
bool collect_overrides(std::vector<std::string> const& extras,
                       std::vector<std::string>& out)
{
    for (std::size_t i = 0; i < extras.size(); ++i)
    {
        auto const& a = extras[i];
        if (a.rfind("--", 0) != 0 || a.size() == 2)
        {
            std::cerr << "error: unexpected argument '" << a << "'\n";
            return false;
        }
        auto body = a.substr(2);
        if (body.find('=') == std::string::npos)
        {
            if (i + 1 >= extras.size())
            {
                std::cerr << "error: '" << a << "' needs a value\n";
                return false;
            }
            body += "=" + extras[++i];
        }
        out.push_back(body);
    }
    return true;
}

int run_kind(ExperimentKind kind, std::string const& config_path,
             std::vector<std::string> const& extras)
{
    std::string text = "{}";
    if (!config_path.empty())
    {
        std::ifstream f(config_path);
        if (!f)
        {
            std::cerr << "error: cannot read " << config_path << '\n';
            return io;
        }
        std::ostringstream os;
        os << f.rdbuf();
        text = os.str();
    }
    std::vector<std::string> overrides;
    if (!collect_overrides(extras, overrides))
        return validation;
    overrides.push_back("kind=\"" + to_string(kind) + "\"");

    auto parsed = parse_config(text, overrides);
    if (!parsed.ok())
    {
        for (auto const& d : parsed.diagnostics)
            std::cerr << "invalid: " << to_string(d) << '\n';
        return validation;
    }
    try
    {
        auto man = run_experiment(*parsed.config);
        auto summary = load_summary(man.directory);
        std::cout << "run: " << man.directory.string() << '\n'
                  << "fingerprint: " << man.fingerprint << '\n';
        for (auto const& [k, v] : summary.at("checks").items())
            std::cout << (v.get<bool>() ? "PASS " : "FAIL ") << k << '\n';
        if (man.status != "ok")
        {
            std::cerr << "numeric abort: " << man.abort_reason << '\n';
            return numeric_abort;
        }
        return ok;
    }
    catch (IoError const& e)
    {
        std::cerr << "io error: " << e.what() << '\n';
        return io;
    }
    catch (std::invalid_argument const& e)
    {
        std::cerr << "invalid: " << e.what() << '\n';
        return validation;
    }
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Galerkin stochastic Navier-Stokes laboratory on the 3-torus"};
    app.require_subcommand(1);

    struct KindCmd
    {
        ExperimentKind kind;
        CLI::App* cmd;
        std::string config;
    };
    std::vector<KindCmd> kinds;
    kinds.reserve(all_kinds().size());
    for (auto k : all_kinds())
    {
        auto* cmd = app.add_subcommand(to_string(k), "run the " + to_string(k)
                                                         + " experiment");
        cmd->allow_extras();
        kinds.push_back({k, cmd, {}});
        cmd->add_option("--config", kinds.back().config, "JSON config file");
        cmd->footer("Any config key can be overridden with --key=value.");
    }

    auto* list = app.add_subcommand("list", "list the statements each experiment probes");
    std::string name;
    auto* desc = app.add_subcommand("describe", "describe a kind or a result id");
    desc->add_option("name", name)->required();
    std::string manifest, scratch = "replay";
    auto* replay = app.add_subcommand("replay", "re-run a manifest and compare outputs");
    replay->add_option("manifest", manifest, "path to manifest.json")->required();
    replay->add_option("--scratch", scratch, "output root for the re-run");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int code = app.exit(e);
        return code == 0 ? ok : validation;
    }

    for (auto const& k : kinds)
        if (*k.cmd)
            return run_kind(k.kind, k.config, k.cmd->remaining());

    if (*list)
    {
        for (auto const& e : list_experiments())
        {
            std::cout << e.id << ":";
            for (auto const& k : e.kinds)
                std::cout << ' ' << k;
            std::cout << "\n  " << e.statement << '\n';
        }
        return ok;
    }
    if (*desc)
    {
        try
        {
            std::cout << describe(name);
            return ok;
        }
        catch (std::invalid_argument const& e)
        {
            std::cerr << "error: " << e.what() << '\n';
            return validation;
        }
    }
    if (*replay)
    {
        try
        {
            auto res = replay_manifest(manifest, scratch);
            if (res.identical)
            {
                std::cout << "identical: " << res.rerun.outputs.size()
                          << " files\n";
                return ok;
            }
            for (auto const& m : res.mismatched)
                std::cout << "differs: " << m << '\n';
            return replay_mismatch;
        }
        catch (IoError const& e)
        {
            std::cerr << "io error: " << e.what() << '\n';
            return io;
        }
        catch (std::exception const& e)
        {
            std::cerr << "invalid: " << e.what() << '\n';
            return validation;
        }
    }
    return validation;
}
