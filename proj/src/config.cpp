#include "tsns/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "tsns/dynamics.hpp"
#include "tsns/functionals.hpp"

namespace tsns
{
using nlohmann::json;

namespace
{
constexpr std::array kKinds{
    ExperimentKind::simulate, ExperimentKind::couple,
    ExperimentKind::tails,    ExperimentKind::blowup,
    ExperimentKind::inequalities, ExperimentKind::feller,
    ExperimentKind::bel,
};

using P = ParamSpec;
using T = ParamType;

std::vector<ParamSpec> const kCommon{
    {"kind", T::string, json(), "experiment kind"},
    {"seed", T::integer, 0, "master seed; streams are split from it"},
    {"output", T::string, "", "run directory name under the output root"},
};

std::vector<ParamSpec> model_keys(int N, double c0)
{
    return {
        {"N", T::integer, N, "mode cutoff max|k_i|"},
        {"nu", T::number, 1.0, "viscosity"},
        {"alpha0", T::number, 0.25, "noise regularity, sigma_k = c0 |k|^-(3/2+2 alpha0)"},
        {"c0", T::number, c0, "noise amplitude"},
    };
}

// lo, lo·ratio, ... up to hi
json geometric(double lo, double ratio, double hi)
{
    json out = json::array();
    for (double k = lo; k <= hi; k *= ratio)
        out.push_back(k);
    return out;
}

std::vector<ParamSpec> cat(std::initializer_list<std::vector<ParamSpec>> parts)
{
    std::vector<ParamSpec> out;
    for (auto const& p : parts)
        out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::map<ExperimentKind, std::vector<ParamSpec>> const& schemas()
{
    static std::map<ExperimentKind, std::vector<ParamSpec>> const s{
        {ExperimentKind::simulate,
         cat({model_keys(4, 1.0),
              {
                  {"dt", T::number, 1e-3, "time step"},
                  {"T", T::number, 1.0, "horizon"},
                  {"integrator", T::string, "euler", "euler | midpoint"},
                  {"nonlinear", T::boolean, true, "include B(u,u)"},
                  {"cutoff", T::boolean, true, "multiply B by chi_R(|u|_alpha)"},
                  {"alpha", T::number, 1.2, "cut-off norm index"},
                  {"R", T::number, 5.0, "cut-off radius"},
                  {"x_norm", T::number, 1.0, "|x|_alpha of the initial condition"},
                  {"x_decay", T::number, 1.5, "spectral slope of the initial condition"},
                  {"record_norms", T::number_list, json::array({0.0, 1.0}),
                   "extra norm indices to record (alpha is always added)"},
                  {"snapshot_every", T::integer, 0, "store u every n steps (0 = never)"},
                  {"mild_beta", T::number, 1.4,
                   "index for sup (t^1)^((beta-alpha)/2)|v|_beta / (|x|_alpha + sup|z|_beta)"},
                  {"martingale_samples", T::integer, 0,
                   "replicas for the M_t martingale diagnostic (0 = skip)"},
                  {"martingale_mode", T::number_list, json::array({1, 0, 0}),
                   "wavevector of the martingale test field"},
              }})},
        {ExperimentKind::couple,
         cat({model_keys(2, 6.0),
              {
                  {"dt", T::number, 0.005, "time step"},
                  {"T", T::number, 1.0, "horizon"},
                  {"integrator", T::string, "euler", "euler | midpoint"},
                  {"alpha", T::number, 1.2, "cut-off norm index"},
                  {"R", T::number, 3.0, "cut-off radius"},
                  {"x_fraction", T::number, 1.0 / 3, "|x|_alpha / R, at most 1/3"},
                  {"x_decay", T::number, 1.5, "spectral slope of the initial condition"},
                  {"replicas", T::integer, 50, "independent (x, z) pairs"},
                  {"tolerance_factor", T::number, 10.0,
                   "pre-tau discrepancy allowed, in units of the local tolerance"},
              }})},
        {ExperimentKind::tails,
         cat({model_keys(1, 1.0),
              {
                  {"beta", T::number, 1.0, "norm index of sup |z|_beta"},
                  {"eps", T::number_list, json::array({0.02, 0.01}),
                   "interval lengths; the first is the reference"},
                  {"K_values", T::number_list, geometric(0.5, 1.01, 20.0),
                   "thresholds"},
                  {"samples", T::integer, 10000, "Monte Carlo samples per eps"},
                  {"substeps", T::integer, 16, "grid points for the supremum"},
                  {"min_exceed", T::integer, 10, "min exceedances for a fit point"},
                  {"fit_max_p", T::number, 0.5, "points above this p stay out of the fit"},
                  {"bootstrap", T::integer, 200, "resamples for the slope error"},
              }})},
        {ExperimentKind::blowup,
         cat({model_keys(1, 8.0),
              {
                  {"dt", T::number, 5e-4, "time step"},
                  {"T", T::number, 0.06, "largest time simulated"},
                  {"integrator", T::string, "euler", "euler | midpoint"},
                  {"alpha", T::number, 1.2, "norm index"},
                  {"eps_variant", T::number, 0.0, "epsilon of the alpha = 3/2 exponent"},
                  {"R_values", T::number_list, json::array({3, 4, 5, 6, 7, 8}), "radii"},
                  {"T_values", T::number_list,
                   json::array({0.002, 0.004, 0.006, 0.008, 0.01, 0.015, 0.02, 0.03,
                                0.04, 0.06}),
                   "sweep times for P[tau <= T] (grid times)"},
                  {"x_fraction", T::number, 1.0 / 3, "|x|_alpha / R, at most 1/3"},
                  {"x_decay", T::number, 1.5, "spectral slope of x"},
                  {"samples", T::integer, 1000, "replicas"},
                  {"min_hits", T::integer, 10, "min hits for a fit cell"},
                  {"fit_max_p", T::number, 0.5, "cells above this p stay out of the fit"},
                  {"fit_min_r2", T::number, 0.9, "required R^2 of the tail fit"},
              }})},
        {ExperimentKind::inequalities,
         {
             {"triples", T::number_table,
              json::array({{1, 1, -0.5}, {1.2, 1.2, -0.5}, {0.5, 1, 0}, {1, 0.5, 0},
                           {2, 2, -1}, {0, 0, 0}}),
              "(a, b, c) for <B(u,v),w> <= C |u|_a |v|_b |w|_{c+1}"},
             {"N_values", T::number_list, json::array({2, 4, 6, 8}), "cutoffs swept"},
             {"trials", T::integer, 3000, "trial fields per (triple, N)"},
             {"growth_tol", T::number, 0.25,
              "max log-log slope of C(N) for admissible triples"},
             {"delta_pairs", T::number_table, json::array({{2, 2}, {1, 1}, {1.5, 1.5}}),
              "(a, b) for the smoothing exponent"},
             {"series1_alpha", T::number_list, json::array({0, -2, -3, -4}),
              "exponents of sum |k|^alpha"},
             {"k0_values", T::number_list, json::array({1, 2, 4, 8, 16, 32, 64}),
              "radii of sum |k|^alpha"},
             {"series2_triples", T::number_table, json::array({{1, 1, 0}, {0.5, 1, 0.5}}),
              "(alpha, beta, gamma) of the constrained sum"},
             {"series2_cutoff", T::integer, 16, "max|m_i| of the constrained sum"},
             {"series2_l_max", T::integer, 32, "largest |l| in the sweep"},
             {"weight_tuples", T::integer, 20, "random (x, y, delta, eta) tuples"},
             {"weight_grid", T::integer, 60, "t grid points per tuple"},
             {"weight_tol", T::number, 1e-6, "quadrature tolerance"},
             {"chiprop_points", T::integer, 1000, "grid points"},
             {"chiprop_xmax", T::number, 4.0, "grid range [0, xmax]"},
             {"semigroup_gammas", T::number_list, json::array({0.25, 0.5, 1, 2}),
              "gamma of sup |k|^(2 gamma) e^(-nu |k|^2 t)"},
         }},
        {ExperimentKind::feller,
         cat({model_keys(2, 1.0),
              {
                  {"dt", T::number, 0.025, "time step"},
                  {"integrator", T::string, "euler", "euler | midpoint"},
                  {"cutoff", T::boolean, true, "use the cut-off system"},
                  {"alpha", T::number, 1.2, "norm index of x and h"},
                  {"R", T::number, 5.0, "cut-off radius"},
                  {"x_norm", T::number, 1.0, "|x|_alpha"},
                  {"x_decay", T::number, 1.5, "spectral slope of x and h"},
                  {"h_norm", T::number, 0.5, "|h|_alpha of the largest increment"},
                  {"halvings", T::integer, 6, "h is halved this many times"},
                  {"times", T::number_list, json::array({0.25, 1.0}), "grid times"},
                  {"functionals", T::string_list,
                   json::array({"tanh-coord:1,0,0", "tanh-pairing:7"}),
                   "bounded test functionals"},
                  {"samples", T::integer, 10000, "replicas"},
              }})},
        {ExperimentKind::bel,
         cat({model_keys(2, 1.0),
              {
                  {"dt", T::number, 0.025, "time step (exponential Euler)"},
                  {"t", T::number, 0.5, "time of the derivative"},
                  {"integrator", T::string, "euler", "must be euler"},
                  {"nonlinear", T::boolean, true, "include B(u,u)"},
                  {"cutoff", T::boolean, true, "use the cut-off system"},
                  {"alpha", T::number, 1.2, "cut-off norm index"},
                  {"R", T::number, 5.0, "cut-off radius"},
                  {"x_norm", T::number, 5.0 / 3, "|x|_alpha"},
                  {"x_decay", T::number, 1.5, "spectral slope of x and h"},
                  {"h_norm", T::number, 1.0, "|h|_alpha"},
                  {"fd_eps", T::number, 1e-4, "central-difference step"},
                  {"functionals", T::string_list,
                   json::array({"tanh-coord:1,0,0", "tanh-energy:1:0.2", "tanh-pairing:7"}),
                   "test functionals"},
                  {"samples", T::integer, 10000, "replicas"},
                  {"probe_times", T::number_list, json::array({0.1, 0.25, 0.5}),
                   "times of the tangent energy probe (empty = skip)"},
                  {"probe_samples", T::integer, 200, "replicas of the tangent probe"},
              }})},
    };
    return s;
}

ParamSpec const* find_spec(ExperimentKind kind, std::string const& key)
{
    for (auto const& p : schemas().at(kind))
        if (p.key == key)
            return &p;
    return nullptr;
}

bool type_ok(ParamType type, json const& v)
{
    auto all_numbers = [](json const& a) {
        return a.is_array()
               && std::all_of(a.begin(), a.end(),
                              [](json const& e) { return e.is_number(); });
    };
    switch (type)
    {
        case ParamType::number:
            return v.is_number();
        case ParamType::integer:
            return v.is_number_integer()
                   || (v.is_number_float() && std::isfinite(v.get<double>())
                       && v.get<double>() == std::floor(v.get<double>()));
        case ParamType::boolean:
            return v.is_boolean();
        case ParamType::string:
            return v.is_string();
        case ParamType::number_list:
            return all_numbers(v);
        case ParamType::string_list:
            return v.is_array()
                   && std::all_of(v.begin(), v.end(),
                                  [](json const& e) { return e.is_string(); });
        case ParamType::number_table:
            return v.is_array() && std::all_of(v.begin(), v.end(), all_numbers);
    }
    return false;
}

// Integers are stored as integers so that 3 and 3.0 fingerprint identically.
json normalized(ParamType type, json v)
{
    if (type == ParamType::integer && v.is_number_float())
        return json(static_cast<std::int64_t>(v.get<double>()));
    if (type == ParamType::number && v.is_number_integer())
        return json(v.get<double>());
    if (type == ParamType::number_list)
        for (auto& e : v)
            e = json(e.get<double>());
    if (type == ParamType::number_table)
        for (auto& row : v)
            for (auto& e : row)
                e = json(e.get<double>());
    return v;
}

std::string fmt(double x)
{
    std::ostringstream os;
    os << x;
    return os.str();
}

bool on_grid(double t, double dt)
{
    double r = t / dt;
    return t > 0 && std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
}

}  // namespace

//---------------------------------------------------------------------------//

std::string to_string(ExperimentKind kind)
{
    switch (kind)
    {
        case ExperimentKind::simulate: return "simulate";
        case ExperimentKind::couple: return "couple";
        case ExperimentKind::tails: return "tails";
        case ExperimentKind::blowup: return "blowup";
        case ExperimentKind::inequalities: return "inequalities";
        case ExperimentKind::feller: return "feller";
        case ExperimentKind::bel: return "bel";
    }
    return "?";
}

std::optional<ExperimentKind> parse_kind(std::string_view name)
{
    for (auto k : kKinds)
        if (to_string(k) == name)
            return k;
    return std::nullopt;
}

std::span<ExperimentKind const> all_kinds()
{
    return kKinds;
}

std::string to_string(ParamType type)
{
    switch (type)
    {
        case ParamType::number: return "number";
        case ParamType::integer: return "integer";
        case ParamType::boolean: return "boolean";
        case ParamType::string: return "string";
        case ParamType::number_list: return "list of numbers";
        case ParamType::string_list: return "list of strings";
        case ParamType::number_table: return "list of number lists";
    }
    return "?";
}

std::span<ParamSpec const> common_schema()
{
    return kCommon;
}

std::span<ParamSpec const> schema(ExperimentKind kind)
{
    return schemas().at(kind);
}

std::string to_string(Diagnostic const& d)
{
    return d.key + ": " + d.reason;
}

//---------------------------------------------------------------------------//

double ExperimentConfig::number(std::string const& key) const
{
    return params.at(key).get<double>();
}

std::int64_t ExperimentConfig::integer(std::string const& key) const
{
    return params.at(key).get<std::int64_t>();
}

std::size_t ExperimentConfig::count(std::string const& key) const
{
    auto v = integer(key);
    if (v < 0)
        throw std::invalid_argument(key + " must be nonnegative");
    return static_cast<std::size_t>(v);
}

bool ExperimentConfig::flag(std::string const& key) const
{
    return params.at(key).get<bool>();
}

std::string ExperimentConfig::text(std::string const& key) const
{
    return params.at(key).get<std::string>();
}

std::vector<double> ExperimentConfig::numbers(std::string const& key) const
{
    return params.at(key).get<std::vector<double>>();
}

std::vector<std::string> ExperimentConfig::texts(std::string const& key) const
{
    return params.at(key).get<std::vector<std::string>>();
}

std::vector<std::vector<double>>
ExperimentConfig::table(std::string const& key) const
{
    return params.at(key).get<std::vector<std::vector<double>>>();
}

json ExperimentConfig::to_json() const
{
    json j = params;
    j["kind"] = to_string(kind);
    j["seed"] = seed;
    j["output"] = output;
    return j;
}

std::string ExperimentConfig::run_name() const
{
    if (!output.empty())
        return output;
    return to_string(kind) + "-" + fingerprint(*this).substr(0, 12);
}

//---------------------------------------------------------------------------//

ParseResult parse_config_document(json const& doc)
{
    ParseResult res;
    auto& diags = res.diagnostics;
    if (!doc.is_object())
    {
        diags.push_back({"<document>", "expected a JSON object"});
        return res;
    }
    if (!doc.contains("kind"))
    {
        diags.push_back({"kind", "missing"});
        return res;
    }
    if (!doc["kind"].is_string())
    {
        diags.push_back({"kind", "expected string"});
        return res;
    }
    auto kind = parse_kind(doc["kind"].get<std::string>());
    if (!kind)
    {
        diags.push_back({"kind", "unknown experiment kind '"
                                     + doc["kind"].get<std::string>() + "'"});
        return res;
    }

    ExperimentConfig cfg;
    cfg.kind = *kind;
    for (auto const& [key, value] : doc.items())
    {
        if (key == "kind")
            continue;
        if (key == "seed")
        {
            if (!type_ok(ParamType::integer, value) || value.get<double>() < 0)
                diags.push_back({key, "expected nonnegative integer"});
            else
                cfg.seed = value.is_number_unsigned()
                               ? value.get<std::uint64_t>()
                               : static_cast<std::uint64_t>(value.get<double>());
            continue;
        }
        if (key == "output")
        {
            if (!value.is_string())
                diags.push_back({key, "expected string"});
            else
            {
                auto name = value.get<std::string>();
                if (name.find('/') != std::string::npos || name == "."
                    || name == "..")
                    diags.push_back({key, "must be a plain directory name"});
                cfg.output = name;
            }
            continue;
        }
        auto const* spec = find_spec(*kind, key);
        if (!spec)
        {
            diags.push_back({key, "unknown key for kind '" + to_string(*kind)
                                      + "'"});
            continue;
        }
        if (!type_ok(spec->type, value))
        {
            diags.push_back({key, "expected " + to_string(spec->type)});
            continue;
        }
        cfg.params[key] = normalized(spec->type, value);
    }
    for (auto const& spec : schemas().at(*kind))
        if (!cfg.params.contains(spec.key))
            cfg.params[spec.key] = normalized(spec.type, spec.fallback);

    if (!diags.empty())
        return res;
    diags = precondition_problems(cfg);
    if (diags.empty())
        res.config = std::move(cfg);
    return res;
}

ParseResult parse_config(std::string_view text,
                         std::span<std::string const> overrides)
{
    json doc;
    try
    {
        doc = json::parse(text);
    }
    catch (json::parse_error const& e)
    {
        ParseResult res;
        res.diagnostics.push_back({"<document>", e.what()});
        return res;
    }
    ParseResult bad;
    for (auto const& ov : overrides)
    {
        auto eq = ov.find('=');
        if (eq == std::string::npos || eq == 0)
        {
            bad.diagnostics.push_back({ov, "override must look like key=value"});
            continue;
        }
        std::string key = ov.substr(0, eq);
        std::replace(key.begin(), key.end(), '-', '_');
        std::string value = ov.substr(eq + 1);
        json v = json::parse(value, nullptr, false);
        // shell-friendly spellings: on/off and bare comma lists
        if (value == "on" || value == "off")
            v = value == "on";
        else if (v.is_discarded() && value.find(',') != std::string::npos)
            v = json::parse("[" + value + "]", nullptr, false);
        doc[key] = v.is_discarded() ? json(value) : v;
    }
    if (!bad.diagnostics.empty())
        return bad;
    return parse_config_document(doc);
}

std::string serialize(ExperimentConfig const& cfg)
{
    return cfg.to_json().dump(2) + "\n";
}

std::string sha256_hex(std::string_view bytes)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(),
                   nullptr)
        != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned i = 0; i < len; ++i)
        os << std::setw(2) << static_cast<int>(md[i]);
    return os.str();
}

std::string fingerprint(ExperimentConfig const& cfg)
{
    return sha256_hex(serialize(cfg));
}

//---------------------------------------------------------------------------//

std::vector<Diagnostic> precondition_problems(ExperimentConfig const& cfg)
{
    std::vector<Diagnostic> out;
    auto bad = [&out](std::string key, std::string reason) {
        out.push_back({std::move(key), std::move(reason)});
    };
    auto has = [&cfg](char const* key) { return cfg.params.contains(key); };
    auto positive = [&](char const* key) {
        if (has(key) && !(cfg.number(key) > 0))
            bad(key, "must be positive");
    };
    auto at_least = [&](char const* key, std::int64_t lo) {
        if (has(key) && cfg.integer(key) < lo)
            bad(key, "must be at least " + std::to_string(lo));
    };
    auto fraction = [&](char const* key) {
        if (has(key))
        {
            double f = cfg.number(key);
            if (!(f >= 0 && f <= 1.0 / 3 + 1e-12))
                bad(key, "must lie in [0, 1/3] so that |x|_alpha <= R/3");
        }
    };
    auto functionals = [&](char const* key) {
        if (!has(key))
            return;
        for (auto const& s : cfg.texts(key))
        {
            try
            {
                TestFunctional::parse(s);
            }
            catch (std::exception const& e)
            {
                bad(key, "'" + s + "': " + e.what());
            }
        }
    };

    if (has("N"))
    {
        at_least("N", 1);
        if (cfg.integer("N") > 64)
            bad("N", "at most 64 (transform grid limit)");
    }
    positive("nu");
    positive("alpha0");
    if (has("c0") && !(cfg.number("c0") >= 0))
        bad("c0", "must be nonnegative");
    positive("dt");
    if (has("integrator"))
    {
        try
        {
            parse_integrator(cfg.text("integrator"));
        }
        catch (std::exception const&)
        {
            bad("integrator", "expected 'euler' or 'midpoint'");
        }
    }
    if (has("T") && has("dt"))
    {
        double T = cfg.number("T"), dt = cfg.number("dt");
        if (!(T > 0))
            bad("T", "must be positive");
        else if (dt > 0 && !(dt < T))
            bad("T", "must exceed dt");
        else if (dt > 0 && !on_grid(T, dt))
            bad("T", "must be an integer multiple of dt");
    }

    double alpha0 = has("alpha0") ? cfg.number("alpha0") : 0.25;
    double window_hi = 1 + 2 * alpha0;
    bool cut = has("cutoff") ? cfg.flag("cutoff")
                             : cfg.kind == ExperimentKind::couple
                                   || cfg.kind == ExperimentKind::blowup;
    if (cut && has("alpha"))
    {
        double a = cfg.number("alpha");
        if (!(a > 0.5 && a < window_hi))
            bad("alpha", "alpha = " + fmt(a) + " outside (1/2, 1+2 alpha0) = (1/2, "
                             + fmt(window_hi) + ")");
    }
    if (cut && has("R") && !(cfg.number("R") >= 1))
        bad("R", "must be >= 1");
    if (has("x_norm") && !(cfg.number("x_norm") >= 0))
        bad("x_norm", "must be nonnegative");
    fraction("x_fraction");
    if (has("samples"))
        at_least("samples", cfg.kind == ExperimentKind::blowup ? 1 : 2);

    switch (cfg.kind)
    {
        case ExperimentKind::simulate:
            at_least("snapshot_every", 0);
            at_least("martingale_samples", 0);
            if (cfg.numbers("martingale_mode").size() != 3)
                bad("martingale_mode", "expected three integers");
            break;
        case ExperimentKind::couple:
            at_least("replicas", 1);
            positive("tolerance_factor");
            break;
        case ExperimentKind::tails:
            if (cfg.numbers("eps").empty())
                bad("eps", "needs at least one value");
            for (double e : cfg.numbers("eps"))
                if (!(e > 0))
                    bad("eps", "values must be positive");
            if (cfg.numbers("K_values").empty())
                bad("K_values", "needs at least one value");
            for (double K : cfg.numbers("K_values"))
                if (!(K >= 0.5))
                    bad("K_values", "values must be >= 0.5");
            at_least("substeps", 1);
            at_least("min_exceed", 1);
            break;
        case ExperimentKind::blowup:
        {
            double a = cfg.number("alpha");
            if (a == 1.5)
            {
                double e = cfg.number("eps_variant");
                if (!(e > 0 && e < 1))
                    bad("eps_variant", "alpha = 3/2 needs 0 < eps_variant < 1");
            }
            if (cfg.numbers("R_values").empty())
                bad("R_values", "needs at least one radius");
            for (double R : cfg.numbers("R_values"))
                if (!(R >= 1))
                    bad("R_values", "radii must be >= 1");
            double T = cfg.number("T"), dt = cfg.number("dt");
            for (double t : cfg.numbers("T_values"))
                if (!(t <= T * (1 + 1e-12)) || !on_grid(t, dt))
                    bad("T_values", "each value must be a grid time in (0, T]");
            at_least("min_hits", 1);
            break;
        }
        case ExperimentKind::inequalities:
            for (auto const& t : cfg.table("triples"))
                if (t.size() != 3)
                    bad("triples", "each entry needs three numbers");
            for (double N : cfg.numbers("N_values"))
                if (!(N >= 1 && N <= 16 && N == std::floor(N)))
                    bad("N_values", "cutoffs must be integers in [1, 16]");
            at_least("trials", 1);
            for (auto const& p : cfg.table("delta_pairs"))
                if (p.size() != 2 || p[0] < 0 || p[1] < 0)
                    bad("delta_pairs", "each entry needs two nonnegative numbers");
            for (double k : cfg.numbers("k0_values"))
                if (!(k >= 1))
                    bad("k0_values", "radii must be >= 1");
            for (auto const& t : cfg.table("series2_triples"))
                if (t.size() != 3)
                    bad("series2_triples", "each entry needs three numbers");
            at_least("series2_cutoff", 1);
            at_least("series2_l_max", 2);
            at_least("weight_tuples", 1);
            at_least("weight_grid", 2);
            positive("weight_tol");
            at_least("chiprop_points", 2);
            positive("chiprop_xmax");
            for (double g : cfg.numbers("semigroup_gammas"))
                if (!(g > 0))
                    bad("semigroup_gammas", "values must be positive");
            break;
        case ExperimentKind::feller:
        {
            double h = cfg.number("h_norm");
            if (!(h > 0 && h < 1))
                bad("h_norm", "must lie in (0, 1)");
            at_least("halvings", 1);
            if (cfg.numbers("times").empty())
                bad("times", "needs at least one time");
            for (double t : cfg.numbers("times"))
                if (!on_grid(t, cfg.number("dt")))
                    bad("times", "each time must be a positive multiple of dt");
            functionals("functionals");
            break;
        }
        case ExperimentKind::bel:
        {
            if (!(cfg.number("c0") > 0))
                bad("c0", "the gradient weight needs invertible noise (c0 > 0)");
            if (cfg.text("integrator") != "euler")
                bad("integrator", "the gradient weight is defined for euler steps");
            double t = cfg.number("t"), dt = cfg.number("dt");
            if (!on_grid(t, dt) || !(dt < t))
                bad("t", "must be a multiple of dt larger than dt");
            positive("h_norm");
            positive("fd_eps");
            for (double s : cfg.numbers("probe_times"))
                if (!on_grid(s, dt) || s > t * (1 + 1e-12))
                    bad("probe_times", "each time must be a grid time in (0, t]");
            at_least("probe_samples", 1);
            functionals("functionals");
            break;
        }
    }
    return out;
}
}  // namespace tsns
