#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tsns
{
enum class ExperimentKind
{
    simulate,
    couple,
    tails,
    blowup,
    inequalities,
    feller,
    bel,
};

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view name);
std::span<ExperimentKind const> all_kinds();

//---------------------------------------------------------------------------//
enum class ParamType
{
    number,
    integer,
    boolean,
    string,
    number_list,
    string_list,
    number_table,  //!< list of number lists
};

std::string to_string(ParamType type);

struct ParamSpec
{
    std::string key;
    ParamType type;
    nlohmann::json fallback;
    std::string help;
};

//! Keys accepted by every kind: kind, seed, output
std::span<ParamSpec const> common_schema();
std::span<ParamSpec const> schema(ExperimentKind kind);

//---------------------------------------------------------------------------//
/*!
 * Validated experiment configuration.
 *
 * `params` holds every key of the kind's schema, defaults filled in, so the
 * serialized form is complete and the fingerprint covers every field.
 */
struct ExperimentConfig
{
    ExperimentKind kind = ExperimentKind::simulate;
    std::uint64_t seed = 0;
    //! run directory under the output root; empty means <kind>-<hash prefix>
    std::string output;
    nlohmann::json params = nlohmann::json::object();

    double number(std::string const& key) const;
    std::int64_t integer(std::string const& key) const;
    std::size_t count(std::string const& key) const;
    bool flag(std::string const& key) const;
    std::string text(std::string const& key) const;
    std::vector<double> numbers(std::string const& key) const;
    std::vector<std::string> texts(std::string const& key) const;
    std::vector<std::vector<double>> table(std::string const& key) const;

    //! kind, seed, output and params as one flat JSON object
    nlohmann::json to_json() const;
    std::string run_name() const;

    bool operator==(ExperimentConfig const&) const = default;
};

struct Diagnostic
{
    std::string key;
    std::string reason;
};

std::string to_string(Diagnostic const& d);

struct ParseResult
{
    std::optional<ExperimentConfig> config;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return config.has_value(); }
};

/*!
 * Parse a JSON config document, apply `--key=value` style overrides
 * (given here as "key=value"; the value is read as JSON, falling back to a
 * bare string), check types and the kind's numeric preconditions.
 *
 * Every problem is reported with the key it concerns; nothing is computed
 * unless the list is empty.
 */
ParseResult parse_config(std::string_view text,
                         std::span<std::string const> overrides = {});
//! Same checks on an already parsed document
ParseResult parse_config_document(nlohmann::json const& doc);

//! Canonical text: sorted keys, two-space indent, trailing newline
std::string serialize(ExperimentConfig const& cfg);

//! SHA-256 of the canonical text, lowercase hex
std::string fingerprint(ExperimentConfig const& cfg);
std::string sha256_hex(std::string_view bytes);

//! Numeric preconditions of a kind (empty when the config is runnable)
std::vector<Diagnostic> precondition_problems(ExperimentConfig const& cfg);
}  // namespace tsns
