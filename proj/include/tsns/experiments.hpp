#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsns/config.hpp"

namespace tsns
{
inline constexpr char kToolVersion[] = "0.1.0";

//! Output root: $TSNS_OUT if set, else ./runs
std::filesystem::path default_output_root();

struct OutputFile
{
    std::string name;
    std::uintmax_t bytes = 0;
    std::string sha256;
};

struct RunManifest
{
    int version = 1;
    std::string tool_version = kToolVersion;
    std::string kind;
    std::string fingerprint;
    std::uint64_t seed = 0;
    nlohmann::json config;
    std::string started;
    std::string finished;
    //! "ok" or "numeric_abort"
    std::string status = "ok";
    std::string abort_reason;
    //! all assertions of the summary held
    bool passed = false;
    std::vector<OutputFile> outputs;
    std::filesystem::path directory;

    nlohmann::json to_json() const;
    static RunManifest from_json(nlohmann::json const& j);
};

//! Filesystem failure, carrying the offending path
class IoError : public std::runtime_error
{
  public:
    IoError(std::filesystem::path path, std::string const& what);
    std::filesystem::path const& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

struct RunOptions
{
    std::filesystem::path root = default_output_root();
    //! called after each staged file is complete (test hook)
    std::function<void(std::string const&)> after_write;
};

/*!
 * Run one experiment and persist it as <root>/<run name>/.
 *
 * Files are written into a staging directory next to the final one and
 * the staging directory is renamed into place only after the manifest is
 * complete; a failure at any point removes the staging directory, so the
 * final directory is either the complete previous run or the complete new
 * one. Numeric aborts are not errors: they are recorded in the manifest.
 */
RunManifest run_experiment(ExperimentConfig const& cfg,
                           RunOptions const& opts = {});

//! The experiment's summary JSON from a finished run directory
nlohmann::json load_summary(std::filesystem::path const& run_dir);
RunManifest load_manifest(std::filesystem::path const& manifest_path);

struct ReplayResult
{
    bool identical = false;
    std::vector<std::string> mismatched;  //!< output names that differ
    RunManifest rerun;
};

/*!
 * Re-run the config stored in a manifest under scratch_root and compare
 * every output file byte for byte (by SHA-256) with the recorded ones.
 */
ReplayResult replay_manifest(std::filesystem::path const& manifest_path,
                             std::filesystem::path const& scratch_root);
}  // namespace tsns
