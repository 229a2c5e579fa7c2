#include "tsns/field_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tsns
{
namespace
{
constexpr char const* kFormat = "tsns-field";
constexpr char const* kOrdering = "lex-positive-half";
constexpr int kVersion = 1;
}  // namespace

std::string field_to_json(SpectralField const& u)
{
    nlohmann::json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["N"] = u.modes().cutoff();
    j["ordering"] = kOrdering;
    j["count"] = u.size();
    auto& recs = j["modes"] = nlohmann::json::array();
    for (std::size_t i = 0; i < u.size(); ++i)
    {
        auto const& k = u.modes()[i];
        nlohmann::json r = nlohmann::json::array({k.x, k.y, k.z});
        for (auto const& c : u[i])
        {
            r.push_back(c.real());
            r.push_back(c.imag());
        }
        recs.push_back(std::move(r));
    }
    return j.dump();
}

SpectralField field_from_json(std::string const& text)
{
    auto j = nlohmann::json::parse(text);
    if (j.at("format") != kFormat)
        throw std::runtime_error("not a tsns-field document");
    if (j.at("version").get<int>() != kVersion)
        throw std::runtime_error("unsupported tsns-field version");
    if (j.at("ordering") != kOrdering)
        throw std::runtime_error("unknown mode ordering convention");
    int cutoff = j.at("N").get<int>();
    auto const& recs = j.at("modes");
    if (recs.size() != j.at("count").get<std::size_t>())
        throw std::runtime_error("mode count does not match header");

    std::vector<WaveVector> ks;
    ks.reserve(recs.size());
    for (auto const& r : recs)
        ks.push_back({r.at(0).get<int>(), r.at(1).get<int>(),
                      r.at(2).get<int>()});
    auto cube = ModeSet::cube(cutoff);
    ModeSetPtr ms = cube;
    if (!std::equal(ks.begin(), ks.end(), cube->modes().begin(),
                    cube->modes().end()))
        ms = ModeSet::from_modes(cutoff, ks);

    SpectralField u(ms);
    for (std::size_t i = 0; i < recs.size(); ++i)
    {
        auto const& r = recs[i];
        if (r.size() != 9 || !(ms->modes()[i] == ks[i]))
            throw std::runtime_error("malformed or unordered mode record");
        for (int c = 0; c < 3; ++c)
            u[i][c] = cplx(r.at(3 + 2 * c).get<double>(),
                           r.at(4 + 2 * c).get<double>());
    }
    return u;
}

void save_field(std::filesystem::path const& path, SpectralField const& u)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open " + path.string());
    os << field_to_json(u) << '\n';
}

SpectralField load_field(std::filesystem::path const& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return field_from_json(ss.str());
}
}  // namespace tsns
