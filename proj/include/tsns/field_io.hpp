#pragma once

#include <filesystem>
#include <string>

#include "tsns/spectral.hpp"

namespace tsns
{
/*!
 * JSON snapshot format for a SpectralField.
 *
 * \code
 * {"format": "tsns-field", "version": 1, "N": 4,
 *  "ordering": "lex-positive-half", "count": 364,
 *  "modes": [[kx, ky, kz, re_x, im_x, re_y, im_y, re_z, im_z], ...]}
 * \endcode
 *
 * One record per stored representative, in mode-set order. Doubles are
 * written in shortest round-trip form, so save/load is bit-exact.
 */
std::string field_to_json(SpectralField const& u);
SpectralField field_from_json(std::string const& text);

void save_field(std::filesystem::path const& path, SpectralField const& u);
SpectralField load_field(std::filesystem::path const& path);
}  // namespace tsns
