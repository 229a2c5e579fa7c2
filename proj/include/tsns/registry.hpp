#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsns
{
//! One mathematical statement and where it is exercised
struct ResultEntry
{
    std::string id;
    std::string statement;
    //! how the statement is probed numerically
    std::string probe;
    //! experiment kinds that exercise it
    std::vector<std::string> kinds;
};

std::span<ResultEntry const> list_experiments();

/*!
 * Help text for an experiment kind (every entry it exercises) or for a
 * single entry id. Throws std::invalid_argument for unknown names.
 */
std::string describe(std::string_view name);
}  // namespace tsns
