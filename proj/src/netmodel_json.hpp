#pragma once

#include "gridflex/netmodel.hpp"
#include "json_util.hpp"

namespace gridflex {

/// Records in the network document schema, also used by study configs.
Generator generator_from_json(const json::Json& g, int horizon);
Fsp fsp_from_json(const json::Json& f);

}  // namespace gridflex
