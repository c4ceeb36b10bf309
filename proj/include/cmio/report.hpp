#pragma once

#include <string>

#include "cmio/cmio.hpp"

namespace cmio {

/// JSON text of a selection report, including every per-k step and every
/// conditional-independence decision. Stable key order; doubles are written
/// in shortest round-trip form.
std::string report_json(const SelectionReport& rep, int indent = 2);

}  // namespace cmio
