#pragma once

#include <cstdint>
#include <string>

#include "omnisweep/sweep.hpp"

namespace omnisweep {

// Binary mapping-table cache. Files carry a format version and the hash of
// the rig they were built from; loading rejects either mismatch so a stale
// table can never be applied to a different rig.

void save_table(const std::string& path, const MappingTable& table, uint64_t rig_hash);

MappingTable load_table(const std::string& path, uint64_t expected_rig_hash);

// Hash recorded in a cache file without loading the payload.
uint64_t peek_table_rig_hash(const std::string& path);

}  // namespace omnisweep
