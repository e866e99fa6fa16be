#pragma once

#include <string>

#include "sag/model.hpp"

namespace sag {

/// Self-describing binary container: config + vocab header, then every
/// parameter tensor with name and shape, float64 raw bits. Save/load
/// round-trips are bit-exact.
void save_checkpoint(const MultiDomainModel& model, const std::string& path);

MultiDomainModel load_checkpoint(const std::string& path);

/// Deterministic byte serialization of a named tensor group (used for
/// update-locality checks as well as inside the checkpoint writer).
std::string serialize_tensors(
    const std::vector<std::pair<std::string, TensorPtr>>& params);

}  // namespace sag
