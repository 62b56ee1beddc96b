#pragma once

#include <string>

#include "gfte/model.hpp"

namespace gfte {

// On-disk model format: 8-byte magic "GFTECKP1", a little-endian u32 manifest
// length, a JSON manifest (config, vocab, tensor names/shapes/offsets, blob
// checksum), then the raw little-endian float32 parameter blob. Bit-exact and
// language-portable; training stores float32 so the round trip is identity.
inline constexpr char kCheckpointMagic[] = "GFTECKP1";
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const GfteModel<float>& model, const std::string& path);

// Rebuilds the model from its embedded config + vocab and overwrites the
// freshly initialized parameters with the stored blob. Version, shape, and
// corruption problems raise distinct DataErrors.
GfteModel<float> load_checkpoint(const std::string& path);

}  // namespace gfte
