#pragma once

#include <string>

#include "dfka/nets.hpp"

namespace dfka {

/// Writes `manifest.txt` (name, shape, byte offset per parameter, plus a
/// hash of the blob) and `params.bin` (concatenated little-endian
/// float32) under `dir`.
void save_checkpoint(const NamedParams& params, const std::string& dir);

/// Loads a checkpoint saved by save_checkpoint into the given parameter
/// set. The manifest must list exactly the same parameter paths with the
/// same shapes; any mismatch, truncation, or hash failure is rejected
/// with the offending path named.
void load_checkpoint(const NamedParams& params, const std::string& dir);

}  // namespace dfka
