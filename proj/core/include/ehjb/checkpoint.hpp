#ifndef EHJB_CHECKPOINT_HPP
#define EHJB_CHECKPOINT_HPP

#include <filesystem>
#include <string>

#include "ehjb/diffnet.hpp"

namespace ehjb {

inline constexpr int kCheckpointFormatVersion = 1;

/// Checkpoint layout:
///   bytes 0..7   magic "EHJBCKPT"
///   bytes 8..15  little-endian u64 header length H
///   next H bytes UTF-8 JSON header with keys "format_version", "layer_sizes",
///                "seed", "weights", "biases"; the last two list, per layer,
///                the payload offset (in f64 elements) and shape
///   remainder    payload of little-endian f64, weights row-major per layer
///                followed by biases
void save_checkpoint(const MlpParams& params, const std::filesystem::path& path);
MlpParams load_checkpoint(const std::filesystem::path& path);

std::string encode_checkpoint(const MlpParams& params);
MlpParams decode_checkpoint(const std::string& bytes);

}  // namespace ehjb

#endif  // EHJB_CHECKPOINT_HPP
