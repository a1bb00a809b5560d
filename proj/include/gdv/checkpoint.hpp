#pragma once

#include <cstdint>
#include <filesystem>

#include "gdv/dbn.hpp"
#include "gdv/mlp.hpp"

namespace gdv {

// GDVM model checkpoint, little-endian, parameters as f64:
//   "GDVM" u32 version=1 u32 kind u32 n_widths, n_widths u64 widths
//   kind 1 (MLP): u32 activation, f64 lr beta1 beta2 epsilon, u64 epochs
//                 batch_size seed, per layer W (out×in row-major) then b,
//                 u32 history_count, (f64 loss, f64 accuracy) per epoch
//   kind 2 (DBN): per RBM W (hidden×visible row-major), visible bias, hidden bias

enum class ModelKind : std::uint32_t { Mlp = 1, Dbn = 2 };

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_mlp(const std::filesystem::path &path, const MlpModel &model);
void save_dbn(const std::filesystem::path &path, const DbnModel &model);

/// Errors: IoError, BadMagic, UnsupportedVersion, TruncatedFile, InvalidInput
/// (wrong model kind).
MlpModel load_mlp(const std::filesystem::path &path);
DbnModel load_dbn(const std::filesystem::path &path);
ModelKind peek_model_kind(const std::filesystem::path &path);

}  // namespace gdv
