#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "v2l/numeric/optim.hpp"

namespace v2l::numeric {

/// Checkpoints are two files: `<stem>.json` (manifest) and `<stem>.bin`
/// (little-endian float32 tensors concatenated in manifest order).
///
/// Manifest layout:
///   {"version": "v1", "kind": "...", "blob": "<stem>.bin",
///    "tensors": [{"name", "rows", "cols", "offset"}...], "meta": {...}}
struct CheckpointEntry {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0;  ///< byte offset into the blob
};

struct Checkpoint {
    std::string kind;
    nlohmann::json meta = nlohmann::json::object();
    std::vector<CheckpointEntry> entries;
    std::vector<Matrix> tensors;  ///< same order as entries

    const Matrix& tensor(const std::string& name) const;
};

inline constexpr const char* kFormatVersion = "v1";

std::filesystem::path manifest_path(const std::filesystem::path& stem);
std::filesystem::path blob_path(const std::filesystem::path& stem);

template <class Real>
void save_checkpoint(const std::filesystem::path& stem, const std::string& kind,
                     std::span<const NamedTensor<Real>> tensors, const nlohmann::json& meta);

Checkpoint load_checkpoint(const std::filesystem::path& stem, const std::string& expected_kind);

/// Copy tensors from a loaded checkpoint into model tensors, checking names and shapes.
template <class Real>
void restore_tensors(const Checkpoint& ckpt, std::span<const NamedTensor<Real>> tensors);

}  // namespace v2l::numeric
