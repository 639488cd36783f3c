#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace v2l::io {

std::string read_file(const std::filesystem::path& path);

/// Write via a temporary sibling and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// Read a JSON-lines file. Blank lines are skipped; `on_record` receives each
/// parsed object together with its 1-based line number.
void read_jsonl(const std::filesystem::path& path,
                const std::function<void(const nlohmann::json&, std::size_t)>& on_record);

/// Serialize a versioned JSON document (stable key order, two-space indent, trailing newline).
std::string dump_document(const nlohmann::json& doc);

/// Load a JSON document and check its "version" field.
nlohmann::json load_versioned(const std::filesystem::path& path, std::string_view what);

}  // namespace v2l::io
