#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace v2l::knowledge {

struct KnowledgeParagraph {
    std::string attribute;
    std::string source_uri;
    std::string text;
    std::string retrieved_at;  ///< UTC, ISO-8601
};

/// Comment cache: one text file per distinct comment under objects/, named by
/// content hash, plus manifest.json mapping attribute -> file, URI, timestamp.
class KnowledgeCache {
public:
    explicit KnowledgeCache(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }
    std::optional<KnowledgeParagraph> lookup(const std::string& attribute) const;
    bool contains(const std::string& attribute) const;
    std::size_t size() const;

    /// Writes the text object and the updated manifest atomically. Thread-safe.
    void store(const KnowledgeParagraph& paragraph);

private:
    struct Entry {
        std::string file;
        std::string source_uri;
        std::string retrieved_at;
    };
    void write_manifest() const;

    std::filesystem::path root_;
    std::map<std::string, Entry> entries_;
    mutable std::mutex mutex_;
};

std::string utc_timestamp();

}  // namespace v2l::knowledge
