#include "v2l/knowledge/cache.hpp"

#include <chrono>
#include <ctime>
#include "json.hpp"

#include "v2l/error.hpp"
#include "v2l/io.hpp"

namespace v2l::knowledge {

namespace fs = std::filesystem;
using namespace io;

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

KnowledgeCache::KnowledgeCache(fs::path root) : root_(std::move(root)) {
    const auto manifest = root_ / "manifest.json";
    if (!fs::exists(manifest)) return;
    const auto doc = load_versioned(manifest, "knowledge cache manifest");
    for (const auto& e : doc.at("entries")) {
        Entry entry{e.at("file").get<std::string>(), e.value("source_uri", ""), e.value("retrieved_at", "")};
        if (!fs::exists(root_ / entry.file))
            throw DataError("knowledge cache entry '" + e.at("attribute").get<std::string>() + "' points to missing file " +
                            entry.file);
        entries_[e.at("attribute").get<std::string>()] = std::move(entry);
    }
}

std::optional<KnowledgeParagraph> KnowledgeCache::lookup(const std::string& attribute) const {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(attribute);
    if (it == entries_.end()) return std::nullopt;
    return KnowledgeParagraph{attribute, it->second.source_uri, read_file(root_ / it->second.file),
                              it->second.retrieved_at};
}

bool KnowledgeCache::contains(const std::string& attribute) const {
    std::lock_guard lock(mutex_);
    return entries_.count(attribute) > 0;
}

std::size_t KnowledgeCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

void KnowledgeCache::store(const KnowledgeParagraph& p) {
    V2L_REQUIRE(!p.attribute.empty(), PreconditionError, "cache entry needs an attribute");
    std::lock_guard lock(mutex_);
    const std::string file = "objects/" + hex64(fnv1a64(p.text)) + ".txt";
    fs::create_directories(root_ / "objects");
    if (!fs::exists(root_ / file)) write_file_atomic(root_ / file, p.text);
    entries_[p.attribute] = Entry{file, p.source_uri, p.retrieved_at};
    write_manifest();
}

void KnowledgeCache::write_manifest() const {
    nlohmann::json doc{{"version", "v1"}, {"entries", nlohmann::json::array()}};
    for (const auto& [attribute, e] : entries_)
        doc["entries"].push_back(
            {{"attribute", attribute}, {"file", e.file}, {"source_uri", e.source_uri}, {"retrieved_at", e.retrieved_at}});
    fs::create_directories(root_);
    write_file_atomic(root_ / "manifest.json", dump_document(doc));
}

}  // namespace v2l::knowledge
