#pragma once

#include <atomic>
#include <chrono>
#include <string>
#include <vector>

#include "v2l/knowledge/cache.hpp"

namespace v2l::knowledge {

/// Sends one SPARQL query and returns the raw JSON response body.
/// Throws NetworkError on transport failure or a non-2xx status.
class SparqlClient {
public:
    virtual ~SparqlClient() = default;
    virtual std::string query(const std::string& sparql) = 0;
};

struct HttpOptions {
    std::chrono::milliseconds timeout{10000};
};

/// HTTP(S) GET against `endpoint` with query=...&format=application/sparql-results+json.
class HttpSparqlClient : public SparqlClient {
public:
    explicit HttpSparqlClient(std::string endpoint, HttpOptions options = {});
    std::string query(const std::string& sparql) override;

private:
    std::string origin_;
    std::string path_;
    HttpOptions options_;
};

/// Forwards to another client (or refuses, if none) and counts calls.
class CountingClient : public SparqlClient {
public:
    explicit CountingClient(SparqlClient* inner = nullptr) : inner_(inner) {}
    std::string query(const std::string& sparql) override;
    std::size_t calls() const noexcept { return calls_.load(); }

private:
    SparqlClient* inner_;
    std::atomic<std::size_t> calls_{0};
};

enum class FetchMode { offline, live };

struct FetchOptions {
    FetchMode mode = FetchMode::offline;
    std::size_t max_attempts = 3;
    std::chrono::milliseconds retry_backoff{250};
    std::size_t parallelism = 4;
};

struct FetchResult {
    std::vector<KnowledgeParagraph> paragraphs;  ///< in input order, misses skipped
    std::vector<std::string> misses;             ///< attributes with no comment in the KB
};

/// Offline: every attribute must be cached; the client is never called.
/// Live: queries the KB for every attribute and writes hits through to the cache.
FetchResult fetch_comments(const std::vector<std::string>& attributes, SparqlClient& client, KnowledgeCache& cache,
                           const FetchOptions& options = {});

}  // namespace v2l::knowledge
