#include <algorithm>
#include <exception>
#include <optional>
#include <thread>

#include "v2l/error.hpp"
#include "v2l/knowledge/client.hpp"
#include "v2l/knowledge/sparql.hpp"

namespace v2l::knowledge {

namespace {

std::optional<KnowledgeParagraph> fetch_one(const std::string& attribute, SparqlClient& client,
                                            const FetchOptions& options) {
    const auto query = build_sparql_query(attribute);
    for (std::size_t attempt = 1;; ++attempt) {
        try {
            const auto binding = parse_comment_response(client.query(query));
            if (!binding) return std::nullopt;
            return KnowledgeParagraph{attribute, binding->source_uri, binding->text, utc_timestamp()};
        } catch (const NetworkError& e) {
            if (attempt >= options.max_attempts)
                throw NetworkError("fetching '" + attribute + "' failed after " + std::to_string(attempt) +
                                   " attempts: " + e.what());
            std::this_thread::sleep_for(options.retry_backoff * attempt);
        }
    }
}

}  // namespace

FetchResult fetch_comments(const std::vector<std::string>& attributes, SparqlClient& client, KnowledgeCache& cache,
                           const FetchOptions& options) {
    FetchResult result;
    if (options.mode == FetchMode::offline) {
        for (const auto& a : attributes) {
            auto p = cache.lookup(a);
            if (!p) throw DataError("offline mode: attribute '" + a + "' is not in the knowledge cache " +
                                    cache.root().string());
            result.paragraphs.push_back(std::move(*p));
        }
        return result;
    }

    V2L_REQUIRE(options.max_attempts >= 1, PreconditionError, "max_attempts must be >= 1");
    const std::size_t n = attributes.size();
    std::vector<std::optional<KnowledgeParagraph>> found(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                found[i] = fetch_one(attributes[i], client, options);
                if (found[i]) cache.store(*found[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(options.parallelism, 1, std::max<std::size_t>(n, 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        if (found[i]) {
            result.paragraphs.push_back(std::move(*found[i]));
        } else {
            result.misses.push_back(attributes[i]);
            warn("knowledge base has no English comment for '" + attributes[i] + "'; skipped");
        }
    }
    return result;
}

}  // namespace v2l::knowledge
