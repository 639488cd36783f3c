#include "httplib.h"

#include "v2l/error.hpp"
#include "v2l/knowledge/client.hpp"

namespace v2l::knowledge {

namespace {

std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    const auto scheme = endpoint.find("://");
    if (scheme == std::string::npos) throw PreconditionError("KB endpoint must be an http(s) URL: " + endpoint);
    const auto slash = endpoint.find('/', scheme + 3);
    if (slash == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

}  // namespace

HttpSparqlClient::HttpSparqlClient(std::string endpoint, HttpOptions options) : options_(options) {
    std::tie(origin_, path_) = split_endpoint(endpoint);
}

std::string HttpSparqlClient::query(const std::string& sparql) {
    httplib::Client client(origin_);
    const auto secs = options_.timeout.count() / 1000;
    const auto usecs = (options_.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_follow_location(true);
    const httplib::Params params{{"query", sparql}, {"format", "application/sparql-results+json"}};
    const httplib::Headers headers{{"Accept", "application/sparql-results+json"}};
    auto res = client.Get(path_, params, headers);
    if (!res) throw NetworkError("KB request to " + origin_ + path_ + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw NetworkError("KB request to " + origin_ + path_ + " returned HTTP " + std::to_string(res->status));
    return res->body;
}

std::string CountingClient::query(const std::string& sparql) {
    ++calls_;
    if (!inner_) throw NetworkError("network access is disabled");
    return inner_->query(sparql);
}

}  // namespace v2l::knowledge
