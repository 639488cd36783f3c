#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace v2l::knowledge {

inline constexpr const char* kDefaultEndpoint = "https://dbpedia.org/sparql";

/// SELECT query for the English rdfs:comment of the resource labelled with the
/// capitalised attribute.
std::string build_sparql_query(std::string_view attribute);

struct CommentBinding {
    std::string source_uri;
    std::string text;
};

/// First binding of an application/sparql-results+json response, if any.
/// Throws DataError on a malformed body.
std::optional<CommentBinding> parse_comment_response(std::string_view body);

}  // namespace v2l::knowledge
