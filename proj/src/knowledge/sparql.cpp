#include "v2l/knowledge/sparql.hpp"

#include <cctype>
#include "json.hpp"

#include "v2l/error.hpp"

namespace v2l::knowledge {

namespace {

std::string literal_label(std::string_view attribute) {
    std::string out;
    for (std::size_t i = 0; i < attribute.size(); ++i) {
        char ch = attribute[i];
        if (i == 0) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        if (ch == '"' || ch == '\\') out.push_back('\\');
        out.push_back(ch);
    }
    return out;
}

}  // namespace

std::string build_sparql_query(std::string_view attribute) {
    V2L_REQUIRE(!attribute.empty(), PreconditionError, "SPARQL query needs a non-empty attribute");
    std::string q;
    q += "PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>\n";
    q += "SELECT ?entry ?comment WHERE {\n";
    q += "  ?entry rdfs:label \"" + literal_label(attribute) + "\"@en .\n";
    q += "  ?entry rdfs:comment ?comment .\n";
    q += "  FILTER (lang(?comment) = \"en\")\n";
    q += "}\n";
    return q;
}

std::optional<CommentBinding> parse_comment_response(std::string_view body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("SPARQL response is not JSON: ") + e.what());
    }
    const auto results = doc.find("results");
    if (results == doc.end() || !results->is_object() || !results->contains("bindings") ||
        !(*results)["bindings"].is_array())
        throw DataError("SPARQL response lacks results.bindings");
    for (const auto& b : (*results)["bindings"]) {
        if (!b.contains("comment")) continue;
        CommentBinding out;
        out.text = b["comment"].value("value", "");
        if (b.contains("entry")) out.source_uri = b["entry"].value("value", "");
        if (!out.text.empty()) return out;
    }
    return std::nullopt;
}

}  // namespace v2l::knowledge
