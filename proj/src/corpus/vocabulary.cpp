#include "v2l/corpus/vocabulary.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "v2l/error.hpp"
#include "v2l/io.hpp"

namespace v2l::corpus {

namespace {

using CountEntry = std::pair<std::string, std::size_t>;

std::vector<CountEntry> ranked(const std::unordered_map<std::string, std::size_t>& counts) {
    std::vector<CountEntry> out(counts.begin(), counts.end());
    std::sort(out.begin(), out.end(), [](const CountEntry& a, const CountEntry& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

}  // namespace

std::optional<std::size_t> AttributeVocabulary::index_of(std::string_view term) const {
    for (std::size_t i = 0; i < terms.size(); ++i)
        if (terms[i] == term) return i;
    return std::nullopt;
}

AttributeVocabulary build_attribute_vocabulary(std::span<const CaptionRecord> records,
                                               const VocabularyOptions& options) {
    V2L_REQUIRE(options.size >= 1, PreconditionError, "attribute vocabulary size must be >= 1");
    V2L_REQUIRE(!records.empty(), PreconditionError, "attribute vocabulary needs a non-empty corpus");

    std::unordered_map<std::string, std::size_t> counts;
    std::map<std::string, std::string> surface_to_term;
    for (const auto& record : records)
        for (const auto& caption : record.captions)
            for (const auto& token : tokenize(caption)) {
                auto term = attribute_form(token, options.rules, options.function_words);
                ++counts[term];
                surface_to_term.emplace(token, std::move(term));
            }

    AttributeVocabulary vocab;
    std::set<std::string> removed;
    const auto order = ranked(counts);
    for (const auto& [term, count] : order) {
        if (removed.size() >= options.stopword_count) break;
        if (options.function_words.contains(term)) {
            removed.insert(term);
            vocab.stopwords_removed.push_back(term);
        }
    }
    for (const auto& [term, count] : order) {
        if (vocab.terms.size() == options.size) break;
        if (!removed.count(term)) vocab.terms.push_back(term);
    }
    if (vocab.terms.size() < options.size)
        throw DataError("attribute vocabulary shortfall: requested " + std::to_string(options.size) +
                        " terms but only " + std::to_string(vocab.terms.size()) +
                        " distinct terms remain after removing " + std::to_string(removed.size()) + " stopwords");

    const std::set<std::string> kept(vocab.terms.begin(), vocab.terms.end());
    for (const auto& [surface, term] : surface_to_term)
        if (kept.count(term)) vocab.merge_map.emplace(surface, term);
    return vocab;
}

std::vector<float> label_image_attributes(const CaptionRecord& record, const AttributeVocabulary& vocab,
                                          const VocabularyOptions& options) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < vocab.terms.size(); ++j) index.emplace(vocab.terms[j], j);
    std::vector<float> labels(vocab.size(), 0.0f);
    for (const auto& caption : record.captions)
        for (const auto& token : tokenize(caption)) {
            auto it = vocab.merge_map.find(token);
            const std::string term =
                it != vocab.merge_map.end() ? it->second : attribute_form(token, options.rules, options.function_words);
            if (auto hit = index.find(term); hit != index.end()) labels[hit->second] = 1.0f;
        }
    return labels;
}

void AttributeVocabulary::save(const std::filesystem::path& path) const {
    nlohmann::json doc = {{"version", "v1"},
                          {"kind", "attribute_vocabulary"},
                          {"terms", terms},
                          {"stopwords_removed", stopwords_removed},
                          {"merge_map", merge_map}};
    io::write_file_atomic(path, io::dump_document(doc));
}

AttributeVocabulary AttributeVocabulary::load(const std::filesystem::path& path) {
    const auto doc = io::load_versioned(path, "attribute vocabulary");
    AttributeVocabulary vocab;
    vocab.terms = doc.at("terms").get<std::vector<std::string>>();
    vocab.stopwords_removed = doc.value("stopwords_removed", std::vector<std::string>{});
    vocab.merge_map = doc.value("merge_map", std::map<std::string, std::string>{});
    const std::set<std::string> unique(vocab.terms.begin(), vocab.terms.end());
    if (unique.size() != vocab.terms.size())
        throw DataError("attribute vocabulary '" + path.string() + "' has duplicate terms");
    for (const auto& [surface, term] : vocab.merge_map)
        if (!unique.count(term))
            throw DataError("attribute vocabulary '" + path.string() + "': merge target '" + term +
                            "' is not a term");
    return vocab;
}

}  // namespace v2l::corpus
