#include "v2l/corpus/dictionary.hpp"

#include <algorithm>
#include <map>

#include "v2l/corpus/text.hpp"
#include "v2l/error.hpp"
#include "v2l/io.hpp"

namespace v2l::corpus {

WordDictionary::WordDictionary() : WordDictionary(std::vector<std::string>{}) {}

WordDictionary::WordDictionary(std::vector<std::string> words) {
    tokens_ = {kStartToken, kEndToken, kUnkToken};
    for (auto& w : words) tokens_.push_back(std::move(w));
    for (std::size_t i = 0; i < tokens_.size(); ++i)
        if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second)
            throw DataError("word dictionary has duplicate token '" + tokens_[i] + "'");
}

const std::string& WordDictionary::token(TokenId id) const {
    if (id >= tokens_.size()) throw PreconditionError("token id " + std::to_string(id) + " out of range");
    return tokens_[id];
}

TokenId WordDictionary::id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnk : it->second;
}

bool WordDictionary::contains(std::string_view token) const { return index_.count(std::string(token)) > 0; }

void WordDictionary::save(const std::filesystem::path& path) const {
    nlohmann::json doc = {{"version", "v1"}, {"kind", "word_dictionary"}, {"tokens", tokens_}};
    io::write_file_atomic(path, io::dump_document(doc));
}

WordDictionary WordDictionary::load(const std::filesystem::path& path) {
    const auto doc = io::load_versioned(path, "word dictionary");
    auto tokens = doc.at("tokens").get<std::vector<std::string>>();
    if (tokens.size() < 3 || tokens[kStart] != kStartToken || tokens[kEnd] != kEndToken ||
        tokens[kUnk] != kUnkToken)
        throw DataError("word dictionary '" + path.string() + "' does not start with the sentinel tokens");
    tokens.erase(tokens.begin(), tokens.begin() + 3);
    return WordDictionary(std::move(tokens));
}

WordDictionary build_word_dictionary(std::span<const std::string> texts, std::size_t min_count) {
    V2L_REQUIRE(min_count >= 1, PreconditionError, "min_count must be >= 1");
    std::map<std::string, std::size_t> counts;
    for (const auto& text : texts)
        for (auto& tok : tokenize(text)) ++counts[tok];
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [tok, n] : counts)
        if (n >= min_count && tok != WordDictionary::kStartToken && tok != WordDictionary::kEndToken &&
            tok != WordDictionary::kUnkToken)
            kept.emplace_back(tok, n);
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> words;
    words.reserve(kept.size());
    for (auto& [tok, n] : kept) words.push_back(tok);
    return WordDictionary(std::move(words));
}

WordDictionary build_word_dictionary(std::span<const CaptionRecord> records, std::size_t min_count) {
    std::vector<std::string> texts;
    for (const auto& r : records) texts.insert(texts.end(), r.captions.begin(), r.captions.end());
    return build_word_dictionary(std::span<const std::string>(texts), min_count);
}

WordDictionary build_word_dictionary(std::span<const QaRecord> records, std::size_t min_count) {
    std::vector<std::string> texts;
    for (const auto& r : records) {
        texts.push_back(r.question);
        std::string answer;
        for (const auto& t : r.answer) answer += t + " ";
        texts.push_back(answer);
    }
    return build_word_dictionary(std::span<const std::string>(texts), min_count);
}

TokenSequence encode(std::span<const std::string> tokens, const WordDictionary& dict, bool wrap) {
    TokenSequence seq;
    seq.dictionary_size = dict.size();
    if (wrap) seq.ids.push_back(WordDictionary::kStart);
    for (const auto& t : tokens) seq.ids.push_back(dict.id(t));
    if (wrap) seq.ids.push_back(WordDictionary::kEnd);
    return seq;
}

std::vector<std::string> decode(std::span<const TokenId> ids, const WordDictionary& dict) {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (TokenId id : ids) out.push_back(dict.token(id));
    return out;
}

}  // namespace v2l::corpus
