#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "v2l/corpus/records.hpp"

namespace v2l::corpus {

using TokenId = std::uint32_t;

struct TokenSequence {
    std::vector<TokenId> ids;
    std::size_t dictionary_size = 0;
};

/// Word dictionary with START, END, UNK at ids 0, 1, 2; remaining words follow
/// in frequency-descending, lexicographic order.
class WordDictionary {
public:
    static constexpr TokenId kStart = 0;
    static constexpr TokenId kEnd = 1;
    static constexpr TokenId kUnk = 2;
    static constexpr const char* kStartToken = "<start>";
    static constexpr const char* kEndToken = "<end>";
    static constexpr const char* kUnkToken = "<unk>";

    WordDictionary();
    /// `words` excludes the sentinels.
    explicit WordDictionary(std::vector<std::string> words);

    std::size_t size() const noexcept { return tokens_.size(); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    const std::string& token(TokenId id) const;
    TokenId id(std::string_view token) const;  ///< UNK when absent
    bool contains(std::string_view token) const;
    static bool is_sentinel(TokenId id) noexcept { return id <= kUnk; }

    void save(const std::filesystem::path& path) const;
    static WordDictionary load(const std::filesystem::path& path);

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> index_;
};

/// Count tokens of a text corpus and keep those occurring at least `min_count` times.
WordDictionary build_word_dictionary(std::span<const std::string> texts, std::size_t min_count = 5);
WordDictionary build_word_dictionary(std::span<const CaptionRecord> records, std::size_t min_count = 5);
/// Questions and answers together.
WordDictionary build_word_dictionary(std::span<const QaRecord> records, std::size_t min_count = 5);

TokenSequence encode(std::span<const std::string> tokens, const WordDictionary& dict, bool wrap);
std::vector<std::string> decode(std::span<const TokenId> ids, const WordDictionary& dict);

}  // namespace v2l::corpus
