#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace v2l::corpus {

/// Lowercase, strip ASCII punctuation, split on whitespace.
std::vector<std::string> tokenize(std::string_view text);

/// Tense/plurality merge rules: an exceptions table consulted before the
/// suffix-stripping rules.
struct MergeRules {
    std::unordered_map<std::string, std::string> exceptions;

    /// The exceptions table shipped in data/lexicon/exceptions.txt.
    static MergeRules builtin();
    /// Parse "<surface> <canonical>" lines; '#' comments allowed.
    static MergeRules parse(std::string_view text);
    static MergeRules load(const std::filesystem::path& path);

    /// Entries from `other` override ours.
    void merge(const MergeRules& other);
};

/// Canonical attribute surface form of an already-lowercased token:
/// plural to singular, gerund/past to base verb. Unknown morphology is returned unchanged.
std::string canonicalize(std::string_view token, const MergeRules& rules);

/// Closed-class word list; membership is the only operation.
class FunctionWords {
public:
    FunctionWords() = default;
    explicit FunctionWords(std::set<std::string> words) : words_(std::move(words)) {}

    /// The list shipped in data/lexicon/function_words.txt.
    static FunctionWords builtin();
    static FunctionWords parse(std::string_view text);
    static FunctionWords load(const std::filesystem::path& path);

    bool contains(std::string_view word) const { return words_.count(std::string(word)) > 0; }
    std::size_t size() const noexcept { return words_.size(); }
    const std::set<std::string>& words() const noexcept { return words_; }

private:
    std::set<std::string> words_;
};

/// Term used for attribute counting: function words pass through untouched,
/// everything else is canonicalized.
std::string attribute_form(std::string_view token, const MergeRules& rules, const FunctionWords& function_words);

}  // namespace v2l::corpus
