#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "v2l/corpus/records.hpp"
#include "v2l/corpus/text.hpp"

namespace v2l::corpus {

/// The c mined attribute terms, frequency-descending with lexicographic ties.
struct AttributeVocabulary {
    std::vector<std::string> terms;
    std::map<std::string, std::string> merge_map;  ///< surface form -> canonical term
    std::vector<std::string> stopwords_removed;

    std::size_t size() const noexcept { return terms.size(); }
    std::optional<std::size_t> index_of(std::string_view term) const;

    void save(const std::filesystem::path& path) const;
    static AttributeVocabulary load(const std::filesystem::path& path);
};

struct VocabularyOptions {
    std::size_t size = 256;            ///< c
    std::size_t stopword_count = 15;
    MergeRules rules = MergeRules::builtin();
    FunctionWords function_words = FunctionWords::builtin();
};

/// Throws DataError when fewer than `options.size` distinct terms survive stopword removal.
AttributeVocabulary build_attribute_vocabulary(std::span<const CaptionRecord> records,
                                               const VocabularyOptions& options = {});

/// Binary label vector y: entry j is 1 iff some caption token maps to terms[j].
std::vector<float> label_image_attributes(const CaptionRecord& record, const AttributeVocabulary& vocab,
                                          const VocabularyOptions& options = {});

}  // namespace v2l::corpus
