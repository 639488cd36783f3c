#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "v2l/knowledge/paravec.hpp"

namespace v2l::knowledge {

/// Maps text to a fixed-length vector.
class TextEncoder {
public:
    virtual ~TextEncoder() = default;
    virtual std::vector<float> encode(std::string_view text) const = 0;
};

class ParagraphEncoder : public TextEncoder {
public:
    explicit ParagraphEncoder(const ParagraphModel& model) : model_(model) {}
    std::vector<float> encode(std::string_view text) const override { return infer_vector(model_, text); }

private:
    const ParagraphModel& model_;
};

/// Cosine similarity; 0 when either vector is zero.
double cosine(std::span<const float> a, std::span<const float> b);

/// Indices of `candidates` by descending cosine to `query`; zero vectors rank
/// last and ties keep input order.
std::vector<std::size_t> rank_by_cosine(std::span<const float> query, const std::vector<std::vector<float>>& candidates);

/// The first k of rank_by_cosine. Throws PreconditionError when k > n or n == 0.
std::vector<std::size_t> select_top_k(std::span<const float> query, const std::vector<std::vector<float>>& candidates,
                                      std::size_t k);

struct KnowledgeSelection {
    std::vector<std::size_t> indices;  ///< rank order
    std::string text;                  ///< selected paragraphs joined with single spaces
    std::vector<float> vector;         ///< encoding of `text`
};

KnowledgeSelection select_knowledge(const TextEncoder& encoder, std::string_view question,
                                    const std::vector<std::string>& paragraphs, std::size_t k);

/// All paragraphs, in the given (attribute-score) order, joined and encoded once.
KnowledgeSelection knowledge_vector_unselected(const TextEncoder& encoder, const std::vector<std::string>& paragraphs);

}  // namespace v2l::knowledge
