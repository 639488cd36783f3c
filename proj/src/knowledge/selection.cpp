#include "v2l/knowledge/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "v2l/error.hpp"

namespace v2l::knowledge {

namespace {

double norm(std::span<const float> v) {
    double s = 0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

std::string join(const std::vector<std::string>& texts, std::span<const std::size_t> order) {
    std::string out;
    for (auto i : order) {
        if (!out.empty()) out.push_back(' ');
        out += texts[i];
    }
    return out;
}

}  // namespace

double cosine(std::span<const float> a, std::span<const float> b) {
    V2L_REQUIRE(a.size() == b.size(), ShapeError, "cosine of vectors with different lengths");
    const double na = norm(a), nb = norm(b);
    if (na == 0 || nb == 0) return 0.0;
    double dot = 0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * b[i];
    return dot / (na * nb);
}

std::vector<std::size_t> rank_by_cosine(std::span<const float> query, const std::vector<std::vector<float>>& candidates) {
    struct Key {
        bool zero;
        double sim;
    };
    const bool query_zero = norm(query) == 0;
    std::vector<Key> keys;
    for (const auto& c : candidates) {
        const bool zero = query_zero || norm(c) == 0;
        keys.push_back({zero, zero ? 0.0 : cosine(query, c)});
    }
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (keys[a].zero != keys[b].zero) return !keys[a].zero;
        return keys[a].sim > keys[b].sim;
    });
    return order;
}

std::vector<std::size_t> select_top_k(std::span<const float> query, const std::vector<std::vector<float>>& candidates,
                                      std::size_t k) {
    V2L_REQUIRE(!candidates.empty(), PreconditionError, "knowledge selection needs at least one paragraph");
    V2L_REQUIRE(k >= 1 && k <= candidates.size(), PreconditionError,
                "knowledge selection k=" + std::to_string(k) + " must be in [1, " + std::to_string(candidates.size()) +
                    "]");
    auto order = rank_by_cosine(query, candidates);
    order.resize(k);
    return order;
}

KnowledgeSelection select_knowledge(const TextEncoder& encoder, std::string_view question,
                                    const std::vector<std::string>& paragraphs, std::size_t k) {
    V2L_REQUIRE(!paragraphs.empty(), PreconditionError, "knowledge selection needs at least one paragraph");
    V2L_REQUIRE(k >= 1 && k <= paragraphs.size(), PreconditionError,
                "knowledge selection k=" + std::to_string(k) + " exceeds the " + std::to_string(paragraphs.size()) +
                    " paragraphs");
    const auto q = encoder.encode(question);
    std::vector<std::vector<float>> vecs;
    for (const auto& p : paragraphs) vecs.push_back(encoder.encode(p));
    KnowledgeSelection sel;
    sel.indices = select_top_k(q, vecs, k);
    sel.text = join(paragraphs, sel.indices);
    sel.vector = encoder.encode(sel.text);
    return sel;
}

KnowledgeSelection knowledge_vector_unselected(const TextEncoder& encoder, const std::vector<std::string>& paragraphs) {
    V2L_REQUIRE(!paragraphs.empty(), PreconditionError, "knowledge vector needs at least one paragraph");
    KnowledgeSelection sel;
    sel.indices.resize(paragraphs.size());
    std::iota(sel.indices.begin(), sel.indices.end(), 0);
    sel.text = join(paragraphs, sel.indices);
    sel.vector = encoder.encode(sel.text);
    return sel;
}

}  // namespace v2l::knowledge
