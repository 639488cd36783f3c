#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "v2l/numeric/matrix.hpp"
#include "v2l/numeric/rng.hpp"

namespace v2l::knowledge {

struct ParagraphConfig {
    std::size_t dim = 500;
    std::size_t window = 5;            ///< context words on each side
    std::size_t negative = 5;          ///< negative samples per target
    std::size_t epochs = 20;
    double learning_rate = 0.025;      ///< decays linearly to learning_rate * 1e-4
    std::size_t min_count = 1;
    std::size_t infer_steps = 20;
    std::uint64_t infer_seed = 1;

    void validate() const;
};

/// Distributed-memory paragraph vectors (PV-DM, mean of context) trained with
/// negative sampling.
struct ParagraphModel {
    ParagraphConfig config;
    std::vector<std::string> words;
    std::vector<std::uint64_t> counts;
    numeric::Matrix word_in;    ///< |V| x dim
    numeric::Matrix word_out;   ///< |V| x dim
    numeric::Matrix doc;        ///< training documents x dim
    std::vector<double> epoch_loss;

    std::size_t dim() const noexcept { return config.dim; }
    std::ptrdiff_t index_of(std::string_view word) const;

    void save(const std::filesystem::path& stem);
    static ParagraphModel load(const std::filesystem::path& stem);

    // built from `words`
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::size_t> unigram_table;
    void rebuild_tables();
};

ParagraphModel train_paragraph_model(const std::vector<std::string>& documents, const ParagraphConfig& config,
                                     numeric::Rng& rng);

/// Fits a fresh paragraph vector with every word parameter frozen. The RNG is
/// seeded from the configured inference seed and the text, so the result is a
/// pure function of (model, text). All-OOV text yields the zero vector.
std::vector<float> infer_vector(const ParagraphModel& model, std::string_view text);

}  // namespace v2l::knowledge
