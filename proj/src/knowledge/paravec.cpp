#include "v2l/knowledge/paravec.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "v2l/corpus/text.hpp"
#include "v2l/error.hpp"
#include "v2l/io.hpp"
#include "v2l/numeric/checkpoint.hpp"
#include "v2l/numeric/nonlinear.hpp"

namespace v2l::knowledge {

namespace {

constexpr std::size_t kTableSize = 1 << 20;
constexpr double kMinLearningRateFraction = 1e-4;

struct Encoded {
    std::vector<std::size_t> ids;
};

Encoded encode_text(const ParagraphModel& m, std::string_view text) {
    Encoded e;
    for (const auto& tok : corpus::tokenize(text)) {
        const auto i = m.index_of(tok);
        if (i >= 0) e.ids.push_back(static_cast<std::size_t>(i));
    }
    return e;
}

std::size_t sample_negative(const ParagraphModel& m, numeric::Rng& rng) {
    return m.unigram_table[rng.below(m.unigram_table.size())];
}

/// One PV-DM update for the word at `pos`. Always updates the doc vector;
/// word parameters are updated only through `trainable`. Returns the loss.
double train_position(const ParagraphModel& m, ParagraphModel* trainable, std::span<float> doc_vec,
                      const std::vector<std::size_t>& ids, std::size_t pos, double lr, numeric::Rng& rng,
                      std::vector<float>& h, std::vector<float>& grad_h) {
    const std::size_t dim = m.dim();
    const std::size_t w = m.config.window;
    const std::size_t lo = pos >= w ? pos - w : 0;
    const std::size_t hi = std::min(ids.size(), pos + w + 1);

    std::copy(doc_vec.begin(), doc_vec.end(), h.begin());
    std::size_t count = 1;
    for (std::size_t j = lo; j < hi; ++j) {
        if (j == pos) continue;
        const auto row = m.word_in.row(ids[j]);
        for (std::size_t k = 0; k < dim; ++k) h[k] += row[k];
        ++count;
    }
    const float inv = 1.0f / static_cast<float>(count);
    for (float& x : h) x *= inv;
    std::fill(grad_h.begin(), grad_h.end(), 0.0f);

    double loss = 0;
    const std::size_t target = ids[pos];
    for (std::size_t s = 0; s <= m.config.negative; ++s) {
        std::size_t word = target;
        float label = 1.0f;
        if (s > 0) {
            word = sample_negative(m, rng);
            if (word == target) continue;
            label = 0.0f;
        }
        const auto out = m.word_out.row(word);
        double z = 0;
        for (std::size_t k = 0; k < dim; ++k) z += static_cast<double>(out[k]) * h[k];
        loss += label > 0 ? numeric::softplus(-z) : numeric::softplus(z);
        const float g = static_cast<float>((label - numeric::sigmoid(z)) * lr);
        for (std::size_t k = 0; k < dim; ++k) grad_h[k] += g * out[k];
        if (trainable) {
            auto w_out = trainable->word_out.row(word);
            for (std::size_t k = 0; k < dim; ++k) w_out[k] += g * h[k];
        }
    }
    for (std::size_t k = 0; k < dim; ++k) doc_vec[k] += grad_h[k] * inv;
    if (trainable)
        for (std::size_t j = lo; j < hi; ++j) {
            if (j == pos) continue;
            auto row = trainable->word_in.row(ids[j]);
            for (std::size_t k = 0; k < dim; ++k) row[k] += grad_h[k] * inv;
        }
    return loss;
}

void random_row(std::span<float> row, std::size_t dim, numeric::Rng& rng) {
    const double bound = 0.5 / static_cast<double>(dim);
    for (float& x : row) x = static_cast<float>(rng.uniform(-bound, bound));
}

double decayed(double lr0, std::size_t done, std::size_t total) {
    const double frac = total == 0 ? 0.0 : static_cast<double>(done) / static_cast<double>(total);
    return lr0 * std::max(kMinLearningRateFraction, 1.0 - frac);
}

}  // namespace

void ParagraphConfig::validate() const {
    V2L_REQUIRE(dim >= 1, PreconditionError, "paragraph dim must be >= 1");
    V2L_REQUIRE(window >= 1, PreconditionError, "paragraph window must be >= 1");
    V2L_REQUIRE(learning_rate > 0, PreconditionError, "paragraph learning rate must be > 0");
    V2L_REQUIRE(min_count >= 1, PreconditionError, "min_count must be >= 1");
}

std::ptrdiff_t ParagraphModel::index_of(std::string_view word) const {
    const auto it = index.find(std::string(word));
    return it == index.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

void ParagraphModel::rebuild_tables() {
    index.clear();
    for (std::size_t i = 0; i < words.size(); ++i) index[words[i]] = i;
    unigram_table.clear();
    if (words.empty()) return;
    double total = 0;
    for (auto c : counts) total += std::pow(static_cast<double>(c), 0.75);
    unigram_table.reserve(kTableSize);
    std::size_t w = 0;
    double cum = std::pow(static_cast<double>(counts[0]), 0.75) / total;
    for (std::size_t a = 0; a < kTableSize; ++a) {
        unigram_table.push_back(w);
        if (static_cast<double>(a + 1) / kTableSize > cum && w + 1 < words.size()) {
            ++w;
            cum += std::pow(static_cast<double>(counts[w]), 0.75) / total;
        }
    }
}

ParagraphModel train_paragraph_model(const std::vector<std::string>& documents, const ParagraphConfig& config,
                                     numeric::Rng& rng) {
    config.validate();
    V2L_REQUIRE(documents.size() >= 2, PreconditionError, "paragraph model needs at least two documents");

    std::map<std::string, std::uint64_t> freq;
    std::vector<std::vector<std::string>> tokenized;
    for (const auto& d : documents) {
        tokenized.push_back(corpus::tokenize(d));
        for (const auto& t : tokenized.back()) ++freq[t];
    }
    std::vector<std::pair<std::string, std::uint64_t>> sorted(freq.begin(), freq.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

    ParagraphModel m;
    m.config = config;
    for (const auto& [w, c] : sorted)
        if (c >= config.min_count) {
            m.words.push_back(w);
            m.counts.push_back(c);
        }
    V2L_REQUIRE(!m.words.empty(), DataError, "paragraph corpus has no words above min_count");
    m.rebuild_tables();

    const std::size_t dim = config.dim;
    m.word_in = numeric::Matrix(m.words.size(), dim);
    m.word_out = numeric::Matrix(m.words.size(), dim);
    m.doc = numeric::Matrix(documents.size(), dim);
    for (std::size_t i = 0; i < m.words.size(); ++i) random_row(m.word_in.row(i), dim, rng);
    for (std::size_t d = 0; d < documents.size(); ++d) random_row(m.doc.row(d), dim, rng);

    std::vector<std::vector<std::size_t>> ids;
    for (const auto& toks : tokenized) {
        std::vector<std::size_t> row;
        for (const auto& t : toks)
            if (const auto i = m.index_of(t); i >= 0) row.push_back(static_cast<std::size_t>(i));
        ids.push_back(std::move(row));
    }

    std::vector<std::size_t> order(documents.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<float> h(dim), grad_h(dim);
    const std::size_t total = config.epochs * documents.size();
    std::size_t done = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle<std::size_t>(order);
        double loss = 0;
        std::size_t positions = 0;
        for (auto d : order) {
            const double lr = decayed(config.learning_rate, done++, total);
            for (std::size_t pos = 0; pos < ids[d].size(); ++pos) {
                loss += train_position(m, &m, m.doc.row(d), ids[d], pos, lr, rng, h, grad_h);
                ++positions;
            }
        }
        m.epoch_loss.push_back(positions ? loss / static_cast<double>(positions) : 0.0);
    }
    return m;
}

std::vector<float> infer_vector(const ParagraphModel& model, std::string_view text) {
    const std::size_t dim = model.dim();
    const auto enc = encode_text(model, text);
    std::vector<float> vec(dim, 0.0f);
    if (enc.ids.empty()) {
        warn("paragraph text has no in-vocabulary words; using the zero vector");
        return vec;
    }
    numeric::Rng rng(model.config.infer_seed ^ io::fnv1a64(text));
    random_row(vec, dim, rng);
    std::vector<float> h(dim), grad_h(dim);
    const std::size_t steps = model.config.infer_steps;
    for (std::size_t step = 0; step < steps; ++step) {
        const double lr = decayed(model.config.learning_rate, step, steps);
        for (std::size_t pos = 0; pos < enc.ids.size(); ++pos) train_position(model, nullptr, vec, enc.ids, pos, lr, rng, h, grad_h);
    }
    return vec;
}

void ParagraphModel::save(const std::filesystem::path& stem) {
    std::vector<numeric::NamedTensor<float>> tensors{
        {"paravec.word_in", &word_in, true}, {"paravec.word_out", &word_out, true}, {"paravec.doc", &doc, true}};
    const nlohmann::json meta{{"dim", config.dim},
                              {"window", config.window},
                              {"negative", config.negative},
                              {"epochs", config.epochs},
                              {"learning_rate", config.learning_rate},
                              {"min_count", config.min_count},
                              {"infer_steps", config.infer_steps},
                              {"infer_seed", config.infer_seed},
                              {"words", words},
                              {"counts", counts},
                              {"epoch_loss", epoch_loss}};
    numeric::save_checkpoint<float>(stem, "paravec", tensors, meta);
}

ParagraphModel ParagraphModel::load(const std::filesystem::path& stem) {
    const auto ckpt = numeric::load_checkpoint(stem, "paravec");
    const auto& meta = ckpt.meta;
    ParagraphModel m;
    m.config.dim = meta.at("dim").get<std::size_t>();
    m.config.window = meta.at("window").get<std::size_t>();
    m.config.negative = meta.at("negative").get<std::size_t>();
    m.config.epochs = meta.at("epochs").get<std::size_t>();
    m.config.learning_rate = meta.at("learning_rate").get<double>();
    m.config.min_count = meta.at("min_count").get<std::size_t>();
    m.config.infer_steps = meta.at("infer_steps").get<std::size_t>();
    m.config.infer_seed = meta.at("infer_seed").get<std::uint64_t>();
    m.words = meta.at("words").get<std::vector<std::string>>();
    m.counts = meta.at("counts").get<std::vector<std::uint64_t>>();
    m.epoch_loss = meta.value("epoch_loss", std::vector<double>{});
    V2L_REQUIRE(m.words.size() == m.counts.size(), DataError, "paragraph model words and counts differ in length");
    m.word_in = ckpt.tensor("paravec.word_in");
    m.word_out = ckpt.tensor("paravec.word_out");
    m.doc = ckpt.tensor("paravec.doc");
    V2L_REQUIRE(m.word_in.rows() == m.words.size() && m.word_in.cols() == m.config.dim, DataError,
                "paragraph model word embedding shape does not match its vocabulary");
    m.rebuild_tables();
    return m;
}

}  // namespace v2l::knowledge
