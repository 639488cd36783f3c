#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace v2l::metrics {

using Tokens = std::vector<std::string>;

/// BLEU-1..max_n of one candidate: clipped n-gram precisions, geometric mean,
/// brevity penalty against the closest reference length (ties to the shorter).
/// No smoothing. An empty candidate scores all zeros with a warning.
std::vector<double> bleu_n(std::span<const std::string> candidate, const std::vector<Tokens>& references,
                           std::size_t max_n = 4);

/// Corpus-level BLEU: clipped counts and lengths summed over all segments first.
std::vector<double> corpus_bleu(const std::vector<Tokens>& candidates, const std::vector<std::vector<Tokens>>& references,
                                std::size_t max_n = 4);

/// Single-rooted tree from a text file: the root alone on line 1, then one
/// "child parent" pair per line. depth(root) = 1.
class Taxonomy {
public:
    static Taxonomy parse(std::string_view text);
    static Taxonomy load(const std::filesystem::path& path);

    const std::string& root() const noexcept { return root_; }
    bool contains(std::string_view node) const;
    std::size_t depth(std::string_view node) const;
    std::string lowest_common_ancestor(std::string_view a, std::string_view b) const;
    std::size_t size() const noexcept { return parent_.size() + 1; }

private:
    std::string root_;
    std::map<std::string, std::string, std::less<>> parent_;
    std::map<std::string, std::size_t, std::less<>> depth_;
};

/// 2 depth(lca) / (depth(a) + depth(b)). Identical words score 1; a word
/// missing from the taxonomy scores 0 against any other word, with a warning.
double wup_similarity(std::string_view a, std::string_view b, const Taxonomy& taxonomy);

struct WupsOptions {
    bool down_weight = true;   ///< sub-threshold pairs score 0.1 * wup instead of 0
    double factor = 0.1;
};

/// Set form: min(prod_{p in pred} max_{t in truth} s(p, t), prod_{t in truth} max_{p in pred} s(p, t)).
double wups(std::span<const std::string> prediction, std::span<const std::string> truth, const Taxonomy& taxonomy,
            double threshold, const WupsOptions& options = {});

/// min(#matching human answers / 3, 1) after lowercase/whitespace normalisation.
/// Requires exactly 10 human answers.
double vqa_accuracy(std::string_view prediction, std::span<const std::string> human_answers);

std::string normalize_answer(std::string_view answer);

struct CategoryScore {
    std::string category;
    std::size_t count = 0;
    double score = 0;
};

struct EvalReport {
    std::string metric;
    std::size_t count = 0;
    double overall = 0;                     ///< instance mean
    std::vector<CategoryScore> categories;  ///< sorted by name, "others" last
};

const std::vector<std::string>& default_question_prefixes();

/// Category of a question: the longest configured prefix it starts with (on a
/// word boundary), else "others".
std::string question_category(std::string_view question, std::span<const std::string> prefixes);

EvalReport categorize_report(std::string metric, std::span<const double> scores,
                             std::span<const std::string> questions, std::span<const std::string> prefixes);

/// Tab-separated "metric category count score" lines, overall first.
std::string format_report(const EvalReport& report);

}  // namespace v2l::metrics
