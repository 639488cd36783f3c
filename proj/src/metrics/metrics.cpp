#include "v2l/metrics/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "v2l/error.hpp"
#include "v2l/io.hpp"

namespace v2l::metrics {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(std::span<const std::string> tokens, std::size_t n) {
    NgramCounts out;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++out[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
    return out;
}

struct BleuStats {
    std::vector<std::size_t> matched, total;
    std::size_t cand_len = 0, ref_len = 0;
    explicit BleuStats(std::size_t max_n) : matched(max_n, 0), total(max_n, 0) {}
};

void accumulate(BleuStats& s, std::span<const std::string> cand, const std::vector<Tokens>& refs) {
    V2L_REQUIRE(!refs.empty(), PreconditionError, "BLEU needs at least one reference");
    const std::size_t c = cand.size();
    std::size_t best = refs[0].size();
    for (const auto& r : refs) {
        const auto d = [&](std::size_t len) { return len > c ? len - c : c - len; };
        if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
    }
    s.cand_len += c;
    s.ref_len += best;
    for (std::size_t n = 1; n <= s.matched.size(); ++n) {
        const auto cg = ngrams(cand, n);
        NgramCounts max_ref;
        for (const auto& r : refs)
            for (const auto& [g, k] : ngrams(r, n)) max_ref[g] = std::max(max_ref[g], k);
        for (const auto& [g, k] : cg) {
            const auto it = max_ref.find(g);
            s.matched[n - 1] += std::min(k, it == max_ref.end() ? std::size_t{0} : it->second);
            s.total[n - 1] += k;
        }
    }
}

std::vector<double> finish(const BleuStats& s) {
    const std::size_t max_n = s.matched.size();
    std::vector<double> out(max_n, 0.0);
    if (s.cand_len == 0) return out;
    const double bp = s.cand_len < s.ref_len
                          ? std::exp(1.0 - static_cast<double>(s.ref_len) / static_cast<double>(s.cand_len))
                          : 1.0;
    double log_sum = 0;
    for (std::size_t n = 0; n < max_n; ++n) {
        if (s.matched[n] == 0 || s.total[n] == 0) break;  // later orders stay 0
        log_sum += std::log(static_cast<double>(s.matched[n]) / static_cast<double>(s.total[n]));
        out[n] = bp * std::exp(log_sum / static_cast<double>(n + 1));
    }
    return out;
}

std::string trim_lower(std::string_view s) {
    std::string out;
    bool space = false;
    for (char ch : s) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    return out;
}

}  // namespace

std::vector<double> bleu_n(std::span<const std::string> candidate, const std::vector<Tokens>& references,
                           std::size_t max_n) {
    V2L_REQUIRE(max_n >= 1, PreconditionError, "BLEU order must be >= 1");
    if (candidate.empty()) {
        warn("BLEU of an empty candidate is 0");
        return std::vector<double>(max_n, 0.0);
    }
    BleuStats s(max_n);
    accumulate(s, candidate, references);
    return finish(s);
}

std::vector<double> corpus_bleu(const std::vector<Tokens>& candidates, const std::vector<std::vector<Tokens>>& references,
                                std::size_t max_n) {
    V2L_REQUIRE(max_n >= 1, PreconditionError, "BLEU order must be >= 1");
    V2L_REQUIRE(candidates.size() == references.size(), PreconditionError,
                "corpus BLEU needs one reference set per candidate");
    BleuStats s(max_n);
    for (std::size_t i = 0; i < candidates.size(); ++i) accumulate(s, candidates[i], references[i]);
    return finish(s);
}

Taxonomy Taxonomy::parse(std::string_view text) {
    Taxonomy t;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream fields(line);
        std::vector<std::string> parts;
        for (std::string f; fields >> f;) parts.push_back(f);
        if (parts.empty()) continue;
        if (t.root_.empty()) {
            if (parts.size() != 1) throw DataError("taxonomy line " + std::to_string(lineno) + ": first line must name the root alone");
            t.root_ = parts[0];
            continue;
        }
        if (parts.size() != 2)
            throw DataError("taxonomy line " + std::to_string(lineno) + ": expected \"child parent\"");
        if (parts[0] == t.root_) throw DataError("taxonomy line " + std::to_string(lineno) + ": the root cannot have a parent");
        if (!t.parent_.emplace(parts[0], parts[1]).second)
            throw DataError("taxonomy line " + std::to_string(lineno) + ": '" + parts[0] + "' has two parents");
    }
    if (t.root_.empty()) throw DataError("taxonomy is empty");

    t.depth_[t.root_] = 1;
    for (const auto& [child, parent] : t.parent_) {
        std::vector<std::string> chain;
        std::string node = child;
        std::set<std::string> seen;
        while (!t.depth_.count(node)) {
            if (!seen.insert(node).second) throw DataError("taxonomy has a cycle through '" + node + "'");
            const auto it = t.parent_.find(node);
            if (it == t.parent_.end()) throw DataError("taxonomy node '" + node + "' is not connected to the root");
            chain.push_back(node);
            node = it->second;
        }
        std::size_t d = t.depth_.at(node);
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) t.depth_[*it] = ++d;
    }
    return t;
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) { return parse(io::read_file(path)); }

bool Taxonomy::contains(std::string_view node) const { return depth_.find(node) != depth_.end(); }

std::size_t Taxonomy::depth(std::string_view node) const {
    const auto it = depth_.find(node);
    if (it == depth_.end()) throw PreconditionError("'" + std::string(node) + "' is not in the taxonomy");
    return it->second;
}

std::string Taxonomy::lowest_common_ancestor(std::string_view a, std::string_view b) const {
    std::string x(a), y(b);
    std::size_t dx = depth(x), dy = depth(y);
    while (dx > dy) x = parent_.find(x)->second, --dx;
    while (dy > dx) y = parent_.find(y)->second, --dy;
    while (x != y) {
        x = parent_.find(x)->second;
        y = parent_.find(y)->second;
    }
    return x;
}

double wup_similarity(std::string_view a, std::string_view b, const Taxonomy& taxonomy) {
    if (a == b) return 1.0;
    for (auto w : {a, b})
        if (!taxonomy.contains(w)) {
            warn("'" + std::string(w) + "' is not in the taxonomy; similarity 0");
            return 0.0;
        }
    const auto lca = taxonomy.lowest_common_ancestor(a, b);
    return 2.0 * static_cast<double>(taxonomy.depth(lca)) /
           static_cast<double>(taxonomy.depth(a) + taxonomy.depth(b));
}

double wups(std::span<const std::string> prediction, std::span<const std::string> truth, const Taxonomy& taxonomy,
            double threshold, const WupsOptions& options) {
    V2L_REQUIRE(threshold >= 0.0 && threshold <= 1.0, PreconditionError, "WUPS threshold must be in [0, 1]");
    if (prediction.empty() || truth.empty()) return 0.0;
    const auto score = [&](const std::string& p, const std::string& t) {
        const double w = wup_similarity(p, t, taxonomy);
        if (w >= threshold) return w;
        return options.down_weight ? options.factor * w : 0.0;
    };
    const auto directed = [&](std::span<const std::string> from, std::span<const std::string> to, bool flip) {
        double prod = 1.0;
        for (const auto& f : from) {
            double best = 0.0;
            for (const auto& t : to) best = std::max(best, flip ? score(t, f) : score(f, t));
            prod *= best;
        }
        return prod;
    };
    return std::min(directed(prediction, truth, false), directed(truth, prediction, true));
}

std::string normalize_answer(std::string_view answer) { return trim_lower(answer); }

double vqa_accuracy(std::string_view prediction, std::span<const std::string> human_answers) {
    V2L_REQUIRE(human_answers.size() == 10, PreconditionError,
                "consensus accuracy needs exactly 10 human answers, got " + std::to_string(human_answers.size()));
    const auto p = normalize_answer(prediction);
    std::size_t matches = 0;
    for (const auto& h : human_answers) matches += normalize_answer(h) == p;
    return std::min(static_cast<double>(matches) / 3.0, 1.0);
}

const std::vector<std::string>& default_question_prefixes() {
    static const std::vector<std::string> prefixes{
        "are there", "are", "can you", "could", "do", "does", "has", "how", "how many", "is the", "is there",
        "is this", "is", "what", "what animal", "what are", "what color", "what is", "what is the", "what kind of",
        "what sport", "what type of", "where", "which", "who", "why"};
    return prefixes;
}

std::string question_category(std::string_view question, std::span<const std::string> prefixes) {
    const auto q = trim_lower(question);
    std::string best;
    for (const auto& raw : prefixes) {
        const auto p = trim_lower(raw);
        if (p.empty() || q.size() < p.size() || q.compare(0, p.size(), p) != 0) continue;
        if (q.size() > p.size() && std::isalnum(static_cast<unsigned char>(q[p.size()]))) continue;
        if (p.size() > best.size()) best = p;
    }
    return best.empty() ? "others" : best;
}

EvalReport categorize_report(std::string metric, std::span<const double> scores,
                             std::span<const std::string> questions, std::span<const std::string> prefixes) {
    V2L_REQUIRE(scores.size() == questions.size(), PreconditionError, "one question per score is required");
    EvalReport r;
    r.metric = std::move(metric);
    r.count = scores.size();
    std::map<std::string, std::pair<std::size_t, double>> groups;
    double total = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        auto& g = groups[question_category(questions[i], prefixes)];
        ++g.first;
        g.second += scores[i];
        total += scores[i];
    }
    r.overall = scores.empty() ? 0.0 : total / static_cast<double>(scores.size());
    for (const auto& [name, g] : groups)
        if (name != "others") r.categories.push_back({name, g.first, g.second / static_cast<double>(g.first)});
    if (const auto it = groups.find("others"); it != groups.end())
        r.categories.push_back({"others", it->second.first, it->second.second / static_cast<double>(it->second.first)});
    return r;
}

std::string format_report(const EvalReport& report) {
    std::string out = "metric\tcategory\tcount\tscore\n";
    const auto line = [&](const std::string& cat, std::size_t n, double s) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", s);
        out += report.metric + "\t" + cat + "\t" + std::to_string(n) + "\t" + buf + "\n";
    };
    line("overall", report.count, report.overall);
    for (const auto& c : report.categories) line(c.category, c.count, c.score);
    return out;
}

}  // namespace v2l::metrics
