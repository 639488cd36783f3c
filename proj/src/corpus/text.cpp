#include "v2l/corpus/text.hpp"

#include <cctype>
#include <sstream>

#include "v2l/error.hpp"
#include "v2l/io.hpp"
#include "v2l_lexicon_data.hpp"

namespace v2l::corpus {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        const auto ch = static_cast<unsigned char>(raw);
        if (std::isspace(ch)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else if (std::ispunct(ch)) {
            continue;
        } else {
            current.push_back(static_cast<char>(std::tolower(ch)));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

namespace {

std::vector<std::pair<std::string, std::string>> parse_lines(std::string_view text, std::size_t fields) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields_in(line);
        std::string a, b, extra;
        if (!(fields_in >> a)) continue;
        if (fields == 2 && !(fields_in >> b))
            throw DataError("lexicon line " + std::to_string(line_no) + ": expected two fields");
        if (fields_in >> extra)
            throw DataError("lexicon line " + std::to_string(line_no) + ": too many fields");
        out.emplace_back(std::move(a), std::move(b));
    }
    return out;
}

bool is_consonant(std::string_view w, std::size_t i) {
    switch (w[i]) {
        case 'a': case 'e': case 'i': case 'o': case 'u':
            return false;
        case 'y':
            return i == 0 || !is_consonant(w, i - 1);
        default:
            return true;
    }
}

bool has_vowel(std::string_view w) {
    for (std::size_t i = 0; i < w.size(); ++i)
        if (!is_consonant(w, i)) return true;
    return false;
}

// Number of vowel-consonant sequences, [C](VC)^m[V].
int measure(std::string_view w) {
    int m = 0;
    std::size_t i = 0;
    while (i < w.size() && is_consonant(w, i)) ++i;
    while (i < w.size()) {
        while (i < w.size() && !is_consonant(w, i)) ++i;
        if (i >= w.size()) break;
        while (i < w.size() && is_consonant(w, i)) ++i;
        ++m;
    }
    return m;
}

bool ends_cvc(std::string_view w) {
    const std::size_t n = w.size();
    if (n < 3) return false;
    if (!is_consonant(w, n - 3) || is_consonant(w, n - 2) || !is_consonant(w, n - 1)) return false;
    const char last = w[n - 1];
    return last != 'w' && last != 'x' && last != 'y';
}

bool ends_double_consonant(std::string_view w) {
    const std::size_t n = w.size();
    return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

bool ends_with(std::string_view w, std::string_view suffix) {
    return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

// Undo -ing / -ed: undouble a final consonant or restore a silent e.
std::string restore_verb_stem(std::string stem) {
    const bool consonant_before_suffix = stem.size() >= 3 && is_consonant(stem, stem.size() - 3);
    if (consonant_before_suffix && (ends_with(stem, "at") || ends_with(stem, "bl") || ends_with(stem, "iz")))
        return stem + "e";
    if (ends_double_consonant(stem)) {
        const char last = stem.back();
        if (last != 'l' && last != 's' && last != 'z' && last != 'f') stem.pop_back();
        return stem;
    }
    if (measure(stem) == 1 && ends_cvc(stem)) return stem + "e";
    return stem;
}

std::string strip_plural(std::string_view w) {
    if (w.size() <= 3) return std::string(w);
    if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) return std::string(w);
    if (w.size() > 4 && ends_with(w, "ies")) return std::string(w.substr(0, w.size() - 3)) + "y";
    if (ends_with(w, "sses") || ends_with(w, "xes") || ends_with(w, "ches") || ends_with(w, "shes") ||
        ends_with(w, "zzes"))
        return std::string(w.substr(0, w.size() - 2));
    return std::string(w.substr(0, w.size() - 1));
}

}  // namespace

MergeRules MergeRules::parse(std::string_view text) {
    MergeRules rules;
    for (auto& [surface, canonical] : parse_lines(text, 2)) rules.exceptions[surface] = canonical;
    return rules;
}

MergeRules MergeRules::builtin() {
    static const MergeRules rules = parse(lexicon::kExceptions);
    return rules;
}

MergeRules MergeRules::load(const std::filesystem::path& path) { return parse(io::read_file(path)); }

void MergeRules::merge(const MergeRules& other) {
    for (const auto& [k, v] : other.exceptions) exceptions[k] = v;
}

std::string canonicalize(std::string_view token, const MergeRules& rules) {
    if (auto it = rules.exceptions.find(std::string(token)); it != rules.exceptions.end()) return it->second;
    if (token.size() <= 3) return std::string(token);

    if (token.back() == 's') return strip_plural(token);

    if (ends_with(token, "ing")) {
        const auto stem = token.substr(0, token.size() - 3);
        if (!has_vowel(stem) || measure(stem) < 1) return std::string(token);
        return restore_verb_stem(std::string(stem));
    }
    if (ends_with(token, "ed")) {
        if (token.size() > 4 && ends_with(token, "ied")) return std::string(token.substr(0, token.size() - 3)) + "y";
        const auto stem = token.substr(0, token.size() - 2);
        if (stem.size() < 3 || !has_vowel(stem) || measure(stem) < 1) return std::string(token);
        return restore_verb_stem(std::string(stem));
    }
    return std::string(token);
}

FunctionWords FunctionWords::parse(std::string_view text) {
    std::set<std::string> words;
    for (auto& entry : parse_lines(text, 1)) words.insert(std::move(entry.first));
    return FunctionWords(std::move(words));
}

FunctionWords FunctionWords::builtin() {
    static const FunctionWords words = parse(lexicon::kFunctionWords);
    return words;
}

FunctionWords FunctionWords::load(const std::filesystem::path& path) { return parse(io::read_file(path)); }

std::string attribute_form(std::string_view token, const MergeRules& rules, const FunctionWords& function_words) {
    if (function_words.contains(token)) return std::string(token);
    return canonicalize(token, rules);
}

}  // namespace v2l::corpus
