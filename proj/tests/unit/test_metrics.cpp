#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "v2l/corpus/text.hpp"
#include "v2l/error.hpp"
#include "v2l/metrics/metrics.hpp"
#include "v2l/numeric/rng.hpp"

using namespace v2l;
using namespace v2l::metrics;

namespace {

Tokens words(std::string_view s) { return corpus::tokenize(s); }

const Taxonomy& five_node() {
    static const Taxonomy t = Taxonomy::load(std::filesystem::path(V2L_SOURCE_DIR) / "data/taxonomy/five_node.txt");
    return t;
}

}  // namespace

TEST_CASE("bleu hand-computed cases") {
    const auto ref = words("a dog runs on the grass");
    for (double b : bleu_n(ref, {ref})) CHECK(b == doctest::Approx(1.0).epsilon(1e-12));

    const auto b = bleu_n(words("the the the the"), {words("the cat")}, 1);
    CHECK(std::abs(b[0] - 0.25) < 1e-9);

    // c=2 < r=4: BP = exp(1 - 4/2)
    const auto short_c = bleu_n(words("the cat"), {words("the cat sat down")}, 2);
    CHECK(std::abs(short_c[0] - std::exp(-1.0)) < 1e-12);
    CHECK(short_c[0] < 1.0);

    // BLEU-2 = sqrt(p1 * p2): "the cat sat" vs "the cat ran": p1 = 2/3, p2 = 1/2
    const auto two = bleu_n(words("the cat sat"), {words("the cat ran")}, 3);
    CHECK(std::abs(two[1] - std::sqrt(2.0 / 3 * 0.5)) < 1e-12);
    CHECK(two[2] == 0.0);

    // closest length: refs of length 2 and 4 with c = 3 tie; the shorter (2) wins so BP = 1
    const auto tie = bleu_n(words("x y z"), {words("x y"), words("x y z w")}, 1);
    CHECK(tie[0] == doctest::Approx(1.0));

    std::vector<std::string> warnings;
    set_warning_sink([&](const std::string& w) { warnings.push_back(w); });
    CHECK(bleu_n(Tokens{}, {ref}) == std::vector<double>(4, 0.0));
    set_warning_sink(nullptr);
    CHECK(warnings.size() == 1);
    CHECK_THROWS_AS(bleu_n(ref, {}), PreconditionError);
}

TEST_CASE("bleu reference properties") {
    numeric::Rng rng(5);
    const std::vector<std::string> vocab{"a", "b", "c", "d"};
    const auto sentence = [&] {
        Tokens t(1 + rng.below(6));
        for (auto& w : t) w = vocab[rng.below(4)];
        return t;
    };
    for (int trial = 0; trial < 200; ++trial) {
        const auto cand = sentence();
        std::vector<Tokens> refs{sentence(), sentence(), sentence()};
        const auto base = bleu_n(cand, refs);
        std::vector<Tokens> reversed(refs.rbegin(), refs.rend());
        CHECK(bleu_n(cand, reversed) == base);
        auto dup = refs;
        dup.push_back(refs[1]);
        CHECK(bleu_n(cand, dup) == base);
        for (double x : base) {
            CHECK(x >= 0.0);
            CHECK(x <= 1.0 + 1e-12);
        }
    }
    const std::vector<Tokens> cands{words("the cat"), words("a dog")};
    const std::vector<std::vector<Tokens>> refs{{words("the cat")}, {words("a dog")}};
    CHECK(corpus_bleu(cands, refs, 2)[1] == doctest::Approx(1.0));
}

TEST_CASE("taxonomy and wup") {
    const auto& t = five_node();
    CHECK(t.size() == 5);
    CHECK(t.depth("entity") == 1);
    CHECK(t.depth("dog") == 3);
    CHECK(t.lowest_common_ancestor("dog", "cat") == "animal");
    CHECK(std::abs(wup_similarity("dog", "cat", t) - 2.0 / 3) < 1e-9);
    CHECK(wup_similarity("dog", "dog", t) == 1.0);
    CHECK(std::abs(wup_similarity("entity", "dog", t) - 0.5) < 1e-9);
    CHECK(std::abs(wup_similarity("vehicle", "dog", t) - 0.4) < 1e-9);
    for (const char* a : {"entity", "animal", "vehicle", "dog", "cat"})
        for (const char* b : {"entity", "animal", "vehicle", "dog", "cat"}) {
            CHECK(wup_similarity(a, b, t) == wup_similarity(b, a, t));
            CHECK(wup_similarity(a, b, t) >= 0.0);
            CHECK(wup_similarity(a, b, t) <= 1.0);
        }

    set_warning_sink([](const std::string&) {});
    CHECK(wup_similarity("unicorn", "dog", t) == 0.0);
    set_warning_sink(nullptr);

    CHECK_THROWS_AS(Taxonomy::parse(""), DataError);
    CHECK_THROWS_AS(Taxonomy::parse("root\na b\nb a\n"), DataError);
    CHECK_THROWS_AS(Taxonomy::parse("root\na root\na other\n"), DataError);
    CHECK_THROWS_AS(Taxonomy::parse("root\na b\n"), DataError);
    CHECK_THROWS_AS(Taxonomy::parse("root extra\n"), DataError);
}

TEST_CASE("wups") {
    const auto& t = five_node();
    const Tokens dog{"dog"}, cat{"cat"};
    CHECK(std::abs(wups(dog, cat, t, 0.9) - 0.2 / 3) < 1e-9);
    CHECK(std::abs(wups(dog, cat, t, 0.0) - 2.0 / 3) < 1e-9);
    CHECK(wups(dog, cat, t, 0.9, {false}) == 0.0);
    for (double th : {0.0, 0.5, 0.9, 1.0}) CHECK(wups(dog, dog, t, th) == 1.0);
    CHECK(wups(Tokens{}, dog, t, 0.0) == 0.0);
    set_warning_sink([](const std::string&) {});
    CHECK(wups(Tokens{"unicorn"}, dog, t, 0.0) == 0.0);
    set_warning_sink(nullptr);
    for (const char* a : {"entity", "animal", "vehicle", "dog", "cat"})
        for (const char* b : {"entity", "animal", "vehicle", "dog", "cat"})
            CHECK(wups(Tokens{a}, Tokens{b}, t, 0.0, {false}) == wup_similarity(a, b, t));

    // set form: {dog, cat} vs {dog}: pred side = 1 * 2/3, truth side = 1
    CHECK(std::abs(wups(Tokens{"dog", "cat"}, dog, t, 0.0) - 2.0 / 3) < 1e-12);
    CHECK_THROWS_AS(wups(dog, cat, t, 1.5), PreconditionError);
}

TEST_CASE("vqa consensus accuracy") {
    const auto humans = [](std::size_t matches) {
        std::vector<std::string> h(10, "no");
        for (std::size_t i = 0; i < matches; ++i) h[i] = "Two";
        return h;
    };
    CHECK(vqa_accuracy("two", humans(0)) == 0.0);
    CHECK(vqa_accuracy("two", humans(1)) == 1.0 / 3);
    CHECK(vqa_accuracy("  TWO ", humans(2)) == 2.0 / 3);
    for (std::size_t m = 3; m <= 10; ++m) CHECK(vqa_accuracy("two", humans(m)) == 1.0);
    for (std::size_t m = 0; m <= 10; ++m) CHECK(vqa_accuracy("two", humans(m)) == std::min(m / 3.0, 1.0));
    CHECK_THROWS_AS(vqa_accuracy("two", std::vector<std::string>(9, "two")), PreconditionError);
    CHECK(normalize_answer("  Red   Ball ") == "red ball");
}

TEST_CASE("categorized report") {
    const auto& prefixes = default_question_prefixes();
    CHECK(question_category("What is the man holding?", prefixes) == "what is the");
    CHECK(question_category("what color is the bus", prefixes) == "what color");
    CHECK(question_category("whatever happened", prefixes) == "others");
    CHECK(question_category("Why is it red", prefixes) == "why");
    CHECK(question_category("Name the animal", prefixes) == "others");

    const std::vector<std::string> why{"why a", "why b", "Why c"};
    const std::vector<double> s3{1, 0, 0.5};
    const auto only_why = categorize_report("acc", s3, why, prefixes);
    REQUIRE(only_why.categories.size() == 1);
    CHECK(only_why.categories[0].category == "why");

    const std::vector<std::string> qs{"what is this", "how many dogs", "how many cats", "name it", "why not"};
    const std::vector<double> scores{1, 0.5, 0, 1.0 / 3, 2.0 / 3};
    const auto r = categorize_report("acc", scores, qs, prefixes);
    CHECK(r.categories.back().category == "others");
    double weighted = 0;
    std::size_t n = 0;
    for (const auto& c : r.categories) {
        weighted += c.score * c.count;
        n += c.count;
    }
    CHECK(n == qs.size());
    CHECK(std::abs(weighted / n - r.overall) < 1e-9);
    const auto text = format_report(r);
    CHECK(text.rfind("metric\tcategory\tcount\tscore\nacc\toverall\t5\t", 0) == 0);
}
