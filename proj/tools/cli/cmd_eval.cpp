#include <cstdio>
#include <iostream>
#include <memory>

#include "common.hpp"
#include "v2l/corpus/records.hpp"
#include "v2l/corpus/text.hpp"
#include "v2l/error.hpp"
#include "v2l/io.hpp"
#include "v2l/metrics/metrics.hpp"

namespace v2l::cli {

namespace {

struct AnswerPair {
    std::string question;
    std::string predicted;
    const corpus::QaRecord* truth;
};

std::vector<AnswerPair> pair_answers(const fs::path& answers_path, const std::vector<corpus::QaRecord>& qa) {
    const auto table = read_table(answers_path, "answers");
    V2L_REQUIRE(table.rows.size() == qa.size(), DataError,
                "answers table has " + std::to_string(table.rows.size()) + " rows but the QA file has " +
                    std::to_string(qa.size()));
    std::vector<AnswerPair> out;
    for (std::size_t i = 0; i < qa.size(); ++i) {
        const auto& r = table.rows[i];
        if (r.at("image_id") != qa[i].image_id || r.at("question") != qa[i].question)
            throw DataError("answers row " + std::to_string(i + 1) + " does not match QA record " + std::to_string(i + 1));
        out.push_back({qa[i].question, r.at("answer").get<std::string>(), &qa[i]});
    }
    return out;
}

std::vector<double> accuracy_scores(const std::vector<AnswerPair>& pairs) {
    std::vector<double> s;
    for (const auto& p : pairs) {
        if (!p.truth->human_answers)
            throw DataError("question '" + p.question + "' of image '" + p.truth->image_id + "' has no human answers");
        s.push_back(metrics::vqa_accuracy(p.predicted, *p.truth->human_answers));
    }
    return s;
}

std::vector<double> wups_scores(const std::vector<AnswerPair>& pairs, const metrics::Taxonomy& taxonomy,
                                double threshold, const metrics::WupsOptions& options) {
    std::vector<double> s;
    for (const auto& p : pairs)
        s.push_back(metrics::wups(corpus::tokenize(p.predicted), p.truth->answer, taxonomy, threshold, options));
    return s;
}

struct QaEvalOptions {
    std::string answers, qa, report;
    bool by_category = false;
};

void add_qa_eval_options(CLI::App* cmd, QaEvalOptions& o) {
    cmd->add_option("--answers", o.answers, "answers table from vqa answer")->required();
    cmd->add_option("--qa", o.qa, "ground-truth question-answer records")->required();
    cmd->add_option("--report", o.report, "also write the per-category TSV report here");
}

void emit(const std::string& metric, const std::vector<double>& scores, const std::vector<AnswerPair>& pairs,
          const QaEvalOptions& o, RunRecord& run) {
    std::vector<std::string> questions;
    for (const auto& p : pairs) questions.push_back(p.question);
    const auto report = metrics::categorize_report(metric, scores, questions, metrics::default_question_prefixes());
    const auto text = metrics::format_report(report);
    std::cout << text;
    run.note(metric, report.overall);
    if (!o.report.empty()) {
        io::write_file_atomic(o.report, text);
        run.output(o.report);
    }
}

}  // namespace

void register_eval_commands(CLI::App& root, Registry& registry) {
    auto* ev = root.add_subcommand("eval", "caption and answer metrics");
    ev->require_subcommand(1);
    {
        struct Opts {
            std::string candidates, references;
            std::size_t max_n = 4;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = ev->add_subcommand("bleu", "corpus BLEU-1..n of the best generated caption per image");
        cmd->add_option("--candidates", o->candidates, "caption representation table from caption generate")
            ->required();
        cmd->add_option("--references", o->references, "reference caption records")->required();
        cmd->add_option("--max-n", o->max_n, "highest n-gram order")->capture_default_str();
        registry.add(cmd, [o](RunRecord& run) {
            const auto table = read_table(run.input(o->candidates), "caption-representations");
            std::map<std::string, std::vector<metrics::Tokens>> refs;
            for (const auto& r : corpus::load_captions(run.input(o->references)))
                for (const auto& c : r.captions) refs[r.image_id].push_back(corpus::tokenize(c));
            std::vector<metrics::Tokens> cands;
            std::vector<std::vector<metrics::Tokens>> ref_sets;
            for (const auto& row : table.rows) {
                const auto id = row.at("image_id").get<std::string>();
                const auto it = refs.find(id);
                if (it == refs.end()) throw DataError("no reference captions for image '" + id + "'");
                cands.push_back(corpus::tokenize(row.at("captions").at(0).get<std::string>()));
                ref_sets.push_back(it->second);
            }
            const auto b = metrics::corpus_bleu(cands, ref_sets, o->max_n);
            for (std::size_t n = 0; n < b.size(); ++n) {
                std::printf("BLEU-%zu\t%.4f\n", n + 1, b[n]);
                run.note("bleu_" + std::to_string(n + 1), b[n]);
            }
        });
    }
    {
        struct Opts {
            QaEvalOptions qa;
            std::string taxonomy;
            double threshold = 0.9;
            bool no_down_weight = false;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = ev->add_subcommand("wups", "Wu-Palmer set similarity of predicted and true answers");
        add_qa_eval_options(cmd, o->qa);
        cmd->add_option("--taxonomy", o->taxonomy, "taxonomy file (root, then 'child parent' lines)")->required();
        cmd->add_option("--threshold", o->threshold, "similarity threshold")->capture_default_str();
        cmd->add_flag("--no-down-weight", o->no_down_weight, "score sub-threshold pairs 0 instead of 0.1 x WUP");
        registry.add(cmd, [o](RunRecord& run) {
            const auto qa = corpus::load_qa(run.input(o->qa.qa));
            const auto pairs = pair_answers(run.input(o->qa.answers), qa);
            const auto taxonomy = metrics::Taxonomy::load(run.input(o->taxonomy));
            metrics::WupsOptions wo;
            wo.down_weight = !o->no_down_weight;
            char name[32];
            std::snprintf(name, sizeof name, "wups@%.2f", o->threshold);
            emit(name, wups_scores(pairs, taxonomy, o->threshold, wo), pairs, o->qa, run);
        });
    }
    {
        auto o = std::make_shared<QaEvalOptions>();
        auto* cmd = ev->add_subcommand("vqa-acc", "consensus accuracy against ten human answers");
        add_qa_eval_options(cmd, *o);
        registry.add(cmd, [o](RunRecord& run) {
            const auto qa = corpus::load_qa(run.input(o->qa));
            const auto pairs = pair_answers(run.input(o->answers), qa);
            emit("accuracy", accuracy_scores(pairs), pairs, *o, run);
        });
    }
    {
        struct Opts {
            QaEvalOptions qa;
            std::string metric = "accuracy", taxonomy;
            double threshold = 0.9;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = ev->add_subcommand("report", "per-question-type breakdown of one metric as TSV");
        add_qa_eval_options(cmd, o->qa);
        cmd->add_option("--metric", o->metric, "accuracy or wups")
            ->check(CLI::IsMember({"accuracy", "wups"}))
            ->capture_default_str();
        cmd->add_option("--taxonomy", o->taxonomy, "taxonomy file, required for wups");
        cmd->add_option("--threshold", o->threshold, "WUPS threshold")->capture_default_str();
        registry.add(cmd, [o](RunRecord& run) {
            const auto qa = corpus::load_qa(run.input(o->qa.qa));
            const auto pairs = pair_answers(run.input(o->qa.answers), qa);
            if (o->metric == "accuracy") {
                emit("accuracy", accuracy_scores(pairs), pairs, o->qa, run);
            } else {
                V2L_REQUIRE(!o->taxonomy.empty(), PreconditionError, "--taxonomy is required for wups");
                const auto taxonomy = metrics::Taxonomy::load(run.input(o->taxonomy));
                emit("wups", wups_scores(pairs, taxonomy, o->threshold, {}), pairs, o->qa, run);
            }
        });
    }
}

}  // namespace v2l::cli
