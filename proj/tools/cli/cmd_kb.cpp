#include <iostream>
#include <memory>
#include <set>

#include "common.hpp"
#include "v2l/corpus/records.hpp"
#include "v2l/error.hpp"
#include "v2l/io.hpp"
#include "v2l/knowledge/cache.hpp"
#include "v2l/knowledge/client.hpp"
#include "v2l/knowledge/paravec.hpp"
#include "v2l/knowledge/selection.hpp"
#include "v2l/knowledge/sparql.hpp"

namespace v2l::cli {

namespace {

std::vector<std::size_t> top_indices(const std::vector<float>& scores, std::size_t k) {
    std::vector<std::size_t> idx(scores.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    idx.resize(std::min(k, idx.size()));
    return idx;
}

}  // namespace

void register_knowledge_commands(CLI::App& root, Registry& registry) {
    auto* kb = root.add_subcommand("kb", "external knowledge: SPARQL retrieval, caching and selection");
    kb->require_subcommand(1);
    {
        auto attribute = std::make_shared<std::string>();
        auto* cmd = kb->add_subcommand("query", "print the SPARQL query for one attribute");
        cmd->add_option("--attribute", *attribute, "attribute term")->required();
        registry.add(cmd, [attribute](RunRecord&) { std::cout << knowledge::build_sparql_query(*attribute); });
    }
    {
        struct Opts {
            std::string predictions, cache, endpoint, out;
            std::size_t top = 5, attempts = 3, parallel = 4;
            bool live = false;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = kb->add_subcommand("fetch", "retrieve comments for each image's top attributes");
        cmd->add_option("--predictions", o->predictions, "attribute predictions")->required();
        cmd->add_option("--top", o->top, "attributes per image")->capture_default_str();
        cmd->add_option("--cache", o->cache, "knowledge cache directory")->required();
        cmd->add_flag("--live", o->live, "query the endpoint (default: cache only, no network)");
        cmd->add_flag("!--offline", o->live, "cache only (the default)");
        cmd->add_option("--endpoint", o->endpoint, "SPARQL endpoint (else $V2L_KB_ENDPOINT, else DBpedia)");
        cmd->add_option("--attempts", o->attempts, "attempts per query in live mode")->capture_default_str();
        cmd->add_option("--parallel", o->parallel, "concurrent queries in live mode")->capture_default_str();
        cmd->add_option("--out", o->out, "knowledge table")->required();
        registry.add(cmd, [o](RunRecord& run) {
            const auto scores = load_attribute_scores(run.input(o->predictions));
            std::map<std::string, std::vector<std::string>> per_image;
            std::set<std::string> wanted;
            for (const auto& [id, s] : scores.by_image)
                for (std::size_t i : top_indices(s, o->top)) {
                    per_image[id].push_back(scores.terms[i]);
                    wanted.insert(scores.terms[i]);
                }
            knowledge::KnowledgeCache cache(o->cache);
            knowledge::FetchOptions fo;
            fo.mode = o->live ? knowledge::FetchMode::live : knowledge::FetchMode::offline;
            fo.max_attempts = o->attempts;
            fo.parallelism = o->parallel;
            std::unique_ptr<knowledge::SparqlClient> http;
            if (o->live) http = std::make_unique<knowledge::HttpSparqlClient>(kb_endpoint(o->endpoint));
            knowledge::CountingClient client(http.get());
            const std::vector<std::string> attrs(wanted.begin(), wanted.end());
            const auto result = knowledge::fetch_comments(attrs, client, cache, fo);
            if (!o->live) run.input_dir(o->cache);

            std::map<std::string, const knowledge::KnowledgeParagraph*> found;
            for (const auto& p : result.paragraphs) found[p.attribute] = &p;
            std::vector<json> rows;
            for (const auto& [id, list] : per_image) {
                json paragraphs = json::array(), misses = json::array();
                for (const auto& a : list) {
                    if (const auto it = found.find(a); it != found.end())
                        paragraphs.push_back({{"attribute", a}, {"source_uri", it->second->source_uri},
                                              {"text", it->second->text}});
                    else
                        misses.push_back(a);
                }
                rows.push_back({{"image_id", id}, {"attributes", list}, {"paragraphs", paragraphs}, {"misses", misses}});
            }
            write_table(o->out, "knowledge", {{"top", o->top}}, rows);
            run.output(o->out);
            run.note("mode", o->live ? "live" : "offline");
            run.note("network_calls", client.calls());
            run.note("misses", result.misses);
            std::cout << result.paragraphs.size() << " comments, " << result.misses.size() << " misses, "
                      << client.calls() << " network calls\n";
        });
    }
    {
        struct Opts {
            std::string knowledge, qa, paravec, out;
            std::size_t k = 5;
            bool no_select = false;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = kb->add_subcommand("select", "pick the k comments closest to each question and encode them");
        cmd->add_option("--knowledge", o->knowledge, "knowledge table from kb fetch")->required();
        cmd->add_option("--qa", o->qa, "question-answer records")->required();
        cmd->add_option("--paravec", o->paravec, "paragraph vector model stem")->required();
        cmd->add_option("--k", o->k, "comments kept per question")->capture_default_str();
        cmd->add_flag("--no-select", o->no_select, "encode all comments, skipping question-guided selection");
        cmd->add_option("--out", o->out, "knowledge vector table")->required();
        registry.add(cmd, [o](RunRecord& run) {
            const auto table = read_table(run.input(o->knowledge), "knowledge");
            const auto qa = corpus::load_qa(run.input(o->qa));
            run.input(o->paravec + ".json");
            run.input(o->paravec + ".bin");
            const auto model = knowledge::ParagraphModel::load(o->paravec);
            const knowledge::ParagraphEncoder encoder(model);
            std::map<std::string, std::vector<std::string>> texts;
            for (const auto& r : table.rows) {
                auto& list = texts[r.at("image_id").get<std::string>()];
                for (const auto& p : r.at("paragraphs")) list.push_back(p.at("text").get<std::string>());
            }
            std::vector<json> rows;
            bool clamped = false;
            for (const auto& q : qa) {
                const auto it = texts.find(q.image_id);
                if (it == texts.end()) throw DataError("no knowledge row for image '" + q.image_id + "'");
                const auto& paragraphs = it->second;
                knowledge::KnowledgeSelection sel;
                if (paragraphs.empty()) {
                    warn("image '" + q.image_id + "' has no comments; using a zero knowledge vector");
                    sel.vector.assign(model.dim(), 0.0f);
                } else if (o->no_select) {
                    sel = knowledge::knowledge_vector_unselected(encoder, paragraphs);
                } else {
                    if (o->k > paragraphs.size() && !clamped) {
                        warn("--k " + std::to_string(o->k) + " exceeds the available comments; using all of them");
                        clamped = true;
                    }
                    sel = knowledge::select_knowledge(encoder, q.question, paragraphs,
                                                      std::min(o->k, paragraphs.size()));
                }
                rows.push_back({{"image_id", q.image_id},
                                {"question", q.question},
                                {"selected", sel.indices},
                                {"text", sel.text},
                                {"v_know", sel.vector}});
            }
            write_table(o->out, "knowledge-vectors", {{"dim", model.dim()}, {"k", o->k}, {"selected", !o->no_select}},
                        rows);
            run.output(o->out);
        });
    }

    auto* pv = root.add_subcommand("paravec", "paragraph vector text encoder");
    pv->require_subcommand(1);
    {
        struct Opts {
            std::string corpus, field = "text", out;
            bool from_knowledge = false;
            knowledge::ParagraphConfig config;
            std::uint64_t seed = 1;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = pv->add_subcommand("train", "train paragraph vectors on a JSON-lines corpus");
        cmd->add_option("--corpus", o->corpus, "documents (JSON lines)")->required();
        cmd->add_option("--field", o->field, "text field of each document")->capture_default_str();
        cmd->add_flag("--from-knowledge", o->from_knowledge,
                      "the corpus is a kb fetch table; train on its distinct comments");
        cmd->add_option("--dim", o->config.dim, "vector size")->capture_default_str();
        cmd->add_option("--window", o->config.window, "context words on each side")->capture_default_str();
        cmd->add_option("--negative", o->config.negative, "negative samples")->capture_default_str();
        cmd->add_option("--epochs", o->config.epochs, "training epochs")->capture_default_str();
        cmd->add_option("--lr", o->config.learning_rate, "initial learning rate")->capture_default_str();
        cmd->add_option("--min-count", o->config.min_count, "minimum word count")->capture_default_str();
        cmd->add_option("--infer-steps", o->config.infer_steps, "inference epochs")->capture_default_str();
        cmd->add_option("--seed", o->seed, "random seed")->capture_default_str();
        cmd->add_option("--out", o->out, "model stem")->required();
        registry.add(cmd, [o](RunRecord& run) {
            std::vector<std::string> docs;
            if (o->from_knowledge) {
                std::set<std::string> seen;
                for (const auto& r : read_table(run.input(o->corpus), "knowledge").rows)
                    for (const auto& p : r.at("paragraphs"))
                        if (seen.insert(p.at("text").get<std::string>()).second) docs.push_back(p.at("text"));
            } else {
                io::read_jsonl(run.input(o->corpus), [&](const json& j, std::size_t line) {
                    if (!j.contains(o->field) || !j.at(o->field).is_string())
                        throw DataError(o->corpus + ":" + std::to_string(line) + ": missing string field '" + o->field +
                                        "'");
                    docs.push_back(j.at(o->field).get<std::string>());
                });
            }
            numeric::Rng rng(o->seed);
            auto model = knowledge::train_paragraph_model(docs, o->config, rng);
            model.save(o->out);
            run.output(o->out + ".json");
            run.output(o->out + ".bin");
            run.note("final_loss", model.epoch_loss.back());
            std::cout << docs.size() << " documents, " << model.words.size() << " words, final loss "
                      << model.epoch_loss.back() << "\n";
        });
    }
    {
        struct Opts {
            std::string model, text;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = pv->add_subcommand("infer", "print the inferred vector of a text as JSON");
        cmd->add_option("--model", o->model, "model stem")->required();
        cmd->add_option("--text", o->text, "text to encode")->required();
        registry.add(cmd, [o](RunRecord& run) {
            run.input(o->model + ".json");
            const auto model = knowledge::ParagraphModel::load(o->model);
            std::cout << json(knowledge::infer_vector(model, o->text)).dump() << "\n";
        });
    }
}

}  // namespace v2l::cli
