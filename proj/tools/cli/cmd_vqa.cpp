#include <iostream>
#include <memory>

#include "common.hpp"
#include "v2l/corpus/dictionary.hpp"
#include "v2l/corpus/records.hpp"
#include "v2l/corpus/text.hpp"
#include "v2l/error.hpp"
#include "v2l/vqa/model.hpp"

namespace v2l::cli {

namespace {

struct ContextSources {
    std::string predictions, captions, knowledge;
};

/// Per-question image contexts, in QA order.
class ContextIndex {
public:
    ContextIndex(const ContextSources& src, RunRecord& run) {
        scores_ = load_attribute_scores(run.input(src.predictions));
        const auto caps = read_table(run.input(src.captions), "caption-representations");
        for (const auto& r : caps.rows) v_cap_[r.at("image_id").get<std::string>()] = r.at("v_cap").get<std::vector<float>>();
        V2L_REQUIRE(!v_cap_.empty(), DataError, "caption representation table is empty");
        caption_dim_ = v_cap_.begin()->second.size();
        if (!src.knowledge.empty()) {
            const auto know = read_table(run.input(src.knowledge), "knowledge-vectors");
            knowledge_dim_ = know.header.at("dim").get<std::size_t>();
            for (const auto& r : know.rows)
                v_know_[{r.at("image_id").get<std::string>(), r.at("question").get<std::string>()}] =
                    r.at("v_know").get<std::vector<float>>();
        }
    }

    std::size_t num_attributes() const { return scores_.terms.size(); }
    std::size_t caption_dim() const { return caption_dim_; }
    std::size_t knowledge_dim() const { return knowledge_dim_; }

    vqa::ImageContext context(const corpus::QaRecord& q) const {
        vqa::ImageContext c;
        c.v_att = scores_.at(q.image_id);
        const auto cap = v_cap_.find(q.image_id);
        if (cap == v_cap_.end()) throw DataError("no caption representation for image '" + q.image_id + "'");
        c.v_cap = cap->second;
        if (v_know_.empty()) {
            c.v_know.assign(knowledge_dim_, 0.0f);
        } else {
            const auto k = v_know_.find({q.image_id, q.question});
            if (k == v_know_.end())
                throw DataError("no knowledge vector for image '" + q.image_id + "', question '" + q.question + "'");
            c.v_know = k->second;
        }
        return c;
    }

private:
    AttributeScores scores_;
    std::map<std::string, std::vector<float>> v_cap_;
    std::map<std::pair<std::string, std::string>, std::vector<float>> v_know_;
    std::size_t caption_dim_ = 0;
    std::size_t knowledge_dim_ = 1;
};

void add_context_options(CLI::App* cmd, ContextSources& src) {
    cmd->add_option("--predictions", src.predictions, "attribute predictions (V_att)")->required();
    cmd->add_option("--captions", src.captions, "caption representation table (V_cap)")->required();
    cmd->add_option("--knowledge", src.knowledge, "knowledge vector table (V_know); omit to train without knowledge");
}

corpus::TokenSequence question_ids(const std::string& question, const corpus::WordDictionary& dict) {
    return corpus::encode(corpus::tokenize(question), dict, false);
}

std::string dict_path(const std::string& stem) { return stem + ".dict.json"; }

}  // namespace

void register_vqa_commands(CLI::App& root, Registry& registry) {
    auto* v = root.add_subcommand("vqa", "question answering LSTM");
    v->require_subcommand(1);
    {
        struct Opts {
            std::string qa, out;
            ContextSources src;
            std::size_t embed = 256, hidden = 256, min_count = 5;
            TrainOptions train;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = v->add_subcommand("train", "train the VQA model on question-answer pairs");
        cmd->add_option("--qa", o->qa, "question-answer records")->required();
        add_context_options(cmd, o->src);
        cmd->add_option("--embed", o->embed, "embedding size")->capture_default_str();
        cmd->add_option("--hidden", o->hidden, "LSTM hidden size")->capture_default_str();
        cmd->add_option("--min-count", o->min_count, "dictionary minimum word count")->capture_default_str();
        cmd->add_option("--out", o->out, "checkpoint stem (the dictionary goes to <stem>.dict.json)")->required();
        o->train.add_to(cmd);
        registry.add(cmd, [o](RunRecord& run) {
            const auto qa = corpus::load_qa(run.input(o->qa));
            V2L_REQUIRE(!qa.empty(), DataError, "no question-answer records");
            const ContextIndex contexts(o->src, run);
            const auto dict = corpus::build_word_dictionary(std::span<const corpus::QaRecord>(qa), o->min_count);
            std::vector<vqa::VqaInstance> data;
            for (const auto& q : qa)
                data.push_back({q.image_id, contexts.context(q), question_ids(q.question, dict),
                                corpus::encode(q.answer, dict, false)});
            numeric::Rng rng(o->train.seed);
            auto model = vqa::VqaModel<float>::xavier(contexts.num_attributes(), contexts.caption_dim(),
                                                      contexts.knowledge_dim(), dict.size(), o->embed, o->hidden, rng);
            const auto hist = vqa::train_vqa(model, std::span<const vqa::VqaInstance>(data), o->train.config, rng);
            vqa::save_vqa(o->out, model);
            dict.save(dict_path(o->out));
            run.output(o->out + ".json");
            run.output(o->out + ".bin");
            run.output(dict_path(o->out));
            run.note("final_loss", hist.epoch_loss.back());
            run.note("knowledge", !o->src.knowledge.empty());
            std::cout << data.size() << " questions, dictionary " << dict.size() << ", final loss "
                      << hist.epoch_loss.back() << "\n";
        });
    }
    {
        struct Opts {
            std::string model, qa, out;
            ContextSources src;
            vqa::DecodeOptions decode;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = v->add_subcommand("answer", "generate answers for question records");
        cmd->add_option("--model", o->model, "VQA checkpoint stem")->required();
        cmd->add_option("--qa", o->qa, "question records")->required();
        add_context_options(cmd, o->src);
        cmd->add_option("--beam", o->decode.beam_width, "beam width (1 = greedy)")->capture_default_str();
        cmd->add_option("--max-len", o->decode.max_len, "maximum answer tokens")->capture_default_str();
        cmd->add_flag("--zero-knowledge", o->decode.zero_knowledge, "ablation: replace V_know with zeros");
        cmd->add_option("--out", o->out, "answers table")->required();
        registry.add(cmd, [o](RunRecord& run) {
            run.input(o->model + ".json");
            run.input(o->model + ".bin");
            const auto model = vqa::load_vqa(o->model);
            const auto dict = corpus::WordDictionary::load(run.input(dict_path(o->model)));
            V2L_REQUIRE(dict.size() == model.core.dict_size(), DataError, "dictionary size does not match the model");
            const auto qa = corpus::load_qa(run.input(o->qa));
            const ContextIndex contexts(o->src, run);
            V2L_REQUIRE(contexts.num_attributes() == model.num_attributes(), DataError,
                        "attribute count does not match the model");
            V2L_REQUIRE(contexts.caption_dim() == model.caption_dim(), DataError,
                        "caption representation size does not match the model");
            V2L_REQUIRE(contexts.knowledge_dim() == model.knowledge_dim(), DataError,
                        "knowledge vector size does not match the model");
            std::vector<json> rows;
            for (const auto& q : qa) {
                const auto ids = question_ids(q.question, dict);
                const auto a = vqa::generate_answer(model, contexts.context(q), std::span<const corpus::TokenId>(ids.ids),
                                                    o->decode);
                const auto text = join_tokens(corpus::decode(a.tokens, dict));
                rows.push_back({{"image_id", q.image_id}, {"question", q.question}, {"answer", text},
                                {"log_prob", a.log_prob}});
                std::cout << q.image_id << "\t" << q.question << "\t" << text << "\n";
            }
            write_table(o->out, "answers", {{"zero_knowledge", o->decode.zero_knowledge}}, rows);
            run.output(o->out);
        });
    }
}

}  // namespace v2l::cli
