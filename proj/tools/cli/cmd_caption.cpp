#include <iostream>
#include <memory>

#include "common.hpp"
#include "v2l/corpus/dictionary.hpp"
#include "v2l/corpus/records.hpp"
#include "v2l/corpus/text.hpp"
#include "v2l/error.hpp"
#include "v2l/lstm/captioner.hpp"

namespace v2l::cli {

namespace {

std::vector<lstm::CaptionExample> caption_examples(const AttributeScores& scores,
                                                   const std::vector<corpus::CaptionRecord>& records,
                                                   const corpus::WordDictionary& dict) {
    std::vector<lstm::CaptionExample> out;
    for (const auto& r : records)
        for (const auto& c : r.captions)
            out.push_back({scores.at(r.image_id), corpus::encode(corpus::tokenize(c), dict, true)});
    V2L_REQUIRE(!out.empty(), DataError, "no captions");
    return out;
}

}  // namespace

void register_caption_commands(CLI::App& root, Registry& registry) {
    auto* caption = root.add_subcommand("caption", "attribute-conditioned caption LSTM");
    caption->require_subcommand(1);
    {
        struct Opts {
            std::string predictions, captions, dict, out;
            std::size_t embed = 256, hidden = 256;
            TrainOptions train;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = caption->add_subcommand("train", "train the caption generator on predicted attributes");
        cmd->add_option("--predictions", o->predictions, "attribute predictions (V_att)")->required();
        cmd->add_option("--captions", o->captions, "caption records")->required();
        cmd->add_option("--dict", o->dict, "word dictionary")->required();
        cmd->add_option("--embed", o->embed, "embedding size")->capture_default_str();
        cmd->add_option("--hidden", o->hidden, "LSTM hidden size")->capture_default_str();
        cmd->add_option("--out", o->out, "checkpoint stem")->required();
        o->train.add_to(cmd);
        registry.add(cmd, [o](RunRecord& run) {
            const auto scores = load_attribute_scores(run.input(o->predictions));
            const auto records = corpus::load_captions(run.input(o->captions));
            const auto dict = corpus::WordDictionary::load(run.input(o->dict));
            const auto data = caption_examples(scores, records, dict);
            numeric::Rng rng(o->train.seed);
            auto model = lstm::Captioner<float>::xavier(scores.terms.size(), dict.size(), o->embed, o->hidden, rng);
            const auto hist = lstm::train_captioner(model, std::span<const lstm::CaptionExample>(data),
                                                    o->train.config, rng);
            lstm::save_captioner(o->out, model);
            run.output(o->out + ".json");
            run.output(o->out + ".bin");
            const double ppl = lstm::perplexity(model, std::span<const lstm::CaptionExample>(data));
            run.note("final_loss", hist.epoch_loss.back());
            run.note("train_perplexity", ppl);
            std::cout << "final loss " << hist.epoch_loss.back() << ", training perplexity " << ppl << "\n";
        });
    }
    {
        struct Opts {
            std::string model, predictions, dict, out;
            std::size_t beam = 5, max_len = 20;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = caption->add_subcommand("generate", "beam-search captions and pool them into V_cap");
        cmd->add_option("--model", o->model, "captioner checkpoint stem")->required();
        cmd->add_option("--predictions", o->predictions, "attribute predictions (V_att)")->required();
        cmd->add_option("--dict", o->dict, "word dictionary")->required();
        cmd->add_option("--beam", o->beam, "beam width = captions pooled")->capture_default_str();
        cmd->add_option("--max-len", o->max_len, "maximum caption tokens")->capture_default_str();
        cmd->add_option("--out", o->out, "caption representation table")->required();
        registry.add(cmd, [o](RunRecord& run) {
            run.input(o->model + ".json");
            run.input(o->model + ".bin");
            const auto model = lstm::load_captioner(o->model);
            const auto scores = load_attribute_scores(run.input(o->predictions));
            const auto dict = corpus::WordDictionary::load(run.input(o->dict));
            V2L_REQUIRE(dict.size() == model.core.dict_size(), DataError, "dictionary size does not match the model");
            V2L_REQUIRE(scores.terms.size() == model.num_attributes(), DataError,
                        "attribute count does not match the model");
            std::vector<json> rows;
            std::size_t padded = 0;
            for (const auto& [id, v_att] : scores.by_image) {
                const auto rep = lstm::caption_representation(model, std::span<const float>(v_att), o->max_len, o->beam);
                json captions = json::array();
                for (const auto& ids : rep.captions) captions.push_back(join_tokens(corpus::decode(ids, dict)));
                padded += rep.padded;
                rows.push_back({{"image_id", id}, {"captions", captions}, {"padded", rep.padded}, {"v_cap", rep.v_cap}});
                std::cout << id << "\t" << captions.front().get<std::string>() << "\n";
            }
            write_table(o->out, "caption-representations", {{"dim", model.core.hidden_size()}, {"beam", o->beam}}, rows);
            run.output(o->out);
            run.note("padded_images", padded);
        });
    }
    {
        struct Opts {
            std::string model, predictions, captions, dict;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = caption->add_subcommand("ppl", "perplexity of reference captions");
        cmd->add_option("--model", o->model, "captioner checkpoint stem")->required();
        cmd->add_option("--predictions", o->predictions, "attribute predictions (V_att)")->required();
        cmd->add_option("--captions", o->captions, "caption records")->required();
        cmd->add_option("--dict", o->dict, "word dictionary")->required();
        registry.add(cmd, [o](RunRecord& run) {
            run.input(o->model + ".json");
            run.input(o->model + ".bin");
            const auto model = lstm::load_captioner(o->model);
            const auto scores = load_attribute_scores(run.input(o->predictions));
            const auto records = corpus::load_captions(run.input(o->captions));
            const auto dict = corpus::WordDictionary::load(run.input(o->dict));
            const auto data = caption_examples(scores, records, dict);
            const double ppl = lstm::perplexity(model, std::span<const lstm::CaptionExample>(data));
            run.note("perplexity", ppl);
            std::cout << ppl << "\n";
        });
    }
}

}  // namespace v2l::cli
