#include <iostream>
#include <memory>

#include "common.hpp"
#include "v2l/attributes/model.hpp"
#include "v2l/corpus/dictionary.hpp"
#include "v2l/corpus/records.hpp"
#include "v2l/corpus/vocabulary.hpp"
#include "v2l/error.hpp"
#include "v2l/numeric/rng.hpp"

namespace v2l::cli {

namespace {

std::vector<attributes::LabeledImage> labeled_images(const fs::path& features_path, const fs::path& captions_path,
                                                     const corpus::AttributeVocabulary& vocab) {
    const auto features = attributes::load_features(features_path);
    const auto captions = corpus::load_captions(captions_path);
    std::map<std::string, const corpus::CaptionRecord*> by_id;
    for (const auto& c : captions) by_id[c.image_id] = &c;
    std::vector<attributes::LabeledImage> out;
    for (const auto& img : features.images) {
        const auto it = by_id.find(img.image_id);
        if (it == by_id.end()) throw DataError("image '" + img.image_id + "' has features but no captions");
        out.push_back({img, corpus::label_image_attributes(*it->second, vocab)});
    }
    return out;
}

}  // namespace

void register_corpus_commands(CLI::App& root, Registry& registry) {
    auto* vocab = root.add_subcommand("vocab", "attribute vocabulary and word dictionary");
    vocab->require_subcommand(1);
    {
        struct Opts {
            std::string captions, out_vocab, out_dict;
            std::size_t size = 256, stopwords = 15, min_count = 5;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = vocab->add_subcommand("build", "mine attribute terms and build the caption word dictionary");
        cmd->add_option("--captions", o->captions, "caption records (JSON lines)")->required();
        cmd->add_option("--size", o->size, "number of attribute terms")->capture_default_str();
        cmd->add_option("--stopwords", o->stopwords, "most frequent terms to drop")->capture_default_str();
        cmd->add_option("--min-count", o->min_count, "dictionary minimum word count")->capture_default_str();
        cmd->add_option("--out-vocab", o->out_vocab, "attribute vocabulary output")->required();
        cmd->add_option("--out-dict", o->out_dict, "word dictionary output")->required();
        registry.add(cmd, [o](RunRecord& run) {
            const auto records = corpus::load_captions(run.input(o->captions));
            corpus::VocabularyOptions opts;
            opts.size = o->size;
            opts.stopword_count = o->stopwords;
            const auto v = corpus::build_attribute_vocabulary(records, opts);
            const auto dict = corpus::build_word_dictionary(std::span<const corpus::CaptionRecord>(records), o->min_count);
            v.save(o->out_vocab);
            dict.save(o->out_dict);
            run.output(o->out_vocab);
            run.output(o->out_dict);
            std::cout << "attributes: " << v.size() << " terms; dictionary: " << dict.size() << " words\n";
        });
    }

    auto* attr = root.add_subcommand("attr", "multi-label attribute predictor");
    attr->require_subcommand(1);
    {
        struct Opts {
            std::string features, captions, vocab, out;
            TrainOptions train;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = attr->add_subcommand("train", "train the region max-pooled attribute model");
        cmd->add_option("--features", o->features, "region features (JSON lines)")->required();
        cmd->add_option("--captions", o->captions, "caption records providing the labels")->required();
        cmd->add_option("--vocab", o->vocab, "attribute vocabulary")->required();
        cmd->add_option("--out", o->out, "checkpoint stem")->required();
        o->train.add_to(cmd);
        registry.add(cmd, [o](RunRecord& run) {
            const auto v = corpus::AttributeVocabulary::load(run.input(o->vocab));
            run.input(o->features);
            run.input(o->captions);
            const auto data = labeled_images(o->features, o->captions, v);
            V2L_REQUIRE(!data.empty(), DataError, "no labelled images");
            numeric::Rng rng(o->train.seed);
            auto model = attributes::AttributeModel<float>::xavier(v.size(), data.front().features.dim(), rng);
            const auto hist = attributes::train(model, std::span<const attributes::LabeledImage>(data), o->train.config, rng);
            attributes::save_model(o->out, model);
            run.output(o->out + ".json");
            run.output(o->out + ".bin");
            const double acc = attributes::subset_accuracy(model, std::span<const attributes::LabeledImage>(data));
            run.note("final_loss", hist.epoch_loss.empty() ? 0.0 : hist.epoch_loss.back());
            run.note("train_subset_accuracy", acc);
            std::cout << "final loss " << (hist.epoch_loss.empty() ? 0.0 : hist.epoch_loss.back())
                      << ", training subset accuracy " << acc << "\n";
        });
    }
    {
        struct Opts {
            std::string model, features, vocab, out;
            std::size_t top = 0;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = attr->add_subcommand("predict", "score every image's attributes");
        cmd->add_option("--model", o->model, "checkpoint stem")->required();
        cmd->add_option("--features", o->features, "region features (JSON lines)")->required();
        cmd->add_option("--vocab", o->vocab, "attribute vocabulary")->required();
        cmd->add_option("--out", o->out, "prediction file")->required();
        cmd->add_option("--top", o->top, "also print the top-k attributes per image");
        registry.add(cmd, [o](RunRecord& run) {
            run.input(o->model + ".json");
            run.input(o->model + ".bin");
            const auto model = attributes::load_model(o->model);
            const auto v = corpus::AttributeVocabulary::load(run.input(o->vocab));
            V2L_REQUIRE(v.size() == model.num_attributes(), DataError, "vocabulary size does not match the model");
            const auto features = attributes::load_features(run.input(o->features));
            attributes::PredictionFile out;
            out.terms = v.terms;
            for (const auto& img : features.images) {
                out.images.emplace_back(img.image_id, attributes::predict(model, img));
                if (o->top > 0) {
                    std::cout << img.image_id;
                    for (const auto& [t, s] : attributes::top_k_attributes(out.images.back().second, v.terms, o->top))
                        std::cout << " " << t << ":" << s;
                    std::cout << "\n";
                }
            }
            attributes::save_predictions(o->out, out);
            run.output(o->out);
        });
    }
}

}  // namespace v2l::cli
