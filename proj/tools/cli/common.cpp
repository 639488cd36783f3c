#include "common.hpp"

#include <cstdlib>

#include "v2l/error.hpp"
#include "v2l/io.hpp"
#include "v2l/knowledge/sparql.hpp"

#ifndef V2L_VERSION
#define V2L_VERSION "0.0.0"
#endif

namespace v2l::cli {

const fs::path& RunRecord::input(const fs::path& path) {
    if (!fs::exists(path)) throw DataError("input not found: " + path.string());
    inputs_.emplace_back(path.string(), io::hex64(io::fnv1a64(io::read_file(path))));
    return path;
}

const fs::path& RunRecord::input_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("input directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) input(f);
    return dir;
}

void RunRecord::output(const fs::path& path) {
    outputs_.push_back(path.string());
    if (!manifest_) manifest_ = fs::path(path.string() + ".run.json");
}

void RunRecord::write(const CLI::App& command, const std::string& name, const std::vector<std::string>& argv) const {
    if (!manifest_) return;
    json config = json::object();
    std::uint64_t seed = 0;
    for (const CLI::Option* opt : command.get_options()) {
        if (opt->get_lnames().empty()) continue;
        const auto& key = opt->get_lnames().front();
        if (key == "help") continue;
        std::string value = opt->count() > 0 ? opt->as<std::string>() : opt->get_default_str();
        if (opt->get_type_size() == 0) value = opt->count() > 0 ? "true" : "false";
        config[key] = value;
        if (key == "seed" && !value.empty()) seed = std::stoull(value);
    }
    json inputs = json::array();
    for (const auto& [path, hash] : inputs_) inputs.push_back({{"path", path}, {"fnv1a64", hash}});
    const json doc{{"version", "v1"},
                   {"command", name},
                   {"argv", argv},
                   {"config", config},
                   {"seed", seed},
                   {"inputs", inputs},
                   {"outputs", outputs_},
                   {"notes", notes_},
                   {"versions", {{"v2l", V2L_VERSION}, {"format", "v1"}}}};
    if (manifest_->has_parent_path()) fs::create_directories(manifest_->parent_path());
    io::write_file_atomic(*manifest_, io::dump_document(doc));
}

void TrainOptions::add_to(CLI::App* app) {
    app->add_option("--epochs", config.epochs, "training epochs")->capture_default_str();
    app->add_option("--lr", config.learning_rate, "learning rate")->capture_default_str();
    app->add_option("--batch", config.batch_size, "mini-batch size")->capture_default_str();
    app->add_option("--clip", config.clip_norm, "global gradient-norm clip")->capture_default_str();
    app->add_option("--lambda", config.l2_lambda, "L2 weight-decay coefficient")->capture_default_str();
    app->add_option("--dropout", config.dropout_rate, "dropout rate on LSTM inputs")->capture_default_str();
    app->add_option("--seed", seed, "random seed")->capture_default_str();
}

Table read_table(const fs::path& path, const std::string& kind) {
    Table t;
    bool first = true;
    io::read_jsonl(path, [&](const json& j, std::size_t line) {
        if (first) {
            first = false;
            if (j.value("version", "") != "v1" || j.value("kind", "") != kind)
                throw DataError(path.string() + ":" + std::to_string(line) + ": expected a v1 '" + kind + "' header");
            t.header = j;
            return;
        }
        t.rows.push_back(j);
    });
    if (first) throw DataError(path.string() + ": empty file, expected a '" + kind + "' header");
    return t;
}

void write_table(const fs::path& path, const std::string& kind, json header, const std::vector<json>& rows) {
    header["version"] = "v1";
    header["kind"] = kind;
    std::string out = header.dump() + "\n";
    for (const auto& r : rows) out += r.dump() + "\n";
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    io::write_file_atomic(path, out);
}

const std::vector<float>& AttributeScores::at(const std::string& image_id) const {
    const auto it = by_image.find(image_id);
    if (it == by_image.end()) throw DataError("no attribute scores for image '" + image_id + "'");
    return it->second;
}

AttributeScores load_attribute_scores(const fs::path& path) {
    const auto file = attributes::load_predictions(path);
    AttributeScores s;
    s.terms = file.terms;
    for (const auto& [id, v] : file.images) s.by_image[id] = v.scores;
    return s;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) out += (out.empty() ? "" : " ") + t;
    return out;
}

std::string kb_endpoint(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("V2L_KB_ENDPOINT"); env && *env) return env;
    return knowledge::kDefaultEndpoint;
}

}  // namespace v2l::cli
