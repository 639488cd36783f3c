#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "v2l/attributes/model.hpp"
#include "v2l/numeric/optim.hpp"

namespace v2l::cli {

namespace fs = std::filesystem;
using nlohmann::json;

/// Inputs and outputs of one command invocation, written out as a run manifest.
class RunRecord {
public:
    /// Records the input's content hash and returns it unchanged.
    const fs::path& input(const fs::path& path);
    /// Records every file of a directory (sorted) as inputs.
    const fs::path& input_dir(const fs::path& dir);
    void output(const fs::path& path);
    void set_manifest(fs::path path) { manifest_ = std::move(path); }
    void note(const std::string& key, json value) { notes_[key] = std::move(value); }

    void write(const CLI::App& command, const std::string& name, const std::vector<std::string>& argv) const;

private:
    std::vector<std::pair<std::string, std::string>> inputs_;
    std::vector<std::string> outputs_;
    std::optional<fs::path> manifest_;
    json notes_ = json::object();
};

using Handler = std::function<void(RunRecord&)>;

struct Registry {
    std::vector<std::pair<CLI::App*, Handler>> commands;
    void add(CLI::App* app, Handler h) { commands.emplace_back(app, std::move(h)); }
};

void register_corpus_commands(CLI::App& root, Registry& registry);
void register_caption_commands(CLI::App& root, Registry& registry);
void register_knowledge_commands(CLI::App& root, Registry& registry);
void register_vqa_commands(CLI::App& root, Registry& registry);
void register_eval_commands(CLI::App& root, Registry& registry);

/// Optimiser flags shared by every train command.
struct TrainOptions {
    numeric::OptimizerConfig config;
    std::uint64_t seed = 1;
    void add_to(CLI::App* app);
};

/// Row-oriented JSON-lines table with a {"version": "v1", "kind": ...} header.
struct Table {
    json header;
    std::vector<json> rows;
};
Table read_table(const fs::path& path, const std::string& kind);
void write_table(const fs::path& path, const std::string& kind, json header, const std::vector<json>& rows);

/// image_id -> scores, plus the attribute terms, from an `attr predict` output.
struct AttributeScores {
    std::vector<std::string> terms;
    std::map<std::string, std::vector<float>> by_image;
    const std::vector<float>& at(const std::string& image_id) const;
};
AttributeScores load_attribute_scores(const fs::path& path);

std::string join_tokens(const std::vector<std::string>& tokens);
std::string kb_endpoint(const std::string& flag_value);

}  // namespace v2l::cli
