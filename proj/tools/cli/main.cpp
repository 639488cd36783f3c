#include <fstream>
#include <iostream>
#include <set>

#include "common.hpp"
#include "v2l/error.hpp"

namespace {

bool has_flag(const std::vector<std::string>& args, const std::string& name) {
    for (const auto& a : args)
        if (a == "--" + name || a.rfind("--" + name + "=", 0) == 0) return true;
    return false;
}

/// Appends `--key value` for every config-file entry the command line does not
/// already set, so explicit flags take precedence.
std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::vector<std::string> command;
    for (std::size_t i = 1; i < args.size() && command.size() < 2 && args[i].rfind("-", 0) != 0; ++i)
        command.push_back(args[i]);
    std::ifstream in(path);
    if (!in) throw CLI::FileError::Missing(path);
    for (const auto& item : CLI::ConfigTOML().from_config(in)) {
        if (item.name == "++" || item.name == "--") continue;
        if (!item.parents.empty() && item.parents != command) continue;
        if (has_flag(args, item.name)) continue;
        if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
            if (item.inputs[0] == "true") args.push_back("--" + item.name);
            continue;
        }
        args.push_back("--" + item.name);
        for (const auto& v : item.inputs) args.push_back(v);
    }
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace v2l::cli;
    CLI::App app{"Attribute-based vision-to-language toolkit: vocabularies, attribute, caption, knowledge and VQA "
                 "models, and evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", V2L_VERSION);

    Registry registry;
    register_corpus_commands(app, registry);
    register_caption_commands(app, registry);
    register_knowledge_commands(app, registry);
    register_vqa_commands(app, registry);
    register_eval_commands(app, registry);
    for (auto& [cmd, handler] : registry.commands) {
        cmd->add_option("--config", "TOML/INI file of option values ([group.command] sections or top-level keys); "
                                    "command-line flags take precedence");
        cmd->add_option("--manifest", "run manifest path (default: <first output>.run.json)");
    }

    std::vector<std::string> args(argv, argv + argc);
    try {
        args = merge_config(args);
        std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::set<std::string> seen_warnings;
    std::size_t repeated_warnings = 0;
    v2l::set_warning_sink([&](const std::string& w) {
        if (seen_warnings.insert(w).second)
            std::cerr << "warning: " << w << "\n";
        else
            ++repeated_warnings;
    });
    struct Summary {
        std::size_t& n;
        ~Summary() {
            if (n > 0) std::cerr << "(" << n << " repeated warnings suppressed)\n";
        }
    } summary{repeated_warnings};

    for (auto& [cmd, handler] : registry.commands) {
        if (!cmd->parsed()) continue;
        const std::string name = cmd->get_parent()->get_name() + " " + cmd->get_name();
        try {
            RunRecord record;
            if (const auto* m = cmd->get_option("--manifest"); m->count() > 0) record.set_manifest(m->as<std::string>());
            handler(record);
            record.write(*cmd, name, args);
            return 0;
        } catch (const v2l::PreconditionError& e) {
            std::cerr << "v2l " << name << ": invalid input: " << e.what() << "\n";
            return 1;
        } catch (const v2l::Error& e) {
            std::cerr << "v2l " << name << ": error: " << e.what() << "\n";
            return 1;
        } catch (const std::exception& e) {
            std::cerr << "v2l " << name << ": unexpected error: " << e.what() << "\n";
            return 1;
        }
    }
    std::cerr << "v2l: no command selected\n";
    return 2;
}
