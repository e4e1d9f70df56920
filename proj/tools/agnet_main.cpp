// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
//
// agnet: synthetic data generation, two-step training, encoding and
// zero-shot retrieval evaluation.

#include "agnet/config.hpp"
#include "agnet/errors.hpp"
#include "agnet/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> code_length;
    std::optional<std::string> out_dir;
    std::optional<std::string> data_dir;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "Key-value config file");
    cmd->add_option("--seed", f.seed, "Master random seed");
    cmd->add_option("--code-length", f.code_length, "Hash code length in bits");
    cmd->add_option("--out", f.out_dir, "Output directory");
    cmd->add_option("--data", f.data_dir, "Dataset directory (default: <out>/data)");
}

agnet::PipelineConfig resolve(const CommonFlags& f) {
    agnet::PipelineConfig config;
    if (!f.config_path.empty()) {
        config = agnet::load_config(f.config_path);
    }
    if (f.seed) {
        config.seed = *f.seed;
    }
    if (f.code_length) {
        config.code_length = *f.code_length;
    }
    if (f.out_dir) {
        config.out_dir = *f.out_dir;
    }
    if (f.data_dir) {
        config.data_dir = *f.data_dir;
    }
    config.validate();
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"agnet: attribute-guided cross-modal zero-shot hashing"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string modality = "visual";
    std::string selection = "unseen";
    std::string task = "tbir";

    auto* gen = app.add_subcommand("gen-data", "Write a synthetic zero-shot dataset");
    add_common(gen, flags);
    auto* train = app.add_subcommand("train", "Train V2A/T2A, then the shared hash net");
    add_common(train, flags);
    auto* enc = app.add_subcommand("encode", "Encode instances (or class texts) to a code file");
    add_common(enc, flags);
    enc->add_option("--modality", modality, "visual or text")->check(CLI::IsMember({"visual", "text"}));
    enc->add_option("--select", selection, "all, seen or unseen")->check(CLI::IsMember({"all", "seen", "unseen"}));
    auto* eval = app.add_subcommand("eval", "Evaluate retrieval, PED, confusion or the attribute ablation");
    add_common(eval, flags);
    eval->add_option("--task", task, "tbir, ibir, ped, confusion or ablate")
        ->check(CLI::IsMember({"tbir", "ibir", "ped", "confusion", "ablate"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(agnet::ExitCode::validation);
    }

    try {
        const agnet::PipelineConfig config = resolve(flags);
        if (gen->parsed()) {
            agnet::cmd_gen_data(config);
            std::cout << "dataset written to " << config.dataset_dir().string() << "\n";
        } else if (train->parsed()) {
            agnet::cmd_train(config);
            std::cout << "models written to " << config.out_dir.string() << "\n";
        } else if (enc->parsed()) {
            const auto path =
                agnet::cmd_encode(config, agnet::parse_modality(modality), agnet::parse_selection(selection));
            std::cout << "codes written to " << path.string() << "\n";
        } else if (eval->parsed()) {
            std::cout << agnet::cmd_eval(config, agnet::parse_task(task)) << "\n";
        }
    } catch (const agnet::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return static_cast<int>(agnet::ExitCode::validation);
    } catch (const agnet::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return static_cast<int>(agnet::ExitCode::numeric);
    } catch (const agnet::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return static_cast<int>(agnet::ExitCode::io);
    } catch (const agnet::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(agnet::ExitCode::validation);
    }
    return static_cast<int>(agnet::ExitCode::ok);
}
