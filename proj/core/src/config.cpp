// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#include "agnet/config.hpp"

#include "agnet/errors.hpp"
#include "csv.hpp"

#include <algorithm>
#include <set>

namespace agnet {

namespace {

std::size_t parse_count(std::string_view key, std::string_view value) {
    try {
        return static_cast<std::size_t>(detail::parse_u64(value, 0));
    } catch (const ParseError&) {
        throw ValidationError("config: '" + std::string(key) + "' expects a non-negative integer, got '" +
                              std::string(value) + "'");
    }
}

double parse_real(std::string_view key, std::string_view value) {
    try {
        return detail::parse_double(value, 0);
    } catch (const ParseError&) {
        throw ValidationError("config: '" + std::string(key) + "' expects a number, got '" + std::string(value) +
                              "'");
    }
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1") {
        return true;
    }
    if (value == "false" || value == "0") {
        return false;
    }
    throw ValidationError("config: '" + std::string(key) + "' expects true or false, got '" + std::string(value) + "'");
}

std::vector<std::size_t> parse_list(std::string_view key, std::string_view value) {
    std::vector<std::size_t> out;
    if (detail::trim(value).empty()) {
        return out;
    }
    for (auto field : detail::split_fields(value)) {
        out.push_back(parse_count(key, detail::trim(field)));
    }
    return out;
}

std::string join(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i == 0 ? "" : ",") + std::to_string(v[i]);
    }
    return out;
}

void require_widths(const char* name, const std::vector<std::size_t>& widths, bool allow_empty) {
    if (!allow_empty && widths.empty()) {
        throw ValidationError(std::string("config: ") + name + " needs at least one hidden width");
    }
    for (std::size_t w : widths) {
        if (w == 0) {
            throw ValidationError(std::string("config: ") + name + " widths must be positive");
        }
    }
}

} // namespace

void PipelineConfig::validate() const {
    synthetic.validate();
    if (code_length < 1 || code_length > CodeMatrix::kMaxCodeLength) {
        throw ValidationError("config: code_length must lie in 1..4096");
    }
    if (!allow_any_code_length &&
        std::find(std::begin(kPaperCodeLengths), std::end(kPaperCodeLengths), code_length) ==
            std::end(kPaperCodeLengths)) {
        throw ValidationError("config: code_length " + std::to_string(code_length) +
                              " is not one of 8,16,32,48,64 (set allow_any_code_length = true to override)");
    }
    require_widths("v2a_hidden", v2a_hidden, true);
    require_widths("t2a_hidden", t2a_hidden, true);
    require_widths("a2h_hidden", a2h_hidden, true);
    weights.validate();
    a2h_schedule.validate();
    attribute_schedule.validate();
    if (training_cap && *training_cap == 0) {
        throw ValidationError("config: training_cap must be positive (use 'all' for no cap)");
    }
    if (baseline_draws == 0) {
        throw ValidationError("config: baseline_draws must be at least 1");
    }
    if (ablation_trials == 0) {
        throw ValidationError("config: ablation_trials must be at least 1");
    }
    for (std::size_t d : ablation_d) {
        if (d < 2) {
            throw ValidationError("config: every ablation_d value must be at least 2");
        }
    }
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
    value = detail::trim(value);
    if (key == "seed") {
        seed = detail::parse_u64(value, 0);
    } else if (key == "out_dir") {
        out_dir = std::string(value);
    } else if (key == "data_dir") {
        data_dir = std::string(value);
    } else if (key == "synthetic.seen") {
        synthetic.seen_classes = parse_count(key, value);
    } else if (key == "synthetic.unseen") {
        synthetic.unseen_classes = parse_count(key, value);
    } else if (key == "synthetic.attributes") {
        synthetic.attribute_dim = parse_count(key, value);
    } else if (key == "synthetic.visual_dim") {
        synthetic.visual_dim = parse_count(key, value);
    } else if (key == "synthetic.text_dim") {
        synthetic.text_dim = parse_count(key, value);
    } else if (key == "synthetic.per_class") {
        synthetic.per_class = parse_count(key, value);
    } else if (key == "synthetic.noise_sigma") {
        synthetic.noise_sigma = parse_real(key, value);
    } else if (key == "synthetic.attribute_density") {
        synthetic.attribute_density = parse_real(key, value);
    } else if (key == "code_length") {
        code_length = parse_count(key, value);
    } else if (key == "allow_any_code_length") {
        allow_any_code_length = parse_bool(key, value);
    } else if (key == "v2a_hidden") {
        v2a_hidden = parse_list(key, value);
    } else if (key == "t2a_hidden") {
        t2a_hidden = parse_list(key, value);
    } else if (key == "a2h_hidden") {
        a2h_hidden = parse_list(key, value);
    } else if (key == "lambda") {
        weights.lambda = parse_real(key, value);
    } else if (key == "eta") {
        weights.eta = parse_real(key, value);
    } else if (key == "learning_rate") {
        a2h_schedule.initial_lr = parse_real(key, value);
    } else if (key == "lr_decay") {
        a2h_schedule.per_iteration_decay = parse_real(key, value);
    } else if (key == "batch_size") {
        a2h_schedule.batch_size = parse_count(key, value);
    } else if (key == "attribute_learning_rate") {
        attribute_schedule.initial_lr = parse_real(key, value);
    } else if (key == "attribute_lr_decay") {
        attribute_schedule.per_iteration_decay = parse_real(key, value);
    } else if (key == "attribute_batch_size") {
        attribute_schedule.batch_size = parse_count(key, value);
    } else if (key == "attribute_epochs") {
        attribute_epochs = parse_count(key, value);
    } else if (key == "a2h_epochs") {
        a2h_epochs = parse_count(key, value);
    } else if (key == "grad_q_enabled") {
        grad_q_enabled = parse_bool(key, value);
    } else if (key == "a2h_normalization") {
        if (value == "sum") {
            a2h_normalization = LossNormalization::sum;
        } else if (value == "per_anchor") {
            a2h_normalization = LossNormalization::per_anchor;
        } else if (value == "per_pair") {
            a2h_normalization = LossNormalization::per_pair;
        } else {
            throw ValidationError("config: a2h_normalization must be 'sum', 'per_anchor' or 'per_pair'");
        }
    } else if (key == "empty_ball_policy") {
        if (value == "exclude") {
            empty_ball_policy = EmptyBallPolicy::exclude;
        } else if (value == "zero") {
            empty_ball_policy = EmptyBallPolicy::zero;
        } else {
            throw ValidationError("config: empty_ball_policy must be 'exclude' or 'zero'");
        }
    } else if (key == "training_cap") {
        training_cap = value == "all" ? std::nullopt : std::optional<std::size_t>(parse_count(key, value));
    } else if (key == "ibir_queries") {
        ibir_queries = parse_count(key, value);
    } else if (key == "baseline_draws") {
        baseline_draws = parse_count(key, value);
    } else if (key == "ablation_d") {
        ablation_d = parse_list(key, value);
    } else if (key == "ablation_trials") {
        ablation_trials = parse_count(key, value);
    } else {
        throw ValidationError("config: unknown key '" + std::string(key) + "'");
    }
}

std::string PipelineConfig::canonical() const {
    std::string s;
    auto kv = [&s](std::string_view k, const std::string& v) {
        s += std::string(k) + " = " + v + "\n";
    };
    auto real = [](double v) { return detail::format_double(v); };
    kv("seed", std::to_string(seed));
    kv("out_dir", out_dir.generic_string());
    kv("data_dir", data_dir.generic_string());
    kv("synthetic.seen", std::to_string(synthetic.seen_classes));
    kv("synthetic.unseen", std::to_string(synthetic.unseen_classes));
    kv("synthetic.attributes", std::to_string(synthetic.attribute_dim));
    kv("synthetic.visual_dim", std::to_string(synthetic.visual_dim));
    kv("synthetic.text_dim", std::to_string(synthetic.text_dim));
    kv("synthetic.per_class", std::to_string(synthetic.per_class));
    kv("synthetic.noise_sigma", real(synthetic.noise_sigma));
    kv("synthetic.attribute_density", real(synthetic.attribute_density));
    kv("code_length", std::to_string(code_length));
    kv("allow_any_code_length", allow_any_code_length ? "true" : "false");
    kv("v2a_hidden", join(v2a_hidden));
    kv("t2a_hidden", join(t2a_hidden));
    kv("a2h_hidden", join(a2h_hidden));
    kv("lambda", real(weights.lambda));
    kv("eta", real(weights.eta));
    kv("learning_rate", real(a2h_schedule.initial_lr));
    kv("lr_decay", real(a2h_schedule.per_iteration_decay));
    kv("batch_size", std::to_string(a2h_schedule.batch_size));
    kv("attribute_learning_rate", real(attribute_schedule.initial_lr));
    kv("attribute_lr_decay", real(attribute_schedule.per_iteration_decay));
    kv("attribute_batch_size", std::to_string(attribute_schedule.batch_size));
    kv("attribute_epochs", std::to_string(attribute_epochs));
    kv("a2h_epochs", std::to_string(a2h_epochs));
    kv("grad_q_enabled", grad_q_enabled ? "true" : "false");
    kv("a2h_normalization", a2h_normalization == LossNormalization::sum          ? "sum"
                            : a2h_normalization == LossNormalization::per_anchor ? "per_anchor"
                                                                                 : "per_pair");
    kv("empty_ball_policy", empty_ball_policy == EmptyBallPolicy::exclude ? "exclude" : "zero");
    kv("training_cap", training_cap ? std::to_string(*training_cap) : "all");
    kv("ibir_queries", std::to_string(ibir_queries));
    kv("baseline_draws", std::to_string(baseline_draws));
    kv("ablation_d", join(ablation_d));
    kv("ablation_trials", std::to_string(ablation_trials));
    return s;
}

std::uint64_t PipelineConfig::hash() const {
    return fnv1a64(canonical());
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
    std::set<std::string> seen_keys;
    std::size_t line_no = 0;
    for (auto line : detail::split_fields(text, '\n')) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("config: expected 'key = value'", line_no);
        }
        const auto key = detail::trim(line.substr(0, eq));
        if (!seen_keys.insert(std::string(key)).second) {
            throw ParseError("config: duplicate key '" + std::string(key) + "'", line_no);
        }
        try {
            base.set(key, line.substr(eq + 1));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
    std::string text;
    for (const auto& line : detail::read_lines(path)) {
        text += line;
        text += '\n';
    }
    return parse_config(text, std::move(base));
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace agnet
