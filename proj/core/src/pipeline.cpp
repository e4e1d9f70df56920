// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#include "agnet/pipeline.hpp"

#include "agnet/binary_io.hpp"
#include "agnet/errors.hpp"
#include "agnet/log.hpp"
#include "agnet/rng.hpp"
#include "csv.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#ifndef AGNET_VERSION
#define AGNET_VERSION "unknown"
#endif

namespace agnet {

namespace {

namespace fs = std::filesystem;

constexpr std::size_t kAblationMaxDraws = 100;

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    }
}

/// Records `files` (names relative to `dir`) in `dir/manifest.txt`, keeping
/// entries written by earlier commands. Lines are sorted by file name.
void update_manifest(const fs::path& dir, std::string_view command, const PipelineConfig& config,
                     const std::vector<std::string>& files) {
    const fs::path path = dir / "manifest.txt";
    std::map<std::string, std::string> entries;
    if (fs::exists(path)) {
        for (const auto& line : detail::read_lines(path)) {
            if (line.empty() || line.front() == '#') {
                continue;
            }
            entries[line.substr(0, line.find(' '))] = line;
        }
    }
    for (const auto& name : files) {
        const std::string bytes = binio::read_file(dir / name);
        entries[name] = name + " command=" + std::string(command) + " config_hash=" + hex64(config.hash()) +
                        " seed=" + std::to_string(config.seed) + " version=" + AGNET_VERSION +
                        " fnv64=" + hex64(fnv1a64(bytes));
    }
    std::string out = "# agnet manifest: file command config_hash seed version content_hash\n";
    for (const auto& [name, line] : entries) {
        out += line + "\n";
    }
    detail::write_text(path, out);
}

std::string modality_name(Modality m) {
    return m == Modality::visual ? "visual" : "text";
}

std::string selection_name(EncodeSelection s) {
    switch (s) {
    case EncodeSelection::seen:
        return "seen";
    case EncodeSelection::unseen:
        return "unseen";
    case EncodeSelection::all:
        break;
    }
    return "all";
}

void check_models_fit(const TrainedModels& m, const DataSet& ds) {
    const std::size_t d = ds.attribute_dim();
    if (m.v2a.input_dim() != ds.visual_dim() || m.v2a.output_dim() != d) {
        throw ShapeError("V2A model maps " + std::to_string(m.v2a.input_dim()) + " -> " +
                         std::to_string(m.v2a.output_dim()) + " but the dataset has visual dim " +
                         std::to_string(ds.visual_dim()) + " and d = " + std::to_string(d));
    }
    if (m.t2a.input_dim() != ds.text_dim() || m.t2a.output_dim() != d) {
        throw ShapeError("T2A model maps " + std::to_string(m.t2a.input_dim()) + " -> " +
                         std::to_string(m.t2a.output_dim()) + " but the dataset has text dim " +
                         std::to_string(ds.text_dim()) + " and d = " + std::to_string(d));
    }
    if (m.a2h.attribute_dim() != d) {
        throw ShapeError("A2H model expects " + std::to_string(m.a2h.attribute_dim()) + " attributes, dataset has " +
                         std::to_string(d));
    }
}

std::string embeddings_csv(const Matrix& outputs, std::span<const std::uint64_t> ids, std::span<const Label> labels) {
    std::string out = "id,label";
    for (std::size_t j = 0; j < outputs.cols(); ++j) {
        out += ",e" + std::to_string(j + 1);
    }
    out += "\n";
    for (std::size_t i = 0; i < outputs.rows(); ++i) {
        out += std::to_string(ids[i]) + "," + std::to_string(labels[i]);
        for (double v : outputs.row(i)) {
            out += "," + detail::format_double(v);
        }
        out += "\n";
    }
    return out;
}

std::vector<Label> classes_for(const DataSet& ds, EncodeSelection selection) {
    std::vector<Label> out;
    if (selection != EncodeSelection::unseen) {
        out.insert(out.end(), ds.split().seen.begin(), ds.split().seen.end());
    }
    if (selection != EncodeSelection::seen) {
        out.insert(out.end(), ds.split().unseen.begin(), ds.split().unseen.end());
    }
    std::ranges::sort(out);
    return out;
}

std::vector<std::size_t> instances_for(const DataSet& ds, EncodeSelection selection) {
    switch (selection) {
    case EncodeSelection::seen:
        return ds.seen_indices();
    case EncodeSelection::unseen:
        return ds.unseen_indices();
    case EncodeSelection::all:
        break;
    }
    std::vector<std::size_t> all(ds.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
    }
    return all;
}

double baseline_map(const CodeMatrix& queries, const CodeMatrix& db, Protocol protocol, const PipelineConfig& config) {
    double sum = 0.0;
    for (std::size_t draw = 0; draw < config.baseline_draws; ++draw) {
        Rng rng(derive_seed(config.seed, Stream::baseline, draw));
        const CodeMatrix q = random_codes(queries.labels(), queries.code_length(), rng);
        const CodeMatrix d = random_codes(db.labels(), db.code_length(), rng);
        sum += mean_average_precision(q, d, protocol, config.empty_ball_policy).map_value;
    }
    return sum / static_cast<double>(config.baseline_draws);
}

std::string retrieval_summary_csv(const RetrievalResult& r) {
    const auto& rep = r.report;
    return "protocol,code_length,queries,map,precision_r2,random_baseline_map\n" + std::string(to_string(rep.protocol)) +
           "," + std::to_string(rep.code_length) + "," + std::to_string(rep.per_query_ap.size()) + "," +
           detail::format_double(rep.map_value) + "," +
           (rep.precision_at_r2 ? detail::format_double(*rep.precision_at_r2) : std::string("nan")) + "," +
           detail::format_double(r.random_baseline_map) + "\n";
}

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t salt) {
    auto mix = [](std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ static_cast<std::uint64_t>(stream)) ^ salt);
}

TrainingRun train_pipeline(const DataSet& ds, const PipelineConfig& config) {
    config.validate();
    TrainingRun run;
    {
        Rng rng(derive_seed(config.seed, Stream::training_subset));
        run.train_ids = training_indices(ds, config.training_cap, rng);
    }
    const std::size_t d = ds.attribute_dim();

    Rng v2a_init(derive_seed(config.seed, Stream::v2a_init));
    Rng t2a_init(derive_seed(config.seed, Stream::t2a_init));
    Rng a2h_init(derive_seed(config.seed, Stream::a2h_init));
    Rng v2a_rng(derive_seed(config.seed, Stream::v2a_train));
    Rng t2a_rng(derive_seed(config.seed, Stream::t2a_train));
    Rng a2h_rng(derive_seed(config.seed, Stream::a2h_train));

    log_info("training V2A on " + std::to_string(run.train_ids.size()) + " seen instances");
    run.v2a = train_attribute_net(make_attribute_net(ds.visual_dim(), config.v2a_hidden, d, v2a_init), ds,
                                  Modality::visual, run.train_ids, config.attribute_schedule, config.attribute_epochs,
                                  v2a_rng);
    log_info("V2A loss " + fixed(run.v2a.initial_loss) + " -> " + fixed(run.v2a.final_loss));
    run.t2a = train_attribute_net(make_attribute_net(ds.text_dim(), config.t2a_hidden, d, t2a_init), ds,
                                  Modality::text, run.train_ids, config.attribute_schedule, config.attribute_epochs,
                                  t2a_rng);
    log_info("T2A loss " + fixed(run.t2a.initial_loss) + " -> " + fixed(run.t2a.final_loss));

    run.models.v2a = run.v2a.model;
    run.models.t2a = run.t2a.model;
    const AttributePrediction pred_v = predict(run.models, ds, Modality::visual, run.train_ids);
    const AttributePrediction pred_t = predict(run.models, ds, Modality::text, run.train_ids);

    const std::size_t iterations =
        config.a2h_epochs * a2h_iterations_per_epoch(run.train_ids.size(), config.a2h_schedule.batch_size);
    log_info("training A2H for " + std::to_string(iterations) + " iterations");
    A2HTrainResult a2h = train_a2h(make_a2h(d, config.code_length, config.a2h_hidden, a2h_init), pred_v, pred_t,
                                   ds.labels_of(run.train_ids), ds.attribute_table(), config.a2h_schedule,
                                   config.weights, iterations, a2h_rng, A2HTrainOptions{config.grad_q_enabled, config.a2h_normalization});
    run.models.a2h = std::move(a2h.model);
    run.a2h_trace = std::move(a2h.trace);
    return run;
}

AttributePrediction predict(const TrainedModels& models, const DataSet& ds, Modality modality,
                            std::span<const std::size_t> indices) {
    const MlpModel& net = modality == Modality::visual ? models.v2a : models.t2a;
    return predict_attributes(net, ds.features(modality).gather_rows(indices));
}

CodeMatrix encode_instances(const TrainedModels& models, const DataSet& ds, Modality modality,
                            std::span<const std::size_t> indices) {
    return encode(models.a2h, predict(models, ds, modality, indices), ds.labels_of(indices));
}

RetrievalResult run_tbir(const DataSet& ds, const TrainedModels& models, const PipelineConfig& config) {
    check_models_fit(models, ds);
    const TbirProtocol protocol = make_tbir_protocol(ds);
    const CodeMatrix queries = encode_instances(models, ds, Modality::text, protocol.query_sources);
    const CodeMatrix db = encode_instances(models, ds, Modality::visual, protocol.retrieval);
    RetrievalResult r;
    r.report = mean_average_precision(queries, db, Protocol::tbir, config.empty_ball_policy);
    r.random_baseline_map = baseline_map(queries, db, Protocol::tbir, config);
    return r;
}

std::size_t ibir_query_count(const DataSet& ds, const PipelineConfig& config) {
    if (config.ibir_queries != 0) {
        return config.ibir_queries;
    }
    return std::max<std::size_t>(1, std::min<std::size_t>(1000, ds.unseen_indices().size() / 4));
}

RetrievalResult run_ibir(const DataSet& ds, const TrainedModels& models, const PipelineConfig& config) {
    check_models_fit(models, ds);
    Rng rng(derive_seed(config.seed, Stream::ibir_protocol));
    const IbirProtocol protocol = make_ibir_protocol(ds, ibir_query_count(ds, config), rng);
    const CodeMatrix queries = encode_instances(models, ds, Modality::visual, protocol.queries);
    const CodeMatrix db = encode_instances(models, ds, Modality::visual, protocol.retrieval);
    RetrievalResult r;
    r.report = mean_average_precision(queries, db, Protocol::ibir, config.empty_ball_policy);
    r.random_baseline_map = baseline_map(queries, db, Protocol::ibir, config);
    return r;
}

std::vector<PedRow> run_ped(const DataSet& ds, const TrainedModels& models) {
    check_models_fit(models, ds);
    std::vector<PedRow> rows;
    const std::pair<std::string, std::vector<std::size_t>> sides[] = {{"seen", ds.seen_indices()},
                                                                      {"unseen", ds.unseen_indices()}};
    for (Modality m : {Modality::visual, Modality::text}) {
        for (const auto& [name, idx] : sides) {
            if (idx.empty()) {
                continue;
            }
            rows.push_back({m, name, positive_error_distance(ds.attributes_of(idx), predict(models, ds, m, idx).values())});
        }
    }
    return rows;
}

ConfusionMatrix run_confusion(const DataSet& ds, const TrainedModels& models) {
    check_models_fit(models, ds);
    const TbirProtocol protocol = make_tbir_protocol(ds);
    const CodeMatrix text = encode_instances(models, ds, Modality::text, protocol.query_sources);
    const CodeMatrix images = encode_instances(models, ds, Modality::visual, protocol.retrieval);
    return text_image_confusion(text, images);
}

std::vector<AblationRow> attribute_ablation(const DataSet& ds, std::span<const std::size_t> d_values,
                                            std::size_t trials, const PipelineConfig& config) {
    if (trials == 0) {
        throw ValidationError("ablation: trials must be at least 1");
    }
    for (std::size_t d : d_values) {
        if (d < 2) {
            throw ValidationError("ablation: attribute count " + std::to_string(d) + " is below 2");
        }
        if (d > ds.attribute_dim()) {
            throw ValidationError("ablation: attribute count " + std::to_string(d) + " exceeds the table width " +
                                  std::to_string(ds.attribute_dim()));
        }
    }
    std::vector<AblationRow> rows;
    for (std::size_t d : d_values) {
        AblationRow row{d, {}, 0.0};
        for (std::size_t trial = 0; trial < trials; ++trial) {
            Rng rng(derive_seed(config.seed, Stream::ablation, d * 1'000'003ULL + trial));
            std::vector<std::size_t> cols;
            bool ok = false;
            for (std::size_t attempt = 0; attempt < kAblationMaxDraws && !ok; ++attempt) {
                cols = rng.sample_without_replacement(ds.attribute_dim(), d);
                std::ranges::sort(cols);
                const Matrix sub = ds.attribute_table().gather_cols(cols);
                ok = true;
                for (std::size_t c = 0; c < sub.rows() && ok; ++c) {
                    ok = std::ranges::any_of(sub.row(c), [](double v) { return v == 1.0; });
                }
            }
            if (!ok) {
                throw ValidationError("ablation: no subset of " + std::to_string(d) +
                                      " attributes leaves every class with a positive tag");
            }
            const DataSet sub = ds.with_attribute_columns(cols);
            PipelineConfig trial_config = config;
            trial_config.seed = derive_seed(config.seed, Stream::ablation, trial);
            const TrainingRun run = train_pipeline(sub, trial_config);
            const double map = run_tbir(sub, run.models, trial_config).report.map_value;
            log_info("ablation d=" + std::to_string(d) + " trial " + std::to_string(trial + 1) + " mAP " + fixed(map));
            row.trial_maps.push_back(map);
        }
        double sum = 0.0;
        for (double m : row.trial_maps) {
            sum += m;
        }
        row.mean_map = sum / static_cast<double>(trials);
        rows.push_back(std::move(row));
    }
    return rows;
}

EncodeSelection parse_selection(std::string_view name) {
    if (name == "all") {
        return EncodeSelection::all;
    }
    if (name == "seen") {
        return EncodeSelection::seen;
    }
    if (name == "unseen") {
        return EncodeSelection::unseen;
    }
    throw ValidationError("unknown selection '" + std::string(name) + "' (expected all, seen or unseen)");
}

EvalTask parse_task(std::string_view name) {
    if (name == "tbir") {
        return EvalTask::tbir;
    }
    if (name == "ibir") {
        return EvalTask::ibir;
    }
    if (name == "ped") {
        return EvalTask::ped;
    }
    if (name == "confusion") {
        return EvalTask::confusion;
    }
    if (name == "ablate") {
        return EvalTask::ablate;
    }
    throw ValidationError("unknown task '" + std::string(name) + "' (expected tbir, ibir, ped, confusion or ablate)");
}

Modality parse_modality(std::string_view name) {
    if (name == "visual") {
        return Modality::visual;
    }
    if (name == "text") {
        return Modality::text;
    }
    throw ValidationError("unknown modality '" + std::string(name) + "' (expected visual or text)");
}

void cmd_gen_data(const PipelineConfig& config) {
    config.validate();
    Rng rng(derive_seed(config.seed, Stream::dataset));
    const DataSet ds = generate_synthetic(config.synthetic, rng);
    const fs::path dir = config.dataset_dir();
    ensure_dir(dir);
    save_dataset(ds, DatasetPaths::in_directory(dir));
    update_manifest(dir, "gen-data", config, {"attributes.csv", "split.txt", "text.csv", "visual.csv"});
    log_info("wrote " + std::to_string(ds.size()) + " instances to " + dir.string());
}

void cmd_train(const PipelineConfig& config) {
    config.validate();
    const DataSet ds = load_dataset(DatasetPaths::in_directory(config.dataset_dir()));
    const TrainingRun run = train_pipeline(ds, config);
    ensure_dir(config.out_dir);
    save_model(run.models.v2a, config.out_dir / "v2a.model");
    save_model(run.models.t2a, config.out_dir / "t2a.model");
    save_model(run.models.a2h.net, config.out_dir / "a2h.model");
    write_attribute_trace(run.v2a.trace, config.out_dir / "v2a_trace.csv");
    write_attribute_trace(run.t2a.trace, config.out_dir / "t2a_trace.csv");
    write_a2h_trace(run.a2h_trace, config.out_dir / "a2h_trace.csv");
    update_manifest(config.out_dir, "train", config,
                    {"a2h.model", "a2h_trace.csv", "t2a.model", "t2a_trace.csv", "v2a.model", "v2a_trace.csv"});
}

TrainedModels load_models(const fs::path& dir) {
    TrainedModels m;
    m.v2a = load_model(dir / "v2a.model");
    m.t2a = load_model(dir / "t2a.model");
    m.a2h = as_a2h(load_model(dir / "a2h.model"));
    return m;
}

fs::path cmd_encode(const PipelineConfig& config, Modality modality, EncodeSelection selection) {
    config.validate();
    const DataSet ds = load_dataset(DatasetPaths::in_directory(config.dataset_dir()));
    const TrainedModels models = load_models(config.out_dir);
    check_models_fit(models, ds);
    if (models.a2h.code_length() != config.code_length) {
        throw ValidationError("encode: hash model produces " + std::to_string(models.a2h.code_length()) +
                              "-bit codes but the config asks for " + std::to_string(config.code_length));
    }

    std::vector<std::size_t> rows;
    if (modality == Modality::text) {
        rows = ds.class_representatives(classes_for(ds, selection));
    } else {
        rows = instances_for(ds, selection);
    }
    const AttributePrediction pred = predict(models, ds, modality, rows);
    const Matrix outputs = hash_outputs(models.a2h, pred);
    const std::vector<Label> labels = ds.labels_of(rows);
    const CodeMatrix codes = pack_signs(outputs, labels);

    std::vector<std::uint64_t> ids;
    for (std::size_t r : rows) {
        ids.push_back(modality == Modality::text ? ds.labels()[r] : ds.ids()[r]);
    }
    const std::string stem = modality_name(modality) + "_" + selection_name(selection);
    const fs::path code_path = config.out_dir / ("codes_" + stem + ".agh");
    save_codes(codes, code_path);
    detail::write_text(config.out_dir / ("embeddings_" + stem + ".csv"), embeddings_csv(outputs, ids, labels));
    update_manifest(config.out_dir, "encode", config, {"codes_" + stem + ".agh", "embeddings_" + stem + ".csv"});
    return code_path;
}

std::string cmd_eval(const PipelineConfig& config, EvalTask task) {
    config.validate();
    const DataSet ds = load_dataset(DatasetPaths::in_directory(config.dataset_dir()));
    ensure_dir(config.out_dir);
    std::string summary;

    switch (task) {
    case EvalTask::tbir:
    case EvalTask::ibir: {
        const TrainedModels models = load_models(config.out_dir);
        const RetrievalResult r =
            task == EvalTask::tbir ? run_tbir(ds, models, config) : run_ibir(ds, models, config);
        const std::string name = std::string("eval_") + std::string(to_string(r.report.protocol));
        detail::write_text(config.out_dir / (name + ".csv"), retrieval_summary_csv(r));
        write_per_query_csv(r.report, config.out_dir / (name + "_per_query.csv"));
        update_manifest(config.out_dir, "eval", config, {name + ".csv", name + "_per_query.csv"});
        summary = format_report(r.report) + " random-baseline mAP=" + fixed(r.random_baseline_map);
        break;
    }
    case EvalTask::ped: {
        const auto rows = run_ped(ds, load_models(config.out_dir));
        std::string csv = "modality,split,ped\n";
        for (const auto& row : rows) {
            csv += modality_name(row.modality) + "," + row.split + "," + detail::format_double(row.ped) + "\n";
            summary += "PED " + modality_name(row.modality) + "/" + row.split + " = " + fixed(row.ped) + "\n";
        }
        detail::write_text(config.out_dir / "eval_ped.csv", csv);
        update_manifest(config.out_dir, "eval", config, {"eval_ped.csv"});
        break;
    }
    case EvalTask::confusion: {
        const ConfusionMatrix cm = run_confusion(ds, load_models(config.out_dir));
        write_confusion_csv(cm, config.out_dir / "eval_confusion.csv");
        update_manifest(config.out_dir, "eval", config, {"eval_confusion.csv"});
        summary = format_confusion(cm);
        break;
    }
    case EvalTask::ablate: {
        const auto rows = attribute_ablation(ds, config.ablation_d, config.ablation_trials, config);
        std::string csv = "attributes";
        for (std::size_t t = 0; t < config.ablation_trials; ++t) {
            csv += ",trial_" + std::to_string(t + 1);
        }
        csv += ",mean_map\n";
        for (const auto& row : rows) {
            csv += std::to_string(row.attribute_count);
            for (double m : row.trial_maps) {
                csv += "," + detail::format_double(m);
            }
            csv += "," + detail::format_double(row.mean_map) + "\n";
            summary += "d=" + std::to_string(row.attribute_count) + " mean mAP=" + fixed(row.mean_map) + "\n";
        }
        detail::write_text(config.out_dir / "eval_ablation.csv", csv);
        update_manifest(config.out_dir, "eval", config, {"eval_ablation.csv"});
        break;
    }
    }
    return summary;
}

} // namespace agnet
