// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
//
// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include "agnet/a2h.hpp"
#include "agnet/attribute_nets.hpp"
#include "agnet/binary_io.hpp"
#include "agnet/config.hpp"
#include "agnet/dataset.hpp"
#include "agnet/evaluation.hpp"
#include "agnet/pipeline.hpp"
#include "agnet/retrieval.hpp"
#include "agnet/rng.hpp"
#include "agnet/similarity.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace agnet;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;
int ran = 0;
std::vector<std::string> only; // criterion names from argv; empty runs all

void report(const char* name, const std::function<Outcome()>& check) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) {
        return;
    }
    ++ran;
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Flattens weights then biases of every layer into one 1 × n row.
Matrix flatten(const MlpGradients& g) {
    std::vector<double> v;
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
        v.insert(v.end(), g.weights[l].data().begin(), g.weights[l].data().end());
        v.insert(v.end(), g.biases[l].data().begin(), g.biases[l].data().end());
    }
    const std::size_t n = v.size();
    return Matrix(1, n, std::move(v));
}

// Fresh nets start with zero biases, which puts a ReLU exactly at its kink
// whenever a whole input row to it is zero; random biases keep every check at
// a differentiable point.
MlpModel with_random_biases(const MlpModel& model, Rng& rng) {
    auto layers = model.layers();
    for (auto& layer : layers) {
        layer.bias = oracle::random_matrix(1, layer.bias.cols(), rng, -0.5, 0.5);
    }
    return MlpModel(layers);
}

// Central differences of `objective` over every parameter of `model`.
Matrix numeric_param_grad(const MlpModel& model, const std::function<double(const MlpModel&)>& objective,
                          double eps) {
    MlpGradients g;
    for (std::size_t l = 0; l < model.layers().size(); ++l) {
        auto perturbed = [&](bool bias) {
            return finite_diff_gradient(
                [&](const Matrix& x) {
                    auto layers = model.layers();
                    (bias ? layers[l].bias : layers[l].weights) = x;
                    return objective(MlpModel(layers));
                },
                bias ? model.layers()[l].bias : model.layers()[l].weights, eps);
        };
        g.weights.push_back(perturbed(false));
        g.biases.push_back(perturbed(true));
    }
    return flatten(g);
}

Outcome gradient_fidelity() {
    const auto t0 = Clock::now();
    Rng rng(20240611);
    const double eps = 1e-6; // larger steps can straddle a ReLU kink on some fixtures
    const double tol = 1e-4;
    double worst = 0.0;
    for (int fixture = 0; fixture < 100; ++fixture) {
        const std::size_t m = 2 + rng.below(5);
        const std::size_t c = 2 + rng.below(7);
        const std::size_t d = 3 + rng.below(8);

        Matrix table(3, d);
        for (std::size_t k = 0; k < 3; ++k) {
            table(k, rng.below(d)) = 1.0;
            for (std::size_t j = 0; j < d; ++j) {
                table(k, j) = rng.bernoulli(0.3) ? 1.0 : table(k, j);
            }
        }
        std::vector<Label> labels(m);
        for (auto& l : labels) {
            l = static_cast<Label>(1 + rng.below(3));
        }
        std::vector<std::size_t> rows(m);
        for (std::size_t i = 0; i < m; ++i) {
            rows[i] = labels[i] - 1;
        }
        const Matrix truth = table.gather_rows(rows);
        const SimilarityPair s = make_similarity(truth, labels);

        // Attribute net: cross-entropy through the sigmoid head.
        const std::size_t in_dim = 4 + rng.below(5);
        const MlpModel attr_net =
            with_random_biases(make_attribute_net(in_dim, std::vector<std::size_t>{6, 5}, d, rng), rng);
        const Matrix x = oracle::random_matrix(m, in_dim, rng);
        const ForwardTrace at = attr_net.forward_trace(x);
        const Matrix attr_analytic =
            flatten(attr_net.backward(at, attribute_loss_gradient(at.result(), truth)));
        const Matrix attr_numeric = numeric_param_grad(
            attr_net, [&](const MlpModel& net) { return attribute_loss(net.forward(x), truth); }, eps);
        worst = std::max(worst, oracle::relative_error(attr_analytic, attr_numeric));

        // Hash net: category, attribute and regularization terms, B held fixed.
        const A2HModel a2h{with_random_biases(make_a2h(d, c, std::vector<std::size_t>{7, 6}, rng).net, rng)};
        const Matrix xv = oracle::random_matrix(m, d, rng, 0.05, 0.95);
        const Matrix xt = oracle::random_matrix(m, d, rng, 0.05, 0.95);
        const ForwardTrace tv = a2h.net.forward_trace(xv);
        const ForwardTrace tt = a2h.net.forward_trace(xt);
        const Matrix p = tv.result().transposed();
        const Matrix q = tt.result().transposed();
        const Matrix b = binarize(p);
        const LossWeights w;

        const Matrix gp = grad_P(p, q, b, s.s_cat, s.s_att, w);
        const Matrix gq = grad_Q(p, q, s.s_cat);
        worst = std::max(worst, oracle::relative_error(
                                    gp, finite_diff_gradient(
                                            [&](const Matrix& pp) {
                                                return loss_total(pp, q, b, s.s_cat, s.s_att, w);
                                            },
                                            p, eps)));
        worst = std::max(worst, oracle::relative_error(
                                    gq, finite_diff_gradient(
                                            [&](const Matrix& qq) {
                                                return loss_total(p, qq, b, s.s_cat, s.s_att, w);
                                            },
                                            q, eps)));

        MlpGradients g = a2h.net.backward(tv, gp.transposed());
        accumulate(g, a2h.net.backward(tt, gq.transposed()));
        const Matrix net_numeric = numeric_param_grad(
            a2h.net,
            [&](const MlpModel& net) {
                return loss_total(net.forward(xv).transposed(), net.forward(xt).transposed(), b, s.s_cat,
                                  s.s_att, w);
            },
            eps);
        worst = std::max(worst, oracle::relative_error(flatten(g), net_numeric));
    }
    const double secs = seconds_since(t0);
    return {worst < tol && secs < 60.0,
            fmt("100 fixtures, worst relative error %.3g (limit %.0e), %.2f s (limit 60 s)", worst, tol, secs)};
}

Outcome loss_unit_values() {
    const double cs = loss_cs(Matrix(3, 1), Matrix(3, 1), Matrix{{1}});
    bool ok = std::abs(cs - std::log(2.0)) <= 1e-12;
    std::string as_detail;
    for (std::size_t m : {1, 4, 32}) {
        const double as = loss_as(Matrix(8, m), Matrix(m, m, 0.4));
        ok = ok && as == 0.5 * static_cast<double>(m * m);
        as_detail += fmt("%g ", as);
    }
    const Matrix balanced{{1, -1, 1, -1}, {-1, 1, 1, -1}};
    const double reg = loss_reg(balanced, binarize(balanced));
    ok = ok && reg == 0.0;
    const double ped = positive_error_distance(Matrix{{1}, {0}, {1}}, Matrix{{0.8}, {0.3}, {0.5}});
    ok = ok && std::abs(ped - 0.35) <= 1e-12;
    return {ok, fmt("cs %.15f (ln 2), as at M=1,4,32: %s, reg %g, PED %.15f", cs, as_detail.c_str(), reg, ped)};
}

Outcome oracle_equivalence() {
    Rng rng(7);
    std::size_t pair_mismatch = 0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t c = 1 + rng.below(200);
        const CodeMatrix a = oracle::random_code_matrix(1, c, 2, rng);
        const CodeMatrix b = oracle::random_code_matrix(1, c, 2, rng);
        pair_mismatch += hamming(a.code(0), b.code(0)) != oracle::hamming_by_bits(a, 0, b, 0) ? 1 : 0;
    }
    std::size_t rank_mismatch = 0;
    for (int i = 0; i < 50; ++i) {
        const std::size_t c = 1 + rng.below(130);
        const CodeMatrix q = oracle::random_code_matrix(1, c, 2, rng);
        // Short codes force many distance ties.
        const CodeMatrix db = oracle::random_code_matrix(1 + rng.below(500), c, 2, rng);
        rank_mismatch += rank(q.code(0), db) == oracle::rank_by_sort(q, 0, db) ? 0 : 1;
    }
    return {pair_mismatch == 0 && rank_mismatch == 0,
            fmt("%zu/1000 hamming mismatches, %zu/50 ranking mismatches", pair_mismatch, rank_mismatch)};
}

Outcome map_oracle() {
    Rng rng(11);
    std::size_t mismatch = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 1 + rng.below(300);
        RankedList r;
        for (std::size_t k = 0; k < n; ++k) {
            r.push_back({k, k});
        }
        std::span<RankedEntry> s(r);
        rng.shuffle(s);
        std::vector<bool> rel(n);
        for (std::size_t k = 0; k < n; ++k) {
            rel[k] = rng.bernoulli(0.2);
        }
        rel[rng.below(n)] = true;
        mismatch += *average_precision(r, rel) == oracle::average_precision_by_definition(r, rel) ? 0 : 1;
    }
    std::vector<Label> labels(2000);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = static_cast<Label>(1 + i % 2);
    }
    const CodeMatrix db = random_codes(labels, 64, rng);
    std::vector<Label> ql(100);
    for (std::size_t i = 0; i < ql.size(); ++i) {
        ql[i] = static_cast<Label>(1 + i % 2);
    }
    const double map = mean_average_precision(random_codes(ql, 64, rng), db, Protocol::ibir).map_value;
    return {mismatch == 0 && std::abs(map - 0.5) <= 0.05,
            fmt("%zu/200 AP mismatches, random 2-class mAP %.4f (0.5 +/- 0.05)", mismatch, map)};
}

DataSet dataset_for(const PipelineConfig& config) {
    Rng rng(derive_seed(config.seed, Stream::dataset));
    return generate_synthetic(config.synthetic, rng);
}

Outcome end_to_end() {
    const auto t0 = Clock::now();
    const PipelineConfig config; // s=8, u=4, d=32, per_class=50, c=64
    const DataSet ds = dataset_for(config);
    const TrainingRun run = train_pipeline(ds, config);
    const RetrievalResult tbir = run_tbir(ds, run.models, config);
    const RetrievalResult ibir = run_ibir(ds, run.models, config);
    const double secs = seconds_since(t0);
    const bool ok = tbir.report.map_value >= 0.6 && tbir.report.map_value >= 3.0 * tbir.random_baseline_map &&
                    ibir.report.map_value >= 2.0 * ibir.random_baseline_map && secs < 300.0;
    return {ok, fmt("TBIR mAP %.4f (random %.4f, ratio %.2f), IBIR mAP %.4f (random %.4f, ratio %.2f), %.1f s",
                    tbir.report.map_value, tbir.random_baseline_map,
                    tbir.report.map_value / tbir.random_baseline_map, ibir.report.map_value,
                    ibir.random_baseline_map, ibir.report.map_value / ibir.random_baseline_map, secs)};
}

Outcome code_length_trend() {
    double sum8 = 0.0;
    double sum64 = 0.0;
    for (std::uint64_t seed : {0, 1, 2}) {
        for (std::size_t c : {8, 64}) {
            PipelineConfig config;
            config.seed = seed;
            config.code_length = c;
            const DataSet ds = dataset_for(config);
            const double map = run_tbir(ds, train_pipeline(ds, config).models, config).report.map_value;
            (c == 8 ? sum8 : sum64) += map;
        }
    }
    return {sum64 >= sum8, fmt("mean TBIR mAP c=64 %.4f vs c=8 %.4f over 3 seeds", sum64 / 3, sum8 / 3)};
}

Outcome attribute_count_trend() {
    const PipelineConfig config;
    const DataSet ds = dataset_for(config);
    const std::vector<std::size_t> d{8, 32};
    const auto rows = attribute_ablation(ds, d, 5, config);
    return {rows[1].mean_map >= rows[0].mean_map,
            fmt("mean TBIR mAP d=32 %.4f vs d=8 %.4f over 5 trials", rows[1].mean_map, rows[0].mean_map)};
}

std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) {
            out[fs::relative(e.path(), dir).string()] = binio::read_file(e.path());
        }
    }
    return out;
}

Outcome determinism() {
    PipelineConfig config;
    config.out_dir = fs::temp_directory_path() / "agnet_acceptance_determinism";
    config.ablation_d = {8, 16};
    config.ablation_trials = 1;
    auto run_all = [&] {
        fs::remove_all(config.out_dir);
        cmd_gen_data(config);
        cmd_train(config);
        for (Modality m : {Modality::visual, Modality::text}) {
            for (EncodeSelection s : {EncodeSelection::all, EncodeSelection::unseen}) {
                (void)cmd_encode(config, m, s);
            }
        }
        for (EvalTask t : {EvalTask::tbir, EvalTask::ibir, EvalTask::ped, EvalTask::confusion, EvalTask::ablate}) {
            (void)cmd_eval(config, t);
        }
        return tree(config.out_dir);
    };
    const auto first = run_all();
    const auto second = run_all();
    std::size_t differing = 0;
    for (const auto& [name, bytes] : first) {
        const auto it = second.find(name);
        differing += (it == second.end() || it->second != bytes) ? 1 : 0;
    }
    differing += first.size() == second.size() ? 0 : 1;
    std::uint64_t digest = 0;
    for (const auto& [name, bytes] : first) {
        digest ^= fnv1a64(name + bytes) + 0x9e3779b97f4a7c15ULL + (digest << 6) + (digest >> 2);
    }
    fs::remove_all(config.out_dir);
    return {differing == 0 && first.size() > 20,
            fmt("%zu files from gen-data/train/encode/eval, %zu differ between runs, digest %016llx", first.size(),
                differing, static_cast<unsigned long long>(digest))};
}

Outcome scan_performance() {
    Rng rng(5);
    std::vector<Label> labels(100000);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = static_cast<Label>(1 + i % 10);
    }
    const CodeMatrix db = random_codes(labels, 64, rng);
    const std::vector<Label> ql{1};
    const CodeMatrix q = random_codes(ql, 64, rng);
    std::vector<double> ms;
    std::size_t sink = 0;
    for (int rep = 0; rep < 15; ++rep) {
        const auto t0 = Clock::now();
        const RankedList r = rank(q.code(0), db);
        ms.push_back(seconds_since(t0) * 1e3);
        sink += r.front().id;
    }
    std::sort(ms.begin(), ms.end());
    const double median = ms[ms.size() / 2];
    return {median < 50.0 && sink < labels.size() * ms.size(),
            fmt("full ranking of 100000 64-bit codes: median %.2f ms, worst %.2f ms (limit 50 ms)", median,
                ms.back())};
}

} // namespace

int main(int argc, char** argv) {
    only.assign(argv + 1, argv + argc);
    report("gradient-fidelity", gradient_fidelity);
    report("loss-unit-values", loss_unit_values);
    report("oracle-equivalence", oracle_equivalence);
    report("map-oracle", map_oracle);
    report("end-to-end-zero-shot", end_to_end);
    report("code-length-trend", code_length_trend);
    report("attribute-count-trend", attribute_count_trend);
    report("determinism", determinism);
    report("scan-performance", scan_performance);
    std::printf("%d of %d criteria failed\n", failures, ran);
    return failures == 0 ? 0 : 1;
}
