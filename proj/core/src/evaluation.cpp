// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#include "agnet/evaluation.hpp"

#include "agnet/errors.hpp"
#include "agnet/log.hpp"
#include "agnet/rng.hpp"
#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace agnet {

namespace {

std::string class_name(Label l) {
    return "class_" + std::to_string(l);
}

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

} // namespace

std::string_view to_string(Protocol p) noexcept {
    return p == Protocol::tbir ? "tbir" : "ibir";
}

std::optional<double> average_precision(const RankedList& ranking, const std::vector<bool>& relevant) {
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < ranking.size(); ++k) {
        const std::size_t id = ranking[k].id;
        if (id < relevant.size() && relevant[id]) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(k + 1);
        }
    }
    if (hits == 0) {
        return std::nullopt;
    }
    return sum / static_cast<double>(hits);
}

std::optional<double> average_precision(const RankedList& ranking, std::span<const std::size_t> relevant_ids) {
    std::size_t max_id = 0;
    for (const auto& e : ranking) {
        max_id = std::max(max_id, e.id);
    }
    std::vector<bool> mask(ranking.empty() ? 0 : max_id + 1, false);
    for (std::size_t id : relevant_ids) {
        if (id < mask.size()) {
            mask[id] = true;
        }
    }
    return average_precision(ranking, mask);
}

EvalReport mean_average_precision(const CodeMatrix& queries, const CodeMatrix& db, Protocol protocol,
                                  EmptyBallPolicy policy) {
    if (queries.code_length() != db.code_length()) {
        throw ShapeError("mean_average_precision: query codes have " + std::to_string(queries.code_length()) +
                         " bits, database codes " + std::to_string(db.code_length()));
    }
    EvalReport report;
    report.protocol = protocol;
    report.code_length = db.code_length();
    std::vector<bool> relevant(db.size());
    double sum = 0.0;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const Label label = queries.label(qi);
        for (std::size_t i = 0; i < db.size(); ++i) {
            relevant[i] = db.label(i) == label;
        }
        const auto ap = average_precision(rank(queries.code(qi), db), relevant);
        if (!ap) {
            ++report.skipped_queries;
            continue;
        }
        report.per_query_ap.push_back(*ap);
        sum += *ap;
    }
    if (report.per_query_ap.empty()) {
        throw ValidationError("mean_average_precision: no query has a relevant database item");
    }
    if (report.skipped_queries > 0) {
        log_warn(std::to_string(report.skipped_queries) + " queries had no relevant items and were excluded from mAP");
    }
    report.map_value = sum / static_cast<double>(report.per_query_ap.size());
    report.precision_at_r2 = precision_within_radius(queries, db, 2, policy);
    return report;
}

std::optional<double> precision_within_radius(const CodeMatrix& queries, const CodeMatrix& db, std::size_t radius,
                                              EmptyBallPolicy policy) {
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const auto ball = within_radius(queries.code(qi), db, radius);
        if (ball.empty()) {
            if (policy == EmptyBallPolicy::zero) {
                ++counted;
            }
            continue;
        }
        std::size_t same = 0;
        for (std::size_t id : ball) {
            same += db.label(id) == queries.label(qi) ? 1 : 0;
        }
        sum += static_cast<double>(same) / static_cast<double>(ball.size());
        ++counted;
    }
    if (counted == 0) {
        return std::nullopt;
    }
    return sum / static_cast<double>(counted);
}

double positive_error_distance(const Matrix& truth, const Matrix& pred) {
    if (truth.rows() != pred.rows() || truth.cols() != pred.cols()) {
        throw ShapeError("positive_error_distance: truth " + truth.shape_string() + " vs prediction " +
                         pred.shape_string());
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        const double a = truth.data()[k];
        if (a != 0.0 && a != 1.0) {
            throw ValidationError("positive_error_distance: ground truth must be binary");
        }
        num += a * std::abs(a - pred.data()[k]);
        den += a;
    }
    if (den == 0.0) {
        throw ValidationError("positive_error_distance: ground truth has no positive tag");
    }
    return num / den;
}

std::size_t ConfusionMatrix::column_sum(std::size_t col) const {
    std::size_t s = 0;
    for (const auto& row : counts) {
        s += row[col];
    }
    return s;
}

ConfusionMatrix text_image_confusion(const CodeMatrix& text_codes, const CodeMatrix& image_codes) {
    if (text_codes.code_length() != image_codes.code_length()) {
        throw ShapeError("text_image_confusion: code lengths differ");
    }
    std::map<Label, std::size_t> text_of;
    for (std::size_t i = 0; i < text_codes.size(); ++i) {
        if (!text_of.emplace(text_codes.label(i), i).second) {
            throw ValidationError("text_image_confusion: class " + std::to_string(text_codes.label(i)) +
                                  " has more than one text code");
        }
    }
    ConfusionMatrix cm;
    std::map<Label, std::size_t> slot;
    for (const auto& [label, idx] : text_of) {
        slot[label] = cm.classes.size();
        cm.classes.push_back(label);
    }
    const std::size_t u = cm.classes.size();
    cm.counts.assign(u, std::vector<std::size_t>(u, 0));
    for (std::size_t i = 0; i < image_codes.size(); ++i) {
        auto col = slot.find(image_codes.label(i));
        if (col == slot.end()) {
            throw ValidationError("text_image_confusion: no text code for class " +
                                  std::to_string(image_codes.label(i)));
        }
        std::size_t best_row = 0;
        std::size_t best = std::numeric_limits<std::size_t>::max();
        // Classes are visited in ascending id order, so strict < keeps the smallest id on ties.
        for (std::size_t r = 0; r < u; ++r) {
            const std::size_t d = hamming(image_codes.code(i), text_codes.code(text_of.at(cm.classes[r])));
            if (d < best) {
                best = d;
                best_row = r;
            }
        }
        ++cm.counts[best_row][col->second];
    }
    return cm;
}

CodeMatrix random_codes(std::span<const Label> labels, std::size_t code_length, Rng& rng) {
    CodeMatrix codes(code_length);
    codes.reserve(labels.size());
    std::vector<std::uint64_t> words(codes.words_per_code());
    for (Label l : labels) {
        std::ranges::fill(words, 0);
        for (std::size_t b = 0; b < code_length; ++b) {
            if ((rng.next_u64() >> 63) != 0) {
                words[b / 64] |= std::uint64_t{1} << (b % 64);
            }
        }
        codes.push_back(words, l);
    }
    return codes;
}

void write_per_query_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::string out = "query,ap\n";
    for (std::size_t i = 0; i < report.per_query_ap.size(); ++i) {
        out += std::to_string(i) + "," + detail::format_double(report.per_query_ap[i]) + "\n";
    }
    detail::write_text(path, out);
}

std::string format_report(const EvalReport& report) {
    std::string s = std::string(to_string(report.protocol)) + " c=" + std::to_string(report.code_length) +
                    " queries=" + std::to_string(report.per_query_ap.size()) + " mAP=" + fixed(report.map_value);
    s += " P@r2=" + (report.precision_at_r2 ? fixed(*report.precision_at_r2) : std::string("n/a"));
    return s;
}

void write_confusion_csv(const ConfusionMatrix& cm, const std::filesystem::path& path) {
    std::string out = "text_class";
    for (Label l : cm.classes) {
        out += "," + class_name(l);
    }
    out += "\n";
    for (std::size_t r = 0; r < cm.classes.size(); ++r) {
        out += class_name(cm.classes[r]);
        for (std::size_t c = 0; c < cm.classes.size(); ++c) {
            out += "," + std::to_string(cm.counts[r][c]);
        }
        out += "\n";
    }
    detail::write_text(path, out);
}

std::string format_confusion(const ConfusionMatrix& cm) {
    std::string out = "rows: nearest text class, columns: image class\n";
    char buf[32];
    out += "          ";
    for (Label l : cm.classes) {
        std::snprintf(buf, sizeof(buf), "%8u", l);
        out += buf;
    }
    out += "\n";
    for (std::size_t r = 0; r < cm.classes.size(); ++r) {
        std::snprintf(buf, sizeof(buf), "%10u", cm.classes[r]);
        out += buf;
        for (std::size_t c = 0; c < cm.classes.size(); ++c) {
            std::snprintf(buf, sizeof(buf), "%8zu", cm.counts[r][c]);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

} // namespace agnet
