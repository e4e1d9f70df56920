// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#include "agnet/dataset.hpp"

#include "agnet/errors.hpp"
#include "agnet/rng.hpp"
#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

namespace agnet {

namespace {

bool contains(const std::vector<Label>& labels, Label label) {
    return std::find(labels.begin(), labels.end(), label) != labels.end();
}

std::string label_list(const std::vector<Label>& labels) {
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i != 0) {
            out += ',';
        }
        out += std::to_string(labels[i]);
    }
    return out;
}

struct FeatureTable {
    std::vector<std::uint64_t> ids;
    std::vector<Label> labels;
    Matrix values;
};

FeatureTable read_feature_table(const std::filesystem::path& path, char prefix) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) {
        throw ParseError(path.string() + ": missing header row", 1);
    }
    const auto header = detail::split_fields(lines[0]);
    if (header.size() < 3 || detail::trim(header[0]) != "id" || detail::trim(header[1]) != "label") {
        throw ParseError(path.string() + ": header must be 'id,label," + prefix + "1,...'", 1);
    }
    const std::size_t dim = header.size() - 2;
    for (std::size_t j = 0; j < dim; ++j) {
        if (detail::trim(header[j + 2]) != std::string(1, prefix) + std::to_string(j + 1)) {
            throw ParseError(path.string() + ": unexpected column name '" + std::string(header[j + 2]) + "'", 1);
        }
    }

    FeatureTable table;
    std::vector<double> values;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        const auto fields = detail::split_fields(lines[li]);
        if (fields.size() != dim + 2) {
            throw ParseError(path.string() + ": expected " + std::to_string(dim + 2) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        table.ids.push_back(detail::parse_u64(fields[0], line_no));
        const auto label = detail::parse_u64(fields[1], line_no);
        if (label == 0 || label > std::numeric_limits<Label>::max()) {
            throw ParseError(path.string() + ": label out of range", line_no);
        }
        table.labels.push_back(static_cast<Label>(label));
        for (std::size_t j = 0; j < dim; ++j) {
            values.push_back(detail::parse_double(fields[j + 2], line_no));
        }
    }
    table.values = Matrix(table.ids.size(), dim, std::move(values));
    return table;
}

Matrix read_attribute_table(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) {
        throw ParseError(path.string() + ": missing header row", 1);
    }
    const auto header = detail::split_fields(lines[0]);
    if (header.size() < 2 || detail::trim(header[0]) != "label") {
        throw ParseError(path.string() + ": header must be 'label,a1,...'", 1);
    }
    const std::size_t dim = header.size() - 1;
    for (std::size_t j = 0; j < dim; ++j) {
        if (detail::trim(header[j + 1]) != "a" + std::to_string(j + 1)) {
            throw ParseError(path.string() + ": unexpected column name '" + std::string(header[j + 1]) + "'", 1);
        }
    }
    std::vector<double> values;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        const auto fields = detail::split_fields(lines[li]);
        if (fields.size() != dim + 1) {
            throw ParseError(path.string() + ": expected " + std::to_string(dim + 1) + " fields", line_no);
        }
        if (detail::parse_u64(fields[0], line_no) != li) {
            throw ParseError(path.string() + ": attribute rows must list labels 1, 2, ... in order", line_no);
        }
        for (std::size_t j = 0; j < dim; ++j) {
            values.push_back(detail::parse_double(fields[j + 1], line_no));
        }
    }
    return Matrix(lines.size() - 1, dim, std::move(values));
}

std::vector<Label> parse_label_line(std::string_view line, std::string_view key, std::size_t line_no,
                                    const std::filesystem::path& path) {
    const auto colon = line.find(':');
    if (colon == std::string_view::npos || detail::trim(line.substr(0, colon)) != key) {
        throw ParseError(path.string() + ": expected '" + std::string(key) + ": id,id,...'", line_no);
    }
    std::vector<Label> labels;
    const auto rest = detail::trim(line.substr(colon + 1));
    if (rest.empty()) {
        return labels;
    }
    for (auto field : detail::split_fields(rest)) {
        const auto v = detail::parse_u64(field, line_no);
        if (v == 0 || v > std::numeric_limits<Label>::max()) {
            throw ParseError(path.string() + ": label out of range", line_no);
        }
        labels.push_back(static_cast<Label>(v));
    }
    return labels;
}

ZeroShotSplit read_split(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    if (lines.size() != 2) {
        throw ParseError(path.string() + ": split file must have exactly two lines",
                         std::min<std::size_t>(lines.size() + 1, 3));
    }
    ZeroShotSplit split;
    split.seen = parse_label_line(lines[0], "seen", 1, path);
    split.unseen = parse_label_line(lines[1], "unseen", 2, path);
    return split;
}

void append_row(std::string& out, std::uint64_t id, Label label, std::span<const double> values) {
    out += std::to_string(id);
    out += ',';
    out += std::to_string(label);
    for (double v : values) {
        out += ',';
        out += detail::format_double(v);
    }
    out += '\n';
}

std::string feature_csv(const DataSet& ds, Modality modality, char prefix) {
    const Matrix& m = ds.features(modality);
    std::string out = "id,label";
    for (std::size_t j = 0; j < m.cols(); ++j) {
        out += ',';
        out += prefix;
        out += std::to_string(j + 1);
    }
    out += '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        append_row(out, ds.ids()[i], ds.labels()[i], m.row(i));
    }
    return out;
}

} // namespace

bool ZeroShotSplit::is_seen(Label label) const {
    return contains(seen, label);
}

bool ZeroShotSplit::is_unseen(Label label) const {
    return contains(unseen, label);
}

DataSet::DataSet(std::vector<std::uint64_t> ids, std::vector<Label> labels, Matrix visual, Matrix text,
                 Matrix attribute_table, ZeroShotSplit split)
    : ids_(std::move(ids)),
      labels_(std::move(labels)),
      visual_(std::move(visual)),
      text_(std::move(text)),
      attribute_table_(std::move(attribute_table)),
      split_(std::move(split)) {
    validate();
}

void DataSet::validate() const {
    const std::size_t n = labels_.size();
    if (n == 0) {
        throw ValidationError("dataset: N = 0");
    }
    if (ids_.size() != n || visual_.rows() != n || text_.rows() != n) {
        throw ValidationError("dataset: ids/labels/visual/text disagree on N (" + std::to_string(ids_.size()) +
                              ", " + std::to_string(n) + ", " + std::to_string(visual_.rows()) + ", " +
                              std::to_string(text_.rows()) + ")");
    }
    if (visual_.cols() == 0 || text_.cols() == 0) {
        throw ValidationError("dataset: visual and text dimensions must be positive");
    }
    ensure_finite(visual_, "dataset visual features");
    ensure_finite(text_, "dataset text features");

    const std::size_t classes = attribute_table_.rows();
    if (classes == 0 || attribute_table_.cols() < 1) {
        throw ValidationError("dataset: attribute table is empty");
    }
    for (std::size_t c = 0; c < classes; ++c) {
        bool any = false;
        for (double v : attribute_table_.row(c)) {
            if (v != 0.0 && v != 1.0) {
                throw ValidationError("dataset: attribute table row for label " + std::to_string(c + 1) +
                                      " has non-binary entry " + detail::format_double(v));
            }
            any = any || v == 1.0;
        }
        if (!any) {
            throw ValidationError("dataset: attribute vector of label " + std::to_string(c + 1) +
                                  " is all zero");
        }
    }

    std::set<Label> seen(split_.seen.begin(), split_.seen.end());
    std::set<Label> unseen(split_.unseen.begin(), split_.unseen.end());
    if (seen.size() != split_.seen.size() || unseen.size() != split_.unseen.size()) {
        throw ValidationError("dataset: split lists a label twice");
    }
    if (seen.empty()) {
        throw ValidationError("dataset: split has no seen categories");
    }
    for (Label l : seen) {
        if (unseen.contains(l)) {
            throw ValidationError("dataset: label " + std::to_string(l) + " is both seen and unseen");
        }
    }
    if (seen.size() + unseen.size() != classes) {
        throw ValidationError("dataset: split covers " + std::to_string(seen.size() + unseen.size()) +
                              " labels but the attribute table has " + std::to_string(classes));
    }
    for (Label l = 1; l <= classes; ++l) {
        if (!seen.contains(l) && !unseen.contains(l)) {
            throw ValidationError("dataset: label " + std::to_string(l) + " is in neither split side");
        }
    }

    std::unordered_set<std::uint64_t> id_set;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels_[i] < 1 || labels_[i] > classes) {
            throw ValidationError("dataset: instance " + std::to_string(ids_[i]) + " has label " +
                                  std::to_string(labels_[i]) + " outside 1.." + std::to_string(classes));
        }
        if (!id_set.insert(ids_[i]).second) {
            throw ValidationError("dataset: duplicate instance id " + std::to_string(ids_[i]));
        }
    }
}

Instance DataSet::instance(std::size_t i) const {
    return Instance{ids_.at(i), labels_.at(i), visual_.row(i), text_.row(i), class_attributes(labels_[i])};
}

std::span<const double> DataSet::class_attributes(Label label) const {
    if (label < 1 || label > attribute_table_.rows()) {
        throw ValidationError("dataset: unknown label " + std::to_string(label));
    }
    return attribute_table_.row(label - 1);
}

Matrix DataSet::attributes_of(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), attribute_dim());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        std::ranges::copy(class_attributes(labels_.at(indices[i])), out.row(i).begin());
    }
    return out;
}

std::vector<Label> DataSet::labels_of(std::span<const std::size_t> indices) const {
    std::vector<Label> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        out.push_back(labels_.at(i));
    }
    return out;
}

std::vector<std::size_t> DataSet::seen_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) {
        if (split_.is_seen(labels_[i])) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> DataSet::unseen_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) {
        if (split_.is_unseen(labels_[i])) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> DataSet::class_representatives(std::span<const Label> classes) const {
    std::vector<std::size_t> out;
    for (Label c : classes) {
        auto it = std::find(labels_.begin(), labels_.end(), c);
        if (it == labels_.end()) {
            throw ValidationError("dataset: no instance of label " + std::to_string(c));
        }
        out.push_back(static_cast<std::size_t>(it - labels_.begin()));
    }
    return out;
}

DataSet DataSet::with_attribute_columns(std::span<const std::size_t> columns) const {
    return DataSet(ids_, labels_, visual_, text_, attribute_table_.gather_cols(columns), split_);
}

DatasetPaths DatasetPaths::in_directory(const std::filesystem::path& dir) {
    return DatasetPaths{dir / "visual.csv", dir / "text.csv", dir / "attributes.csv", dir / "split.txt"};
}

DataSet load_dataset(const DatasetPaths& paths) {
    FeatureTable visual = read_feature_table(paths.features, 'v');
    FeatureTable text = read_feature_table(paths.texts, 't');
    if (visual.ids.size() != text.ids.size()) {
        throw ValidationError("dataset: feature file has " + std::to_string(visual.ids.size()) +
                              " instances but text file has " + std::to_string(text.ids.size()));
    }
    for (std::size_t i = 0; i < visual.ids.size(); ++i) {
        if (visual.ids[i] != text.ids[i] || visual.labels[i] != text.labels[i]) {
            throw ValidationError("dataset: instance " + std::to_string(visual.ids[i]) +
                                  " disagrees between feature and text files (record " + std::to_string(i + 2) +
                                  ")");
        }
    }
    Matrix attributes = read_attribute_table(paths.attributes);
    ZeroShotSplit split = read_split(paths.split);
    return DataSet(std::move(visual.ids), std::move(visual.labels), std::move(visual.values),
                   std::move(text.values), std::move(attributes), std::move(split));
}

void save_dataset(const DataSet& ds, const DatasetPaths& paths) {
    detail::write_text(paths.features, feature_csv(ds, Modality::visual, 'v'));
    detail::write_text(paths.texts, feature_csv(ds, Modality::text, 't'));

    std::string attrs = "label";
    for (std::size_t j = 0; j < ds.attribute_dim(); ++j) {
        attrs += ",a" + std::to_string(j + 1);
    }
    attrs += '\n';
    for (std::size_t c = 0; c < ds.num_classes(); ++c) {
        attrs += std::to_string(c + 1);
        for (double v : ds.attribute_table().row(c)) {
            attrs += v == 1.0 ? ",1" : ",0";
        }
        attrs += '\n';
    }
    detail::write_text(paths.attributes, attrs);

    detail::write_text(paths.split,
                       "seen: " + label_list(ds.split().seen) + "\nunseen: " + label_list(ds.split().unseen) + "\n");
}

void SyntheticSpec::validate() const {
    if (seen_classes < 1 || unseen_classes < 1) {
        throw ValidationError("synthetic: need at least one seen and one unseen class");
    }
    if (attribute_dim < 2) {
        throw ValidationError("synthetic: attribute dimension d must be at least 2 (got " +
                              std::to_string(attribute_dim) + ")");
    }
    if (visual_dim < 1 || text_dim < 1) {
        throw ValidationError("synthetic: visual and text dimensions must be positive");
    }
    if (per_class < 1) {
        throw ValidationError("synthetic: per_class must be at least 1");
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw ValidationError("synthetic: noise_sigma must be a finite non-negative number");
    }
    if (!(attribute_density > 0.0 && attribute_density < 1.0)) {
        throw ValidationError("synthetic: attribute density must lie in (0, 1)");
    }
}

DataSet generate_synthetic(const SyntheticSpec& spec, Rng& rng) {
    spec.validate();
    const std::size_t classes = spec.seen_classes + spec.unseen_classes;
    const std::size_t d = spec.attribute_dim;
    constexpr std::size_t kMaxRetriesPerClass = 1000;

    Matrix table(classes, d);
    std::set<std::vector<double>> used;
    for (std::size_t c = 0; c < classes; ++c) {
        std::vector<double> row(d);
        std::size_t attempt = 0;
        while (true) {
            bool any = false;
            for (double& v : row) {
                v = rng.bernoulli(spec.attribute_density) ? 1.0 : 0.0;
                any = any || v == 1.0;
            }
            if (any && used.insert(row).second) {
                break;
            }
            if (++attempt >= kMaxRetriesPerClass) {
                throw ValidationError("synthetic: could not draw " + std::to_string(classes) +
                                      " distinct non-zero attribute vectors with d = " + std::to_string(d));
            }
        }
        std::ranges::copy(row, table.row(c).begin());
    }

    auto random_map = [&](std::size_t out_dim) {
        // d × out_dim, scaled so a typical attribute vector maps to O(1) entries.
        const double s = 1.0 / std::sqrt(spec.attribute_density * static_cast<double>(d));
        Matrix m(d, out_dim);
        for (double& v : m.data()) {
            v = rng.normal() * s;
        }
        return m;
    };
    const Matrix visual_map = random_map(spec.visual_dim);
    const Matrix text_map = random_map(spec.text_dim);
    const Matrix class_visual = matmul(table, visual_map);
    const Matrix class_text = matmul(table, text_map);

    const std::size_t n = classes * spec.per_class;
    std::vector<std::uint64_t> ids(n);
    std::vector<Label> labels(n);
    Matrix visual(n, spec.visual_dim);
    Matrix text(n, spec.text_dim);
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t p = 0; p < spec.per_class; ++p) {
            const std::size_t i = c * spec.per_class + p;
            ids[i] = i;
            labels[i] = static_cast<Label>(c + 1);
            auto v = visual.row(i);
            auto cv = class_visual.row(c);
            for (std::size_t j = 0; j < v.size(); ++j) {
                v[j] = cv[j] + (spec.noise_sigma > 0.0 ? spec.noise_sigma * rng.normal() : 0.0);
            }
            std::ranges::copy(class_text.row(c), text.row(i).begin());
        }
    }

    ZeroShotSplit split;
    for (std::size_t c = 0; c < classes; ++c) {
        (c < spec.seen_classes ? split.seen : split.unseen).push_back(static_cast<Label>(c + 1));
    }
    return DataSet(std::move(ids), std::move(labels), std::move(visual), std::move(text), std::move(table),
                   std::move(split));
}

IbirProtocol make_ibir_protocol(const DataSet& ds, std::size_t n_query, Rng& rng) {
    const auto unseen = ds.unseen_indices();
    if (n_query > unseen.size()) {
        throw ValidationError("ibir: requested " + std::to_string(n_query) + " queries but only " +
                              std::to_string(unseen.size()) + " unseen instances exist");
    }
    const auto picks = rng.sample_without_replacement(unseen.size(), n_query);
    std::vector<bool> is_query(ds.size(), false);
    IbirProtocol protocol;
    for (std::size_t p : picks) {
        protocol.queries.push_back(unseen[p]);
        is_query[unseen[p]] = true;
    }
    std::ranges::sort(protocol.queries);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!is_query[i]) {
            protocol.retrieval.push_back(i);
        }
    }
    return protocol;
}

TbirProtocol make_tbir_protocol(const DataSet& ds) {
    if (ds.split().unseen.empty()) {
        throw ValidationError("tbir: dataset has no unseen categories");
    }
    TbirProtocol protocol;
    protocol.query_labels = ds.split().unseen;
    std::ranges::sort(protocol.query_labels);
    protocol.query_sources = ds.class_representatives(protocol.query_labels);
    protocol.retrieval = ds.unseen_indices();
    return protocol;
}

std::vector<std::size_t> training_indices(const DataSet& ds, std::optional<std::size_t> cap, Rng& rng) {
    auto seen = ds.seen_indices();
    if (seen.empty()) {
        throw ValidationError("training set is empty");
    }
    if (!cap || *cap >= seen.size()) {
        return seen;
    }
    const auto picks = rng.sample_without_replacement(seen.size(), *cap);
    std::vector<std::size_t> out;
    out.reserve(picks.size());
    for (std::size_t p : picks) {
        out.push_back(seen[p]);
    }
    std::ranges::sort(out);
    return out;
}

} // namespace agnet
