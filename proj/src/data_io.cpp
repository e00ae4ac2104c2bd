#include "meib/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "meib/errors.hpp"
#include "meib/rng.hpp"

namespace meib {

namespace {

/// One CSV record, RFC-4180-style: quoted fields may contain the delimiter
/// and doubled quotes.
std::vector<std::string> split_record(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == delimiter) {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

struct CsvTable {
    std::vector<std::string> header; ///< empty when the file has none
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_table(const std::string& path, char delimiter, bool has_header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() && in.peek() == EOF) break; // trailing newline
        auto fields = split_record(line, delimiter);
        if (first && has_header) {
            table.header = std::move(fields);
        } else {
            table.rows.push_back(std::move(fields));
        }
        first = false;
    }
    if (first) throw IoError(path + ": empty file");
    return table;
}

double parse_cell(const std::string& cell, const std::string& path, std::size_t row,
                  std::size_t col) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v)) {
        std::ostringstream os;
        os << path << ": non-numeric cell at row " << row + 1 << ", column " << col + 1 << " ('"
           << cell << "')";
        throw IoError(os.str());
    }
    return v;
}

} // namespace

MultiViewBatch load_multiview_csv(const CsvViewSpec& spec) {
    if (spec.paths.empty()) throw ConfigError("load_multiview_csv: no view files given");

    MultiViewBatch batch;
    std::vector<std::string> raw_labels;
    bool labels_found = false;
    std::size_t expected_rows = 0;

    for (std::size_t v = 0; v < spec.paths.size(); ++v) {
        const std::string& path = spec.paths[v];
        CsvTable table = read_table(path, spec.delimiter, spec.has_header);
        if (table.rows.empty()) throw IoError(path + ": no data rows");

        if (v == 0) {
            expected_rows = table.rows.size();
        } else if (table.rows.size() != expected_rows) {
            std::ostringstream os;
            os << "row-count mismatch across views: " << spec.paths[0] << " has " << expected_rows
               << " rows, " << path << " has " << table.rows.size();
            throw IoError(os.str());
        }

        // Locate the label column in this file, if any.
        int label_col = -1;
        if (spec.has_header && !spec.label_column.empty()) {
            for (std::size_t c = 0; c < table.header.size(); ++c)
                if (table.header[c] == spec.label_column) label_col = static_cast<int>(c);
        } else if (spec.label_index) {
            label_col = *spec.label_index;
        }

        const std::size_t n_cols = table.rows.front().size();
        for (std::size_t r = 0; r < table.rows.size(); ++r)
            if (table.rows[r].size() != n_cols) {
                std::ostringstream os;
                os << path << ": row " << r + 1 << " has " << table.rows[r].size()
                   << " fields, expected " << n_cols;
                throw IoError(os.str());
            }
        if (label_col >= static_cast<int>(n_cols))
            throw IoError(path + ": label column index out of range");

        const int d = static_cast<int>(n_cols) - (label_col >= 0 ? 1 : 0);
        if (d < 1) throw IoError(path + ": no feature columns");
        DenseMatrix view(static_cast<int>(table.rows.size()), d);
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            int out_c = 0;
            for (std::size_t c = 0; c < n_cols; ++c) {
                if (static_cast<int>(c) == label_col) continue;
                view(static_cast<int>(r), out_c++) = parse_cell(table.rows[r][c], path, r, c);
            }
        }
        batch.views.push_back(std::move(view));

        if (label_col >= 0) {
            std::vector<std::string> labels;
            labels.reserve(table.rows.size());
            for (const auto& row : table.rows) labels.push_back(row[label_col]);
            if (!labels_found) {
                raw_labels = std::move(labels);
                labels_found = true;
            } else if (labels != raw_labels) {
                throw IoError(path + ": label column disagrees with earlier views");
            }
        }
    }

    if (!labels_found)
        throw IoError("label column '" + spec.label_column + "' not found in any view file");

    // Re-encode labels to 0..C-1 preserving first-seen order.
    std::map<std::string, int> codes;
    int next_code = 0;
    batch.labels.reserve(raw_labels.size());
    for (const std::string& label : raw_labels) {
        auto [it, inserted] = codes.emplace(label, next_code);
        if (inserted) ++next_code;
        batch.labels.push_back(it->second);
    }

    batch.validate();
    return batch;
}

void export_multiview_csv(const MultiViewBatch& batch, const std::vector<std::string>& paths,
                          char delimiter) {
    batch.validate();
    if (paths.size() != batch.views.size())
        throw ConfigError("export_multiview_csv: one path per view required");
    for (std::size_t v = 0; v < paths.size(); ++v) {
        std::ofstream out(paths[v]);
        if (!out) throw IoError("cannot open " + paths[v] + " for writing");
        const DenseMatrix& view = batch.views[v];
        for (int c = 0; c < view.cols(); ++c) out << "f" << c << delimiter;
        out << "label\n";
        for (int r = 0; r < view.rows(); ++r) {
            for (int c = 0; c < view.cols(); ++c) out << format_double(view(r, c)) << delimiter;
            out << batch.labels[r] << "\n";
        }
        if (!out) throw IoError("write failed for " + paths[v]);
    }
}

std::pair<MultiViewBatch, MultiViewBatch> stratified_split(const MultiViewBatch& batch,
                                                           double fraction, std::uint64_t seed) {
    batch.validate();
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("stratified_split: fraction must lie in (0, 1)");

    std::map<int, std::vector<int>> by_class;
    for (int i = 0; i < batch.sample_count(); ++i) by_class[batch.labels[i]].push_back(i);

    Rng rng(seed);
    std::vector<int> train_idx, test_idx;
    for (auto& [label, indices] : by_class) {
        if (indices.size() < 2)
            throw ConfigError("stratified_split: class " + std::to_string(label) +
                              " has fewer than 2 samples");
        rng.shuffle(indices);
        const int n = static_cast<int>(indices.size());
        int n_train = static_cast<int>(std::lround(fraction * n));
        n_train = std::clamp(n_train, 1, n - 1);
        train_idx.insert(train_idx.end(), indices.begin(), indices.begin() + n_train);
        test_idx.insert(test_idx.end(), indices.begin() + n_train, indices.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {batch.subset(train_idx), batch.subset(test_idx)};
}

Standardizer fit_standardizer(const std::vector<DenseMatrix>& train_views) {
    Standardizer st;
    for (const DenseMatrix& view : train_views) {
        const int n = view.rows();
        const int d = view.cols();
        if (n < 1) throw DimensionError("fit_standardizer: empty view");
        std::vector<double> mean(d, 0.0), stddev(d, 0.0);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < d; ++c) mean[c] += view(r, c);
        for (double& m : mean) m /= n;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < d; ++c) {
                const double diff = view(r, c) - mean[c];
                stddev[c] += diff * diff;
            }
        for (double& s : stddev) s = std::max(std::sqrt(s / n), 1e-8);
        st.mean.push_back(std::move(mean));
        st.stddev.push_back(std::move(stddev));
    }
    return st;
}

std::vector<DenseMatrix> apply(const Standardizer& st, const std::vector<DenseMatrix>& views) {
    if (views.size() != st.mean.size())
        throw DimensionError("standardizer: view count mismatch");
    std::vector<DenseMatrix> out;
    for (std::size_t v = 0; v < views.size(); ++v) {
        const DenseMatrix& view = views[v];
        if (view.cols() != static_cast<int>(st.mean[v].size()))
            throw DimensionError("standardizer: feature count mismatch in view " +
                                 std::to_string(v));
        DenseMatrix t(view.rows(), view.cols());
        for (int r = 0; r < view.rows(); ++r)
            for (int c = 0; c < view.cols(); ++c)
                t(r, c) = (view(r, c) - st.mean[v][c]) / st.stddev[v][c];
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<DenseMatrix> apply_inverse(const Standardizer& st,
                                       const std::vector<DenseMatrix>& views) {
    if (views.size() != st.mean.size())
        throw DimensionError("standardizer: view count mismatch");
    std::vector<DenseMatrix> out;
    for (std::size_t v = 0; v < views.size(); ++v) {
        const DenseMatrix& view = views[v];
        DenseMatrix t(view.rows(), view.cols());
        for (int r = 0; r < view.rows(); ++r)
            for (int c = 0; c < view.cols(); ++c)
                t(r, c) = view(r, c) * st.stddev[v][c] + st.mean[v][c];
        out.push_back(std::move(t));
    }
    return out;
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace meib
