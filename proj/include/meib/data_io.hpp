#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "meib/multiview.hpp"

namespace meib {

/// Where to find a multi-view dataset on disk: one CSV per view, rows
/// aligned by position (row m of every file is sample m).
struct CsvViewSpec {
    std::vector<std::string> paths;
    std::string label_column = "label"; ///< by name when files have headers
    std::optional<int> label_index;     ///< by position otherwise
    char delimiter = ',';
    bool has_header = true;
};

/**
 * Loads aligned views plus labels. The label column may live in any of the
 * files (consistency-checked when present in several); labels are re-encoded
 * to 0..C-1 in first-seen order. Errors carry the offending row/column.
 */
MultiViewBatch load_multiview_csv(const CsvViewSpec& spec);

/// Writes one CSV per view with a header (f0..fd-1 plus `label`), numbers
/// formatted with 17 significant digits so a reload is lossless.
void export_multiview_csv(const MultiViewBatch& batch, const std::vector<std::string>& paths,
                          char delimiter = ',');

/**
 * Splits per class so proportions are preserved within one sample;
 * deterministic per seed. Every class must have at least 2 samples (each
 * side of the split gets at least one).
 */
std::pair<MultiViewBatch, MultiViewBatch> stratified_split(const MultiViewBatch& batch,
                                                           double fraction, std::uint64_t seed);

/// Per-view, per-feature mean and standard deviation learned on a training
/// split. The deviation is floored at 1e-8 so constant columns map to zero.
struct Standardizer {
    std::vector<std::vector<double>> mean;
    std::vector<std::vector<double>> stddev; ///< floored values, ready to divide by
};

Standardizer fit_standardizer(const std::vector<DenseMatrix>& train_views);
std::vector<DenseMatrix> apply(const Standardizer& st, const std::vector<DenseMatrix>& views);
std::vector<DenseMatrix> apply_inverse(const Standardizer& st,
                                       const std::vector<DenseMatrix>& views);

/// Shortest lossless decimal representation (round-trips exactly).
std::string format_double(double v);

} // namespace meib
