#pragma once

#include <vector>

#include "meib/matrix.hpp"

namespace meib {

/// Aligned per-view sample matrices plus integer labels for one mini-batch.
struct MultiViewBatch {
    std::vector<DenseMatrix> views; ///< each N x d_i
    std::vector<int> labels;        ///< length N

    int view_count() const { return static_cast<int>(views.size()); }
    int sample_count() const { return views.empty() ? 0 : views.front().rows(); }

    /// Throws DimensionError unless all views and labels agree on N.
    void validate() const;

    /// Rows selected by index across every view, labels included.
    MultiViewBatch subset(const std::vector<int>& indices) const;

    /// Number of distinct labels, assuming labels are 0..C-1.
    int class_count() const;
};

} // namespace meib
