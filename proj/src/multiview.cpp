#include "meib/multiview.hpp"

#include <algorithm>

#include "meib/errors.hpp"

namespace meib {

void MultiViewBatch::validate() const {
    if (views.empty()) throw DimensionError("MultiViewBatch: no views");
    const int n = views.front().rows();
    for (const auto& v : views)
        if (v.rows() != n)
            throw DimensionError("MultiViewBatch: views have differing sample counts");
    if (static_cast<int>(labels.size()) != n)
        throw DimensionError("MultiViewBatch: label count does not match samples");
}

MultiViewBatch MultiViewBatch::subset(const std::vector<int>& indices) const {
    MultiViewBatch out;
    out.views.reserve(views.size());
    for (const auto& v : views) out.views.push_back(v.select_rows(indices));
    out.labels.reserve(indices.size());
    for (int idx : indices) out.labels.push_back(labels.at(idx));
    return out;
}

int MultiViewBatch::class_count() const {
    int c = 0;
    for (int label : labels) c = std::max(c, label + 1);
    return c;
}

} // namespace meib
