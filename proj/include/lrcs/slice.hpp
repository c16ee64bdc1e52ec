#pragma once

#include "lrcs/model.hpp"

namespace lrcs {

/// A contiguous block of measurement rows [begin, begin + rows) taken from
/// every column of an instance. Sample splitting hands disjoint slices to
/// the different phases; no-split uses the full slice.
class MeasurementSlice {
public:
    explicit MeasurementSlice(const ProblemInstance& instance)
        : MeasurementSlice(instance, 0, instance.m) {}

    MeasurementSlice(const ProblemInstance& instance, Index begin, Index rows);

    Index n() const { return instance_->n(); }
    Index q() const { return instance_->q(); }
    Index m() const { return rows_; }
    Index begin() const { return begin_; }

    auto a(Index k) const { return instance_->matrices[static_cast<std::size_t>(k)].middleRows(begin_, rows_); }
    auto y(Index k) const { return instance_->observations[static_cast<std::size_t>(k)].segment(begin_, rows_); }

    const ProblemInstance& instance() const { return *instance_; }

private:
    const ProblemInstance* instance_;
    Index begin_;
    Index rows_;
};

}  // namespace lrcs
