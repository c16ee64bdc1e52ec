#include "lrcs/slice.hpp"

#include "lrcs/errors.hpp"

namespace lrcs {

MeasurementSlice::MeasurementSlice(const ProblemInstance& instance, Index begin, Index rows)
    : instance_(&instance), begin_(begin), rows_(rows) {
    if (begin < 0 || rows < 1 || begin + rows > instance.m) {
        throw ConfigError("measurement slice out of range");
    }
}

}  // namespace lrcs
