#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

namespace lrcs {

/// Bad user/config input (dimensions, step sizes, grid definitions).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A factorization broke down. Optionally carries the offending iterate.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what,
                            std::optional<Eigen::MatrixXd> dump = std::nullopt)
        : std::runtime_error(what), dump_(std::move(dump)) {}

    const std::optional<Eigen::MatrixXd>& dump() const noexcept { return dump_; }

private:
    std::optional<Eigen::MatrixXd> dump_;
};

/// A_k U lost column rank in the per-column least-squares solve.
class RankDeficientError : public NumericalError {
public:
    RankDeficientError(const std::string& what, Eigen::Index column)
        : NumericalError(what), column_(column) {}

    Eigen::Index column() const noexcept { return column_; }

private:
    Eigen::Index column_;
};

}  // namespace lrcs
