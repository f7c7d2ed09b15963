#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "megp/gp_config.hpp"
#include "megp/random.hpp"

namespace megp {

enum class Op : std::uint8_t { Add, Sub, Mul, Div, Sqrt, Log, Feature, Constant };

inline constexpr std::size_t kFunctionCount = 6;

constexpr int arity(Op op) noexcept
{
    switch (op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
        return 2;
    case Op::Sqrt:
    case Op::Log:
        return 1;
    default:
        return 0;
    }
}

std::string_view op_name(Op op) noexcept;

struct Node {
    Op op = Op::Constant;
    std::uint32_t feature = 0;
    double value = 0.0;

    static constexpr Node function(Op op) noexcept { return { op, 0, 0.0 }; }
    static constexpr Node variable(std::uint32_t index) noexcept { return { Op::Feature, index, 0.0 }; }
    static constexpr Node constant(double v) noexcept { return { Op::Constant, 0, v }; }

    constexpr bool is_terminal() const noexcept { return arity(op) == 0; }

    friend bool operator==(const Node&, const Node&) = default;
};

// Protected primitives. Shared by the scalar and batch evaluators so both
// paths produce bit-identical values.
namespace protect {
    inline constexpr double kThreshold = 1e-3;

    double div(double a, double b) noexcept;
    double sqrt(double a) noexcept;
    double log(double a) noexcept;
    /// Maps overflowed intermediates back into the finite range (NaN -> 0).
    double saturate(double v) noexcept;
} // namespace protect

/// Immutable expression tree stored as a prefix-ordered node sequence.
class Expression {
public:
    /// Throws StructuralError unless `nodes` encodes exactly one complete tree.
    explicit Expression(std::vector<Node> nodes);

    static Expression feature(std::uint32_t index);
    static Expression constant(double value);
    static Expression unary(Op op, const Expression& child);
    static Expression binary(Op op, const Expression& lhs, const Expression& rhs);

    std::span<const Node> nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t depth() const;

    /// One past the last node of the subtree rooted at `index`.
    std::size_t subtree_end(std::size_t index) const;
    Expression subtree(std::size_t index) const;
    /// Copy with the subtree rooted at `index` swapped for `replacement`.
    Expression replace_subtree(std::size_t index, const Expression& replacement) const;

    /// Largest referenced feature ordinal, if any feature appears.
    std::optional<std::uint32_t> max_feature() const noexcept;

    friend bool operator==(const Expression&, const Expression&) = default;

private:
    std::vector<Node> nodes_;
};

/// Column-major feature block used for batch evaluation.
struct ColumnData {
    std::size_t rows = 0;
    std::vector<std::vector<double>> columns;
};

/// Evaluates `expr` on one feature vector. Total on finite inputs.
double evaluate(const Expression& expr, std::span<const double> features);

/// Evaluates `expr` on every row of `data`, writing `data.rows` values to `out`.
void evaluate_batch(const Expression& expr, const ColumnData& data, std::span<double> out);

/// Half-and-half initialisation: full or grow with equal probability, depth
/// drawn uniformly from [init_depth_min, init_depth_max].
Expression random_expression(const GpConfig& config, std::size_t n_features, Rng& rng);

/// Grow-method tree of at most `depth` levels (root is a function when depth > 1).
Expression grow_expression(const GpConfig& config, std::size_t n_features, std::size_t depth, Rng& rng);

/// Full-method tree with every leaf at exactly `depth`.
Expression full_expression(const GpConfig& config, std::size_t n_features, std::size_t depth, Rng& rng);

/// Subtree crossover: copy of `a` with a uniformly chosen subtree replaced
/// by a uniformly chosen subtree of `b`.
Expression crossover(const Expression& a, const Expression& b, Rng& rng);

/// Subtree mutation: a uniformly chosen subtree is replaced by a freshly
/// grown tree with depth drawn from the initialisation range.
Expression mutate(const Expression& parent, const GpConfig& config, std::size_t n_features, Rng& rng);

/// Prefix s-expression, e.g. `(add x0 (mul 2 x1))`. Constants use the
/// shortest decimal form that round-trips exactly.
std::string serialize(const Expression& expr);
Expression parse(std::string_view text);

} // namespace megp
