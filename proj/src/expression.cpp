#include "megp/expression.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>

#include "megp/error.hpp"

namespace megp {

namespace {

constexpr std::array<Op, kFunctionCount> kFunctions { Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Sqrt, Op::Log };

std::optional<Op> function_from_name(std::string_view name) noexcept
{
    for (auto op : kFunctions) {
        if (op_name(op) == name) {
            return op;
        }
    }
    return std::nullopt;
}

inline double apply_binary(Op op, double a, double b) noexcept
{
    switch (op) {
    case Op::Add:
        return protect::saturate(a + b);
    case Op::Sub:
        return protect::saturate(a - b);
    case Op::Mul:
        return protect::saturate(a * b);
    default:
        return protect::div(a, b);
    }
}

inline double apply_unary(Op op, double a) noexcept
{
    return op == Op::Sqrt ? protect::sqrt(a) : protect::log(a);
}

double evaluate_at(std::span<const Node> nodes, std::size_t& index, std::span<const double> features)
{
    const Node& node = nodes[index++];
    switch (node.op) {
    case Op::Feature:
        return features[node.feature];
    case Op::Constant:
        return node.value;
    case Op::Sqrt:
    case Op::Log:
        return apply_unary(node.op, evaluate_at(nodes, index, features));
    default: {
        const double lhs = evaluate_at(nodes, index, features);
        const double rhs = evaluate_at(nodes, index, features);
        return apply_binary(node.op, lhs, rhs);
    }
    }
}

void check_features(const Expression& expr, std::size_t available)
{
    if (auto max = expr.max_feature(); max && *max >= available) {
        throw InputError("expression references feature x" + std::to_string(*max) + " but only "
            + std::to_string(available) + " features are available");
    }
}

Node random_terminal(const GpConfig& config, std::size_t n_features, Rng& rng)
{
    std::uniform_int_distribution<std::size_t> pick(0, n_features);
    const auto choice = pick(rng);
    if (choice < n_features) {
        return Node::variable(static_cast<std::uint32_t>(choice));
    }
    std::uniform_real_distribution<double> value(config.constant_min, config.constant_max);
    return Node::constant(value(rng));
}

Node random_function(Rng& rng)
{
    std::uniform_int_distribution<std::size_t> pick(0, kFunctionCount - 1);
    return Node::function(kFunctions[pick(rng)]);
}

// level is 1-based; the root sits at level 1.
void build(std::vector<Node>& out, const GpConfig& config, std::size_t n_features, std::size_t depth,
    std::size_t level, bool full, Rng& rng)
{
    bool function = false;
    if (level < depth) {
        if (full || level == 1) {
            function = true;
        } else {
            const auto terminals = n_features + 1;
            std::uniform_int_distribution<std::size_t> pick(0, kFunctionCount + terminals - 1);
            function = pick(rng) < kFunctionCount;
        }
    }
    if (!function) {
        out.push_back(random_terminal(config, n_features, rng));
        return;
    }
    const Node node = random_function(rng);
    out.push_back(node);
    for (int c = 0; c < arity(node.op); ++c) {
        build(out, config, n_features, depth, level + 1, full, rng);
    }
}

std::size_t uniform_index(std::size_t size, Rng& rng)
{
    std::uniform_int_distribution<std::size_t> pick(0, size - 1);
    return pick(rng);
}

std::size_t draw_depth(const GpConfig& config, Rng& rng)
{
    std::uniform_int_distribution<std::size_t> pick(config.init_depth_min, config.init_depth_max);
    return pick(rng);
}

} // namespace

std::string_view op_name(Op op) noexcept
{
    switch (op) {
    case Op::Add:
        return "add";
    case Op::Sub:
        return "sub";
    case Op::Mul:
        return "mul";
    case Op::Div:
        return "div";
    case Op::Sqrt:
        return "sqrt";
    case Op::Log:
        return "log";
    case Op::Feature:
        return "feature";
    case Op::Constant:
        return "constant";
    }
    return "?";
}

namespace protect {

    double div(double a, double b) noexcept
    {
        return std::abs(b) < kThreshold ? 1.0 : saturate(a / b);
    }

    double sqrt(double a) noexcept { return std::sqrt(std::abs(a)); }

    double log(double a) noexcept
    {
        return std::abs(a) < kThreshold ? 0.0 : std::log(std::abs(a));
    }

    double saturate(double v) noexcept
    {
        if (std::isfinite(v)) [[likely]] {
            return v;
        }
        if (std::isnan(v)) {
            return 0.0;
        }
        return v > 0 ? std::numeric_limits<double>::max() : std::numeric_limits<double>::lowest();
    }

} // namespace protect

Expression::Expression(std::vector<Node> nodes)
    : nodes_(std::move(nodes))
{
    if (nodes_.empty()) {
        throw StructuralError("expression has no nodes");
    }
    std::ptrdiff_t open = 1;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (open == 0) {
            throw StructuralError("node " + std::to_string(i) + " follows a complete tree");
        }
        const Node& node = nodes_[i];
        if (node.op == Op::Constant && !std::isfinite(node.value)) {
            throw StructuralError("non-finite constant at node " + std::to_string(i));
        }
        open += arity(node.op) - 1;
    }
    if (open != 0) {
        throw StructuralError("expression is missing " + std::to_string(open) + " operand(s)");
    }
}

Expression Expression::feature(std::uint32_t index) { return Expression({ Node::variable(index) }); }

Expression Expression::constant(double value) { return Expression({ Node::constant(value) }); }

Expression Expression::unary(Op op, const Expression& child)
{
    if (arity(op) != 1) {
        throw StructuralError(std::string(op_name(op)) + " is not a unary function");
    }
    std::vector<Node> nodes { Node::function(op) };
    nodes.insert(nodes.end(), child.nodes_.begin(), child.nodes_.end());
    return Expression(std::move(nodes));
}

Expression Expression::binary(Op op, const Expression& lhs, const Expression& rhs)
{
    if (arity(op) != 2) {
        throw StructuralError(std::string(op_name(op)) + " is not a binary function");
    }
    std::vector<Node> nodes { Node::function(op) };
    nodes.insert(nodes.end(), lhs.nodes_.begin(), lhs.nodes_.end());
    nodes.insert(nodes.end(), rhs.nodes_.begin(), rhs.nodes_.end());
    return Expression(std::move(nodes));
}

std::size_t Expression::depth() const
{
    // Each stack entry holds (level of node, children still expected).
    std::vector<std::pair<std::size_t, int>> stack;
    std::size_t deepest = 0;
    for (const Node& node : nodes_) {
        const std::size_t level = stack.empty() ? 1 : stack.back().first + 1;
        if (!stack.empty()) {
            --stack.back().second;
        }
        deepest = std::max(deepest, level);
        if (arity(node.op) > 0) {
            stack.emplace_back(level, arity(node.op));
        }
        while (!stack.empty() && stack.back().second == 0) {
            stack.pop_back();
        }
    }
    return deepest;
}

std::size_t Expression::subtree_end(std::size_t index) const
{
    if (index >= nodes_.size()) {
        throw InputError("subtree index out of range");
    }
    std::ptrdiff_t open = 1;
    std::size_t i = index;
    while (open > 0) {
        open += arity(nodes_[i].op) - 1;
        ++i;
    }
    return i;
}

Expression Expression::subtree(std::size_t index) const
{
    const auto end = subtree_end(index);
    return Expression(std::vector<Node>(nodes_.begin() + static_cast<std::ptrdiff_t>(index),
        nodes_.begin() + static_cast<std::ptrdiff_t>(end)));
}

Expression Expression::replace_subtree(std::size_t index, const Expression& replacement) const
{
    const auto end = subtree_end(index);
    std::vector<Node> nodes;
    nodes.reserve(nodes_.size() - (end - index) + replacement.size());
    nodes.insert(nodes.end(), nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(index));
    nodes.insert(nodes.end(), replacement.nodes_.begin(), replacement.nodes_.end());
    nodes.insert(nodes.end(), nodes_.begin() + static_cast<std::ptrdiff_t>(end), nodes_.end());
    return Expression(std::move(nodes));
}

std::optional<std::uint32_t> Expression::max_feature() const noexcept
{
    std::optional<std::uint32_t> max;
    for (const Node& node : nodes_) {
        if (node.op == Op::Feature && (!max || node.feature > *max)) {
            max = node.feature;
        }
    }
    return max;
}

double evaluate(const Expression& expr, std::span<const double> features)
{
    check_features(expr, features.size());
    std::size_t index = 0;
    return evaluate_at(expr.nodes(), index, features);
}

void evaluate_batch(const Expression& expr, const ColumnData& data, std::span<double> out)
{
    check_features(expr, data.columns.size());
    if (out.size() < data.rows) {
        throw InputError("output buffer smaller than row count");
    }

    constexpr std::size_t kChunk = 256;
    const auto nodes = expr.nodes();

    std::size_t max_stack = 0;
    std::size_t sp = 0;
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
        sp = sp + 1 - static_cast<std::size_t>(arity(it->op));
        max_stack = std::max(max_stack, sp);
    }

    thread_local std::vector<double> scratch;
    thread_local std::vector<const double*> stack;
    scratch.resize(max_stack * kChunk);
    stack.resize(max_stack);

    for (std::size_t start = 0; start < data.rows; start += kChunk) {
        const auto len = std::min(kChunk, data.rows - start);
        sp = 0;
        // Reverse prefix order leaves the first operand on top of the stack.
        for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
            const Node& node = *it;
            switch (node.op) {
            case Op::Feature:
                stack[sp++] = data.columns[node.feature].data() + start;
                break;
            case Op::Constant: {
                double* slot = scratch.data() + sp * kChunk;
                std::fill_n(slot, len, node.value);
                stack[sp++] = slot;
                break;
            }
            case Op::Sqrt:
            case Op::Log: {
                const double* a = stack[sp - 1];
                double* slot = scratch.data() + (sp - 1) * kChunk;
                if (node.op == Op::Sqrt) {
                    for (std::size_t j = 0; j < len; ++j) {
                        slot[j] = protect::sqrt(a[j]);
                    }
                } else {
                    for (std::size_t j = 0; j < len; ++j) {
                        slot[j] = protect::log(a[j]);
                    }
                }
                stack[sp - 1] = slot;
                break;
            }
            default: {
                const double* a = stack[sp - 1];
                const double* b = stack[sp - 2];
                double* slot = scratch.data() + (sp - 2) * kChunk;
                switch (node.op) {
                case Op::Add:
                    for (std::size_t j = 0; j < len; ++j) {
                        slot[j] = protect::saturate(a[j] + b[j]);
                    }
                    break;
                case Op::Sub:
                    for (std::size_t j = 0; j < len; ++j) {
                        slot[j] = protect::saturate(a[j] - b[j]);
                    }
                    break;
                case Op::Mul:
                    for (std::size_t j = 0; j < len; ++j) {
                        slot[j] = protect::saturate(a[j] * b[j]);
                    }
                    break;
                default:
                    for (std::size_t j = 0; j < len; ++j) {
                        slot[j] = protect::div(a[j], b[j]);
                    }
                    break;
                }
                stack[sp - 2] = slot;
                --sp;
                break;
            }
            }
        }
        std::copy_n(stack[0], len, out.begin() + static_cast<std::ptrdiff_t>(start));
    }
}

Expression grow_expression(const GpConfig& config, std::size_t n_features, std::size_t depth, Rng& rng)
{
    std::vector<Node> nodes;
    build(nodes, config, n_features, std::max<std::size_t>(depth, 1), 1, false, rng);
    return Expression(std::move(nodes));
}

Expression full_expression(const GpConfig& config, std::size_t n_features, std::size_t depth, Rng& rng)
{
    std::vector<Node> nodes;
    build(nodes, config, n_features, std::max<std::size_t>(depth, 1), 1, true, rng);
    return Expression(std::move(nodes));
}

Expression random_expression(const GpConfig& config, std::size_t n_features, Rng& rng)
{
    const auto depth = draw_depth(config, rng);
    std::bernoulli_distribution use_full(0.5);
    return use_full(rng) ? full_expression(config, n_features, depth, rng)
                         : grow_expression(config, n_features, depth, rng);
}

Expression crossover(const Expression& a, const Expression& b, Rng& rng)
{
    const auto target = uniform_index(a.size(), rng);
    const auto donor = uniform_index(b.size(), rng);
    return a.replace_subtree(target, b.subtree(donor));
}

Expression mutate(const Expression& parent, const GpConfig& config, std::size_t n_features, Rng& rng)
{
    const auto target = uniform_index(parent.size(), rng);
    const auto depth = draw_depth(config, rng);
    return parent.replace_subtree(target, grow_expression(config, n_features, depth, rng));
}

namespace {

    void write(std::string& out, std::span<const Node> nodes, std::size_t& index)
    {
        const Node& node = nodes[index++];
        if (node.op == Op::Feature) {
            out += 'x';
            out += std::to_string(node.feature);
            return;
        }
        if (node.op == Op::Constant) {
            std::array<char, 64> buf {};
            auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), node.value);
            out.append(buf.data(), end);
            return;
        }
        out += '(';
        out += op_name(node.op);
        for (int c = 0; c < arity(node.op); ++c) {
            out += ' ';
            write(out, nodes, index);
        }
        out += ')';
    }

    class Parser {
    public:
        explicit Parser(std::string_view text)
            : text_(text)
        {
        }

        std::vector<Node> run()
        {
            parse_node();
            skip_space();
            if (pos_ != text_.size()) {
                throw ParseError("unexpected trailing input", pos_);
            }
            return std::move(nodes_);
        }

    private:
        static bool is_delimiter(char c) noexcept
        {
            return c == '(' || c == ')' || c == ' ' || c == '\t' || c == '\n' || c == '\r';
        }

        void skip_space()
        {
            while (pos_ < text_.size() && is_delimiter(text_[pos_]) && text_[pos_] != '(' && text_[pos_] != ')') {
                ++pos_;
            }
        }

        std::string_view token()
        {
            const auto start = pos_;
            while (pos_ < text_.size() && !is_delimiter(text_[pos_])) {
                ++pos_;
            }
            return text_.substr(start, pos_ - start);
        }

        void parse_node()
        {
            skip_space();
            if (pos_ >= text_.size()) {
                throw ParseError("unexpected end of input", pos_);
            }
            if (text_[pos_] == ')') {
                throw ParseError("unexpected ')'", pos_);
            }
            if (text_[pos_] != '(') {
                parse_terminal();
                return;
            }

            const auto open = pos_++;
            skip_space();
            const auto name_pos = pos_;
            const auto name = token();
            const auto op = function_from_name(name);
            if (!op) {
                throw ParseError("unknown operator '" + std::string(name) + "'", name_pos);
            }
            nodes_.push_back(Node::function(*op));
            for (int c = 0; c < arity(*op); ++c) {
                skip_space();
                if (pos_ >= text_.size() || text_[pos_] == ')') {
                    throw ParseError("operator '" + std::string(name) + "' expects " + std::to_string(arity(*op))
                            + " operand(s), got " + std::to_string(c),
                        pos_);
                }
                parse_node();
            }
            skip_space();
            if (pos_ >= text_.size()) {
                throw ParseError("unclosed '(' opened at " + std::to_string(open), pos_);
            }
            if (text_[pos_] != ')') {
                throw ParseError("operator '" + std::string(name) + "' expects " + std::to_string(arity(*op))
                        + " operand(s), got more",
                    pos_);
            }
            ++pos_;
        }

        void parse_terminal()
        {
            const auto start = pos_;
            const auto tok = token();
            if (tok.size() > 1 && tok.front() == 'x') {
                std::uint32_t index = 0;
                const auto* first = tok.data() + 1;
                const auto* last = tok.data() + tok.size();
                auto [ptr, ec] = std::from_chars(first, last, index);
                if (ec != std::errc {} || ptr != last) {
                    throw ParseError("invalid feature token '" + std::string(tok) + "'", start);
                }
                nodes_.push_back(Node::variable(index));
                return;
            }
            double value = 0.0;
            const auto* last = tok.data() + tok.size();
            auto [ptr, ec] = std::from_chars(tok.data(), last, value);
            if (tok.empty() || ec != std::errc {} || ptr != last || !std::isfinite(value)) {
                throw ParseError("invalid token '" + std::string(tok) + "'", start);
            }
            nodes_.push_back(Node::constant(value));
        }

        std::string_view text_;
        std::size_t pos_ = 0;
        std::vector<Node> nodes_;
    };

} // namespace

std::string serialize(const Expression& expr)
{
    std::string out;
    std::size_t index = 0;
    write(out, expr.nodes(), index);
    return out;
}

Expression parse(std::string_view text) { return Expression(Parser(text).run()); }

} // namespace megp
