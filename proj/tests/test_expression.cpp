#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "megp/error.hpp"
#include "megp/expression.hpp"

using namespace megp;

namespace {

Expression x(std::uint32_t i) { return Expression::feature(i); }
Expression c(double v) { return Expression::constant(v); }
Expression bin(Op op, const Expression& a, const Expression& b) { return Expression::binary(op, a, b); }
Expression un(Op op, const Expression& a) { return Expression::unary(op, a); }

GpConfig depth_config(std::size_t lo, std::size_t hi)
{
    GpConfig cfg;
    cfg.init_depth_min = lo;
    cfg.init_depth_max = hi;
    return cfg;
}

std::vector<std::size_t> leaf_depths(const Expression& e)
{
    std::vector<std::size_t> depths;
    std::vector<std::size_t> open; // remaining child slots per ancestor
    for (const auto& n : e.nodes()) {
        const auto d = open.size() + 1;
        if (n.is_terminal()) {
            depths.push_back(d);
            while (!open.empty() && --open.back() == 0) {
                open.pop_back();
            }
        } else {
            open.push_back(static_cast<std::size_t>(arity(n.op)));
        }
    }
    return depths;
}

bool constants_in_range(const Expression& e, double lo, double hi)
{
    for (const auto& n : e.nodes()) {
        if (n.op == Op::Constant && (n.value < lo || n.value > hi)) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("evaluate: direct arithmetic")
{
    auto e = bin(Op::Add, x(0), bin(Op::Mul, c(2), x(1)));
    const double in[] = { 1, 3 };
    CHECK(evaluate(e, in) == 7.0);
}

TEST_CASE("evaluate: protected operators")
{
    CHECK(evaluate(bin(Op::Div, c(1), c(0.0005)), {}) == 1.0);
    CHECK(evaluate(un(Op::Sqrt, c(-4)), {}) == 2.0);
    CHECK(evaluate(un(Op::Log, c(0)), {}) == 0.0);
    CHECK(evaluate(un(Op::Log, c(-std::exp(1.0))), {}) == doctest::Approx(1.0));
    CHECK(evaluate(bin(Op::Div, c(6), c(-0.002)), {}) == doctest::Approx(-3000.0));
    CHECK(evaluate(bin(Op::Div, c(6), c(-0.0009)), {}) == 1.0);
}

TEST_CASE("evaluate: overflow saturates to a finite value")
{
    auto big = c(1000);
    Expression e = big;
    for (int i = 0; i < 8; ++i) {
        e = bin(Op::Mul, e, e);
    }
    const double v = evaluate(e, {});
    CHECK(std::isfinite(v));
    CHECK(v > 0);
    auto nan_source = bin(Op::Sub, e, e);
    CHECK(std::isfinite(evaluate(nan_source, {})));
}

TEST_CASE("evaluate: feature index beyond the input is an input error")
{
    const double in[] = { 1.0 };
    CHECK_THROWS_AS(evaluate(x(3), in), InputError);
}

TEST_CASE("malformed node sequences are structural errors")
{
    CHECK_THROWS_AS(Expression({ Node::function(Op::Add), Node::variable(0) }), StructuralError);
    CHECK_THROWS_AS(Expression({ Node::variable(0), Node::variable(1) }), StructuralError);
    CHECK_THROWS_AS(Expression(std::vector<Node> {}), StructuralError);
}

TEST_CASE("evaluation is total over a million random expression/input pairs")
{
    GpConfig cfg = depth_config(1, 6);
    Rng rng(12345);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    std::uniform_real_distribution<double> small(-1e-2, 1e-2);
    std::vector<double> in(5);
    std::size_t bad = 0;
    std::size_t count = 0;
    for (int e = 0; e < 20000; ++e) {
        auto expr = random_expression(cfg, in.size(), rng);
        for (int k = 0; k < 50; ++k, ++count) {
            for (auto& v : in) {
                v = (k % 3 == 0) ? small(rng) : u(rng);
            }
            if (!std::isfinite(evaluate(expr, in))) {
                ++bad;
            }
        }
    }
    CHECK(count == 1000000);
    CHECK(bad == 0);
}

TEST_CASE("batch evaluation matches scalar evaluation bit for bit")
{
    GpConfig cfg = depth_config(1, 7);
    Rng rng(7);
    std::uniform_real_distribution<double> u(-50, 50);
    ColumnData data;
    data.rows = 700;
    data.columns.assign(3, std::vector<double>(data.rows));
    for (auto& col : data.columns) {
        for (auto& v : col) {
            v = u(rng);
        }
    }
    std::vector<double> out(data.rows);
    for (int e = 0; e < 300; ++e) {
        auto expr = random_expression(cfg, 3, rng);
        evaluate_batch(expr, data, out);
        for (std::size_t i = 0; i < data.rows; ++i) {
            const double row[] = { data.columns[0][i], data.columns[1][i], data.columns[2][i] };
            REQUIRE(out[i] == evaluate(expr, row));
        }
    }
}

TEST_CASE("random_expression: depth bounds")
{
    SUBCASE("depth range [1,1] gives a lone terminal")
    {
        Rng rng(1);
        auto cfg = depth_config(1, 1);
        for (int i = 0; i < 200; ++i) {
            auto e = random_expression(cfg, 3, rng);
            REQUIRE(e.size() == 1);
            REQUIRE(e.nodes()[0].is_terminal());
        }
    }
    SUBCASE("full method at depth 2 puts every leaf at depth 2")
    {
        Rng rng(2);
        auto cfg = depth_config(2, 2);
        for (int i = 0; i < 200; ++i) {
            auto e = full_expression(cfg, 3, 2, rng);
            for (auto d : leaf_depths(e)) {
                REQUIRE(d == 2);
            }
        }
    }
    SUBCASE("10,000 draws in [2,6] stay within bounds")
    {
        Rng rng(3);
        auto cfg = depth_config(2, 6);
        std::size_t lo = 100;
        std::size_t hi = 0;
        for (int i = 0; i < 10000; ++i) {
            auto d = random_expression(cfg, 4, rng).depth();
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        CHECK(lo >= 2);
        CHECK(hi <= 6);
        CHECK(hi == 6);
    }
}

TEST_CASE("random_expression: identical seeds give identical trees")
{
    GpConfig cfg;
    Rng a(99);
    Rng b(99);
    for (int i = 0; i < 500; ++i) {
        REQUIRE(random_expression(cfg, 4, a) == random_expression(cfg, 4, b));
    }
}

TEST_CASE("random_expression: constants and features respect the config")
{
    GpConfig cfg = depth_config(2, 6);
    Rng rng(5);
    bool saw_constant = false;
    for (int i = 0; i < 2000; ++i) {
        auto e = random_expression(cfg, 3, rng);
        REQUIRE(constants_in_range(e, -1000, 1000));
        if (auto f = e.max_feature()) {
            REQUIRE(*f < 3);
        }
        for (const auto& n : e.nodes()) {
            saw_constant = saw_constant || n.op == Op::Constant;
        }
    }
    CHECK(saw_constant);
}

TEST_CASE("crossover")
{
    Rng rng(11);
    SUBCASE("lone terminal with itself is unchanged")
    {
        auto t = x(0);
        CHECK(crossover(t, t, rng) == t);
    }
    SUBCASE("result nodes come from the parents and the parents are untouched")
    {
        GpConfig cfg = depth_config(2, 5);
        for (int i = 0; i < 1000; ++i) {
            auto a = random_expression(cfg, 3, rng);
            auto b = random_expression(cfg, 3, rng);
            const auto a_copy = a;
            const auto b_copy = b;
            auto child = crossover(a, b, rng);
            REQUIRE(a == a_copy);
            REQUIRE(b == b_copy);
            std::map<std::tuple<int, std::uint32_t, double>, int> pool;
            for (const auto& n : a.nodes()) {
                ++pool[{ static_cast<int>(n.op), n.feature, n.value }];
            }
            for (const auto& n : b.nodes()) {
                ++pool[{ static_cast<int>(n.op), n.feature, n.value }];
            }
            for (const auto& n : child.nodes()) {
                auto& slot = pool[{ static_cast<int>(n.op), n.feature, n.value }];
                REQUIRE(slot > 0);
                --slot;
            }
            REQUIRE_NOTHROW(Expression(std::vector<Node>(child.nodes().begin(), child.nodes().end())));
        }
    }
}

TEST_CASE("mutate")
{
    GpConfig cfg = depth_config(2, 6);
    Rng rng(21);
    SUBCASE("constants stay in range and trees stay well formed")
    {
        for (int i = 0; i < 1000; ++i) {
            auto p = random_expression(cfg, 3, rng);
            const auto copy = p;
            auto m = mutate(p, cfg, 3, rng);
            REQUIRE(p == copy);
            REQUIRE(constants_in_range(m, -1000, 1000));
            REQUIRE_NOTHROW(Expression(std::vector<Node>(m.nodes().begin(), m.nodes().end())));
        }
    }
    SUBCASE("mutating a lone terminal replaces the root with a fresh tree")
    {
        int changed = 0;
        for (int i = 0; i < 200; ++i) {
            auto m = mutate(x(0), cfg, 3, rng);
            changed += m == x(0) ? 0 : 1;
            REQUIRE(m.depth() >= 1);
        }
        CHECK(changed > 150);
    }
}

TEST_CASE("serialize and parse")
{
    CHECK(serialize(bin(Op::Add, x(0), c(1))) == "(add x0 1)");
    CHECK(parse("(sqrt x2)") == un(Op::Sqrt, x(2)));
    CHECK(serialize(parse("(add x0 (mul 2.0 x1))")) == "(add x0 (mul 2 x1))");
    CHECK(parse("  ( log   -3.5e2 ) ") == un(Op::Log, c(-350)));

    SUBCASE("round trip of random expressions")
    {
        GpConfig cfg = depth_config(1, 6);
        Rng rng(31);
        for (int i = 0; i < 1000; ++i) {
            auto e = random_expression(cfg, 5, rng);
            auto text = serialize(e);
            REQUIRE(parse(text) == e);
            REQUIRE(serialize(parse(text)) == text);
        }
    }
    SUBCASE("syntax errors carry a position")
    {
        CHECK_THROWS_AS(parse("(add x0)"), ParseError);
        CHECK_THROWS_AS(parse("(pow x0 x1)"), ParseError);
        CHECK_THROWS_AS(parse("(add x0 x1) x2"), ParseError);
        CHECK_THROWS_AS(parse("(add x0 x1"), ParseError);
        CHECK_THROWS_AS(parse(""), ParseError);
        CHECK_THROWS_AS(parse("xq"), ParseError);
        try {
            parse("(add x0 x1) x2");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.position() == 12);
        }
    }
}
