#include "hsflow/expr.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <utility>

namespace hsflow {
namespace detail {

enum class NodeKind { Constant, Variable, Negate, Binary, Call };
enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class Func { Sin, Cos, Tan, Sinh, Cosh, Tanh, Exp, Ln, Sqrt, Abs };

struct ExprNode {
    NodeKind kind;
    double value = 0.0;   // Constant
    std::string name;     // Variable
    BinOp op = BinOp::Add;
    Func fn = Func::Sin;
    std::shared_ptr<const ExprNode> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

const std::array<std::pair<const char*, Func>, 10> kFunctions = {{
    {"sin", Func::Sin}, {"cos", Func::Cos}, {"tan", Func::Tan},
    {"sinh", Func::Sinh}, {"cosh", Func::Cosh}, {"tanh", Func::Tanh},
    {"exp", Func::Exp}, {"ln", Func::Ln}, {"sqrt", Func::Sqrt},
    {"abs", Func::Abs},
}};

bool lookup_function(const std::string& name, Func* out) {
    for (const auto& [fname, fn] : kFunctions) {
        if (name == fname) {
            if (out) *out = fn;
            return true;
        }
    }
    return false;
}

const char* function_name(Func fn) {
    for (const auto& [fname, f] : kFunctions) {
        if (f == fn) return fname;
    }
    return "?";
}

NodePtr make_constant(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Constant;
    n->value = v;
    return n;
}

NodePtr make_variable(std::string name) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Variable;
    n->name = std::move(name);
    return n;
}

NodePtr make_negate(NodePtr a) {
    if (a->kind == NodeKind::Constant) return make_constant(-a->value);
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Negate;
    n->lhs = std::move(a);
    return n;
}

bool is_constant(const NodePtr& n, double v) {
    return n->kind == NodeKind::Constant && n->value == v;
}

NodePtr make_binary_raw(BinOp op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Binary;
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

// Folds neutral elements and constant pairs so that derivative trees stay a
// manageable size; anything beyond that is left unsimplified.
NodePtr make_binary(BinOp op, NodePtr a, NodePtr b) {
    switch (op) {
        case BinOp::Add:
            if (is_constant(a, 0.0)) return b;
            if (is_constant(b, 0.0)) return a;
            if (a->kind == NodeKind::Constant && b->kind == NodeKind::Constant)
                return make_constant(a->value + b->value);
            break;
        case BinOp::Sub:
            if (is_constant(b, 0.0)) return a;
            if (is_constant(a, 0.0)) return make_negate(b);
            if (a->kind == NodeKind::Constant && b->kind == NodeKind::Constant)
                return make_constant(a->value - b->value);
            break;
        case BinOp::Mul:
            if (is_constant(a, 0.0) || is_constant(b, 0.0)) return make_constant(0.0);
            if (is_constant(a, 1.0)) return b;
            if (is_constant(b, 1.0)) return a;
            if (a->kind == NodeKind::Constant && b->kind == NodeKind::Constant)
                return make_constant(a->value * b->value);
            break;
        case BinOp::Div:
            if (is_constant(a, 0.0)) return make_constant(0.0);
            if (is_constant(b, 1.0)) return a;
            break;
        case BinOp::Pow:
            if (is_constant(b, 1.0)) return a;
            if (is_constant(b, 0.0)) return make_constant(1.0);
            break;
    }
    return make_binary_raw(op, std::move(a), std::move(b));
}

NodePtr make_call(Func fn, NodePtr arg) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Call;
    n->fn = fn;
    n->lhs = std::move(arg);
    return n;
}

std::string print_node(const ExprNode& n);

std::string print_constant(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string print_node(const ExprNode& n) {
    switch (n.kind) {
        case NodeKind::Constant:
            return print_constant(n.value);
        case NodeKind::Variable:
            return n.name;
        case NodeKind::Negate:
            return "(-" + print_node(*n.lhs) + ")";
        case NodeKind::Binary: {
            const char* sym = "+";
            switch (n.op) {
                case BinOp::Add: sym = "+"; break;
                case BinOp::Sub: sym = "-"; break;
                case BinOp::Mul: sym = "*"; break;
                case BinOp::Div: sym = "/"; break;
                case BinOp::Pow: sym = "^"; break;
            }
            return "(" + print_node(*n.lhs) + sym + print_node(*n.rhs) + ")";
        }
        case NodeKind::Call:
            return std::string(function_name(n.fn)) + "(" + print_node(*n.lhs) + ")";
    }
    return "?";
}

struct EvalContext {
    const Bindings* full = nullptr;    // when set, every name resolves here
    const Bindings* params = nullptr;  // positional mode: extra names
    double x1 = 0.0, x3 = 0.0;
};

[[noreturn]] void eval_fail(const ExprNode& n, const std::string& what) {
    throw EvalError(what + " in subexpression " + print_node(n));
}

double eval_node(const ExprNode& n, const EvalContext& ctx) {
    switch (n.kind) {
        case NodeKind::Constant:
            return n.value;
        case NodeKind::Variable: {
            if (ctx.full) {
                auto it = ctx.full->find(n.name);
                if (it == ctx.full->end()) eval_fail(n, "unbound name '" + n.name + "'");
                return it->second;
            }
            if (n.name == "x1") return ctx.x1;
            if (n.name == "x3") return ctx.x3;
            if (ctx.params) {
                auto it = ctx.params->find(n.name);
                if (it != ctx.params->end()) return it->second;
            }
            eval_fail(n, "unbound name '" + n.name + "'");
        }
        case NodeKind::Negate:
            return -eval_node(*n.lhs, ctx);
        case NodeKind::Binary: {
            const double a = eval_node(*n.lhs, ctx);
            const double b = eval_node(*n.rhs, ctx);
            switch (n.op) {
                case BinOp::Add: return a + b;
                case BinOp::Sub: return a - b;
                case BinOp::Mul: return a * b;
                case BinOp::Div:
                    if (b == 0.0) eval_fail(n, "division by zero");
                    return a / b;
                case BinOp::Pow: {
                    if (a < 0.0 && b != std::floor(b))
                        eval_fail(n, "fractional power of negative base");
                    if (a == 0.0 && b < 0.0) eval_fail(n, "zero raised to negative power");
                    return std::pow(a, b);
                }
            }
            eval_fail(n, "bad operator");
        }
        case NodeKind::Call: {
            const double a = eval_node(*n.lhs, ctx);
            switch (n.fn) {
                case Func::Sin: return std::sin(a);
                case Func::Cos: return std::cos(a);
                case Func::Tan: return std::tan(a);
                case Func::Sinh: return std::sinh(a);
                case Func::Cosh: return std::cosh(a);
                case Func::Tanh: return std::tanh(a);
                case Func::Exp: return std::exp(a);
                case Func::Ln:
                    if (a <= 0.0) eval_fail(n, "logarithm of non-positive value");
                    return std::log(a);
                case Func::Sqrt:
                    if (a < 0.0) eval_fail(n, "square root of negative value");
                    return std::sqrt(a);
                case Func::Abs: return std::fabs(a);
            }
            eval_fail(n, "bad function");
        }
    }
    eval_fail(n, "bad node");
}

NodePtr diff_node(const NodePtr& n, const std::string& var);

NodePtr diff_call(const ExprNode& n, const std::string& var) {
    const NodePtr& u = n.lhs;
    NodePtr du = diff_node(u, var);
    NodePtr outer;
    switch (n.fn) {
        case Func::Sin: outer = make_call(Func::Cos, u); break;
        case Func::Cos: outer = make_negate(make_call(Func::Sin, u)); break;
        case Func::Tan:
            outer = make_binary(BinOp::Div, make_constant(1.0),
                                make_binary(BinOp::Pow, make_call(Func::Cos, u), make_constant(2.0)));
            break;
        case Func::Sinh: outer = make_call(Func::Cosh, u); break;
        case Func::Cosh: outer = make_call(Func::Sinh, u); break;
        case Func::Tanh:
            outer = make_binary(BinOp::Div, make_constant(1.0),
                                make_binary(BinOp::Pow, make_call(Func::Cosh, u), make_constant(2.0)));
            break;
        case Func::Exp: outer = make_call(Func::Exp, u); break;
        case Func::Ln: outer = make_binary(BinOp::Div, make_constant(1.0), u); break;
        case Func::Sqrt:
            outer = make_binary(BinOp::Div, make_constant(0.5), make_call(Func::Sqrt, u));
            break;
        case Func::Abs:
            // d|u| = u/|u| * du, undefined at u = 0
            outer = make_binary(BinOp::Div, u, make_call(Func::Abs, u));
            break;
    }
    return make_binary(BinOp::Mul, outer, std::move(du));
}

NodePtr diff_node(const NodePtr& n, const std::string& var) {
    switch (n->kind) {
        case NodeKind::Constant:
            return make_constant(0.0);
        case NodeKind::Variable:
            return make_constant(n->name == var ? 1.0 : 0.0);
        case NodeKind::Negate:
            return make_negate(diff_node(n->lhs, var));
        case NodeKind::Binary: {
            const NodePtr& u = n->lhs;
            const NodePtr& v = n->rhs;
            switch (n->op) {
                case BinOp::Add:
                    return make_binary(BinOp::Add, diff_node(u, var), diff_node(v, var));
                case BinOp::Sub:
                    return make_binary(BinOp::Sub, diff_node(u, var), diff_node(v, var));
                case BinOp::Mul:
                    return make_binary(BinOp::Add,
                                       make_binary(BinOp::Mul, diff_node(u, var), v),
                                       make_binary(BinOp::Mul, u, diff_node(v, var)));
                case BinOp::Div:
                    return make_binary(
                        BinOp::Div,
                        make_binary(BinOp::Sub,
                                    make_binary(BinOp::Mul, diff_node(u, var), v),
                                    make_binary(BinOp::Mul, u, diff_node(v, var))),
                        make_binary(BinOp::Pow, v, make_constant(2.0)));
                case BinOp::Pow: {
                    if (v->kind == NodeKind::Constant) {
                        // c*u^(c-1)*u'
                        return make_binary(
                            BinOp::Mul,
                            make_binary(BinOp::Mul, make_constant(v->value),
                                        make_binary(BinOp::Pow, u,
                                                    make_constant(v->value - 1.0))),
                            diff_node(u, var));
                    }
                    // u^v * (v' ln u + v u'/u)
                    NodePtr term1 = make_binary(BinOp::Mul, diff_node(v, var),
                                                make_call(Func::Ln, u));
                    NodePtr term2 = make_binary(BinOp::Div,
                                                make_binary(BinOp::Mul, v, diff_node(u, var)), u);
                    return make_binary(BinOp::Mul, n,
                                       make_binary(BinOp::Add, term1, term2));
                }
            }
            break;
        }
        case NodeKind::Call:
            return diff_call(*n, var);
    }
    return make_constant(0.0);
}

void collect_names(const ExprNode& n, std::set<std::string>& out) {
    switch (n.kind) {
        case NodeKind::Variable: out.insert(n.name); break;
        case NodeKind::Constant: break;
        default:
            if (n.lhs) collect_names(*n.lhs, out);
            if (n.rhs) collect_names(*n.rhs, out);
    }
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
    Parser(std::string_view text, const std::set<std::string>& allowed)
        : text_(text), allowed_(allowed) {}

    NodePtr run() {
        skip_ws();
        if (pos_ >= text_.size())
            throw ParseError("empty expression", 0);
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ < text_.size())
            throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
        return e;
    }

private:
    std::string_view text_;
    const std::set<std::string>& allowed_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek_is(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool consume(char c) {
        if (peek_is(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (consume('+')) lhs = make_binary_raw(BinOp::Add, lhs, parse_term());
            else if (consume('-')) lhs = make_binary_raw(BinOp::Sub, lhs, parse_term());
            else return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (consume('*')) lhs = make_binary_raw(BinOp::Mul, lhs, parse_unary());
            else if (consume('/')) lhs = make_binary_raw(BinOp::Div, lhs, parse_unary());
            else return lhs;
        }
    }

    NodePtr parse_unary() {
        if (consume('-')) return make_negate(parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (consume('^')) {
            // exponent may itself carry a unary minus: x^-2
            return make_binary_raw(BinOp::Pow, base, parse_unary());
        }
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size())
            throw ParseError("unexpected end of input", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_expr();
            if (!consume(')'))
                throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parse_name();
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        bool seen_digit = false, seen_dot = false;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                seen_digit = true;
                ++pos_;
            } else if (c == '.' && !seen_dot) {
                seen_dot = true;
                ++pos_;
            } else {
                break;
            }
        }
        if (!seen_digit)
            throw ParseError("malformed number", start);
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t exp_pos = pos_ + 1;
            if (exp_pos < text_.size() && (text_[exp_pos] == '+' || text_[exp_pos] == '-')) ++exp_pos;
            if (exp_pos < text_.size() && std::isdigit(static_cast<unsigned char>(text_[exp_pos]))) {
                pos_ = exp_pos;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            }
        }
        const std::string tok(text_.substr(start, pos_ - start));
        try {
            return make_constant(std::stod(tok));
        } catch (const std::exception&) {
            throw ParseError("malformed number '" + tok + "'", start);
        }
    }

    NodePtr parse_name() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string name(text_.substr(start, pos_ - start));
        Func fn;
        if (lookup_function(name, &fn)) {
            if (!consume('('))
                throw ParseError("expected '(' after function '" + name + "'", pos_);
            NodePtr arg = parse_expr();
            if (!consume(')'))
                throw ParseError("expected ')'", pos_);
            return make_call(fn, arg);
        }
        if (allowed_.count(name) == 0)
            throw ParseError("unknown identifier '" + name + "'", start);
        return make_variable(name);
    }
};

}  // namespace
}  // namespace detail

using detail::ExprNode;

Expression Expression::constant(double value) {
    return Expression(detail::make_constant(value));
}

Expression Expression::variable(const std::string& name) {
    return Expression(detail::make_variable(name));
}

double Expression::evaluate(const Bindings& bindings) const {
    if (!root_) throw EvalError("empty expression");
    detail::EvalContext ctx;
    ctx.full = &bindings;
    return detail::eval_node(*root_, ctx);
}

double Expression::evaluate(double x1, double x3, const Bindings& params) const {
    if (!root_) throw EvalError("empty expression");
    detail::EvalContext ctx;
    ctx.params = &params;
    ctx.x1 = x1;
    ctx.x3 = x3;
    return detail::eval_node(*root_, ctx);
}

double Expression::evaluate(double x1, double x3) const {
    static const Bindings kEmpty;
    return evaluate(x1, x3, kEmpty);
}

Expression Expression::derivative(const std::string& var) const {
    if (!root_) throw EvalError("empty expression");
    return Expression(detail::diff_node(root_, var));
}

std::string Expression::to_string() const {
    if (!root_) return "";
    return detail::print_node(*root_);
}

std::set<std::string> Expression::free_names() const {
    std::set<std::string> out;
    if (root_) detail::collect_names(*root_, out);
    return out;
}

Expression parse(std::string_view text, const std::set<std::string>& allowed_names) {
    detail::Parser p(text, allowed_names);
    return Expression(p.run());
}

Expression operator+(const Expression& a, const Expression& b) {
    return Expression(detail::make_binary(detail::BinOp::Add, a.root(), b.root()));
}
Expression operator-(const Expression& a, const Expression& b) {
    return Expression(detail::make_binary(detail::BinOp::Sub, a.root(), b.root()));
}
Expression operator*(const Expression& a, const Expression& b) {
    return Expression(detail::make_binary(detail::BinOp::Mul, a.root(), b.root()));
}
Expression operator/(const Expression& a, const Expression& b) {
    return Expression(detail::make_binary(detail::BinOp::Div, a.root(), b.root()));
}
Expression operator-(const Expression& a) {
    return Expression(detail::make_negate(a.root()));
}
Expression pow(const Expression& base, const Expression& exponent) {
    return Expression(detail::make_binary(detail::BinOp::Pow, base.root(), exponent.root()));
}

}  // namespace hsflow
