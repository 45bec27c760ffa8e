#ifndef HSFLOW_EXPR_HPP
#define HSFLOW_EXPR_HPP

/// Scalar expression trees for metric coefficients and conformal factors.
///
/// The grammar (used in metric JSON files and CLI flags):
///   expr    := term (('+'|'-') term)*
///   term    := unary (('*'|'/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?          (right-associative)
///   primary := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'
/// Functions: sin cos tan sinh cosh tanh exp ln sqrt abs.
/// Every other identifier must appear in the caller's allowed-name set.

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hsflow {

namespace detail {
struct ExprNode;
}

/// Raised on malformed input; carries the 0-based character offset.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : std::runtime_error(message), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Raised when evaluation leaves a function's domain (ln of a non-positive
/// value, sqrt of a negative, division by zero, fractional power of a
/// negative base). The message names the offending subexpression.
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Bindings = std::map<std::string, double>;

/// Immutable expression tree over {x1, x3} plus named parameters.
/// Safe to copy cheaply and to evaluate concurrently.
class Expression {
public:
    Expression() = default;  // empty; evaluating throws

    static Expression constant(double value);
    static Expression variable(const std::string& name);

    bool valid() const { return root_ != nullptr; }

    /// IEEE double value at the binding point; all free names must be bound.
    double evaluate(const Bindings& bindings) const;

    /// Fast path: binds x1 and x3 positionally, remaining names from params.
    double evaluate(double x1, double x3, const Bindings& params) const;
    double evaluate(double x1, double x3) const;

    /// Symbolic derivative by the standard rules. The result is not
    /// simplified beyond constant folding.
    Expression derivative(const std::string& var) const;

    /// Fully parenthesized text form; reparsing evaluates identically.
    std::string to_string() const;

    std::set<std::string> free_names() const;

    explicit Expression(std::shared_ptr<const detail::ExprNode> root)
        : root_(std::move(root)) {}
    const std::shared_ptr<const detail::ExprNode>& root() const { return root_; }

private:
    std::shared_ptr<const detail::ExprNode> root_;
};

/// Parse `text` against the grammar above. Identifiers outside
/// `allowed_names` (and the function table) raise ParseError with the
/// offending name and offset.
Expression parse(std::string_view text, const std::set<std::string>& allowed_names);

// Tree combinators, mostly for building derived quantities such as 1/f^3.
Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression pow(const Expression& base, const Expression& exponent);

}  // namespace hsflow

#endif  // HSFLOW_EXPR_HPP
