#ifndef MUJET_EXPR_HPP
#define MUJET_EXPR_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <gmpxx.h>

namespace mujet {

using Rational = mpq_class;

/// Node kinds, listed in canonical sort order.
enum class Kind : std::uint8_t { Number, Symbol, Function, Elementary, Power, Product, Sum };

enum class SymbolKind : std::uint8_t { Parameter, Independent, Jet };

enum class ElementaryFn : std::uint8_t { Exp, Log, Sin, Cos, Tan, Arctan };

/// Raised when a canonical constructor meets log(0) or a zero base with a
/// negative exponent.
class SingularError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Node;

/// Immutable, canonical symbolic expression. Copies share the underlying tree.
class Expr {
public:
    Expr();
    Expr(int value);  // NOLINT(google-explicit-constructor)
    Expr(const Rational& value);  // NOLINT(google-explicit-constructor)
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    const Node& node() const { return *node_; }
    const Node* get() const { return node_.get(); }

    Kind kind() const;
    std::size_t hash() const;
    std::uint64_t symbol_mask() const;

    bool is_number() const { return kind() == Kind::Number; }
    bool is_zero() const;
    bool is_one() const;
    bool is_integer() const;
    const Rational& number() const;

    bool is_symbol() const { return kind() == Kind::Symbol; }
    bool is_jet() const;
    const std::string& name() const;

    /// Children of composite nodes: function arguments, power base, product
    /// factors (coefficient excluded) or sum terms.
    const std::vector<Expr>& children() const;

    std::string str() const;

private:
    std::shared_ptr<const Node> node_;
};

class Node {
public:
    Kind kind = Kind::Number;
    std::size_t hash = 0;
    std::uint64_t symbol_mask = 0;
    // Number value, Product coefficient, or Power exponent.
    Rational value;
    // Symbol or Function name.
    std::string name;
    SymbolKind symbol_kind = SymbolKind::Parameter;
    // Independent-variable position, or dependent index of a jet variable.
    int index = -1;
    // Jet multi-index, or formal derivative orders of an uninterpreted function.
    std::vector<int> orders;
    ElementaryFn fn = ElementaryFn::Exp;
    std::vector<Expr> children;
};

// Total order used for canonical sorting: kind, then name, then recursively.
int compare(const Expr& a, const Expr& b);
bool operator==(const Expr& a, const Expr& b);
inline bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

struct ExprLess {
    bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};
struct ExprHash {
    std::size_t operator()(const Expr& e) const { return e.hash(); }
};
struct ExprEqual {
    bool operator()(const Expr& a, const Expr& b) const { return a == b; }
};

template <class V>
using ExprMap = std::unordered_map<Expr, V, ExprHash, ExprEqual>;

// ---- leaf constructors ----------------------------------------------------

Expr parameter(const std::string& name);
Expr independent(const std::string& name, int position);
Expr jet_symbol(const std::string& name, int dependent, std::vector<int> multi_index);
Expr function(const std::string& name, std::vector<int> orders, std::vector<Expr> args);
Expr function(const std::string& name, std::vector<Expr> args);

// ---- canonical arithmetic -------------------------------------------------

Expr add(std::vector<Expr> terms);
Expr mul(std::vector<Expr> factors);
Expr pow(const Expr& base, const Rational& exponent);
Expr elementary(ElementaryFn fn, const Expr& arg);

Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr tan(const Expr& a);
Expr arctan(const Expr& a);
Expr sqrt(const Expr& a);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr& operator+=(Expr& a, const Expr& b);
Expr& operator-=(Expr& a, const Expr& b);
Expr& operator*=(Expr& a, const Expr& b);

/// Splits a term into numeric coefficient and the remaining monomial.
std::pair<Rational, Expr> split_coefficient(const Expr& term);

/// Terms of a sum (a single-element list for anything else, empty for 0).
std::vector<Expr> terms_of(const Expr& e);

// ---- traversal ------------------------------------------------------------

/// Derivative of a symbol under a derivation; only called for Symbol nodes.
using SymbolDerivative = std::function<Expr(const Expr& symbol)>;

/// Applies the derivation fixed by its action on symbols; uninterpreted
/// functions pick up formal derivative orders through the chain rule.
/// `mask` is the union of symbol masks with nonzero image (used to skip
/// subtrees); pass ~0 to visit everything.
Expr derive(const Expr& e, const SymbolDerivative& d, std::uint64_t mask = ~std::uint64_t{0});

/// Partial derivative with respect to a symbol.
Expr diff(const Expr& e, const Expr& symbol);

/// Simultaneous replacement of symbols (and function-application nodes) by
/// expressions, rebuilt canonically.
Expr replace(const Expr& e, const ExprMap<Expr>& map);

/// Replaces every application of `name` (with any derivative orders) by the
/// matching partial derivative of `body` with respect to `params`, evaluated
/// at the application's arguments.
Expr instantiate_function(const Expr& e, const std::string& name, const std::vector<Expr>& params,
                          const Expr& body);

/// Distinct Symbol nodes occurring in e, in canonical order.
std::vector<Expr> free_symbols(const Expr& e);

/// Distinct Function nodes occurring in e, in canonical order.
std::vector<Expr> function_nodes(const Expr& e);

bool contains(const Expr& e, const Expr& symbol);

/// Largest |J| among jet symbols in e, or -1 when none occur.
int max_jet_order(const Expr& e);

/// Number of nodes in the tree, counting shared subtrees once per occurrence.
std::size_t tree_size(const Expr& e);

// ---- printing -------------------------------------------------------------

struct PrintOptions {
    /// Function name -> default argument list; matching applications print
    /// without their argument list (e.g. `phi_x` for phi[1,0](x,u)).
    std::unordered_map<std::string, std::vector<Expr>> default_args;
};

std::string to_string(const Expr& e, const PrintOptions& options = {});
std::string to_string(const Rational& r);

/// Suffix naming the derivative orders of a function whose arguments are
/// distinct symbols, e.g. "xu" for orders (1,0,1) over (x,t,u).
std::string derivative_suffix(const std::vector<int>& orders, const std::vector<Expr>& args);

}  // namespace mujet

#endif
