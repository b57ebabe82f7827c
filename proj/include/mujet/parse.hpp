#ifndef MUJET_PARSE_HPP
#define MUJET_PARSE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mujet/expr.hpp"
#include "mujet/jet_space.hpp"

namespace mujet {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t position)
        : std::runtime_error(message + " at position " + std::to_string(position)), position_(position)
    {
    }
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Names visible to the parser: the bundle's variables, parameters, and
/// uninterpreted functions with their default argument lists.
class SymbolTable {
public:
    SymbolTable() = default;
    explicit SymbolTable(JetBundle bundle) : bundle_(std::move(bundle)) {}

    const std::optional<JetBundle>& bundle() const { return bundle_; }
    void set_bundle(JetBundle bundle) { bundle_ = std::move(bundle); }

    void add_parameter(const std::string& name);
    /// Declares f(args...); the default arguments also fix the arity.
    void add_function(const std::string& name, std::vector<Expr> default_args);
    /// Binds a name to an arbitrary expression (e.g. a free symbol of another bundle).
    void add_alias(const std::string& name, Expr value);

    bool is_parameter(const std::string& name) const { return parameters_.count(name) != 0; }
    const std::vector<Expr>* function_defaults(const std::string& name) const;
    const Expr* alias(const std::string& name) const;
    std::vector<Expr> parameters() const;

    PrintOptions print_options() const;

private:
    std::optional<JetBundle> bundle_;
    std::map<std::string, Expr> parameters_;
    std::map<std::string, std::vector<Expr>> functions_;
    std::map<std::string, Expr> aliases_;
};

/// Parses an expression; see README for the grammar.
Expr parse(const std::string& text, const SymbolTable& table);

}  // namespace mujet

#endif
