#ifndef MUJET_PROBLEM_HPP
#define MUJET_PROBLEM_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mujet/mu_form.hpp"
#include "mujet/parse.hpp"
#include "mujet/prolongation.hpp"
#include "mujet/reduction.hpp"
#include "mujet/symmetry.hpp"
#include "mujet/zero_test.hpp"

namespace mujet {

class ProblemError : public std::runtime_error {
public:
    ProblemError(int line, const std::string& message)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line)
    {
    }
    int line() const { return line_; }

private:
    int line_;
};

struct NamedEquation {
    std::string name;
    Expr expr;
    std::optional<Expr> leading;
};

/// Parsed problem file (format "mujet 1"; grammar in the README).
struct Problem {
    JetBundle bundle;
    SymbolTable table;

    std::optional<PointVectorField> field;

    /// Semibasic form; zero when the file has no [mu] section.
    SemibasicOneForm mu;
    bool has_mu = false;
    std::optional<Expr> potential;
    std::optional<GaugedAlgebraSpec> gauged;

    std::vector<NamedEquation> equations;
    /// Explicit solved forms from [solved]; empty means "solve for the leading jets".
    std::vector<Rule> solved;

    std::vector<NamedExpr> invariants;
    std::vector<Expr> manifold_leading;
    std::map<std::string, RestrictionOverride> overrides;
    std::vector<NamedExpr> restricted_expected;

    std::optional<CoordinateChange> change;
    SymbolTable target_table;

    /// Invariant names visible as parameters in reduce_table.
    SymbolTable reduce_table;
    std::vector<NamedExpr> reduce;

    std::vector<Expr> solutions;
    std::vector<Expr> reduced_solutions;

    std::optional<PointVectorField> ansatz;
    std::vector<Expr> ansatz_arguments;

    ZeroTestConfig config;
    bool seed_in_file = false;

    /// The equation system with solved forms; throws std::invalid_argument
    /// when the file has no equations.
    EquationSystem equation_system() const;
    /// I_X rules solved for [invariant-manifold] leading jets.
    SubstitutionSystem invariant_manifold_rules() const;
    std::vector<std::string> invariant_names() const;
};

Problem parse_problem(const std::string& text);
Problem load_problem(const std::string& path);

}  // namespace mujet

#endif
