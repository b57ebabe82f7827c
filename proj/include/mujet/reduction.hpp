#ifndef MUJET_REDUCTION_HPP
#define MUJET_REDUCTION_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mujet/expr.hpp"
#include "mujet/jet_space.hpp"
#include "mujet/substitution.hpp"
#include "mujet/symmetry.hpp"
#include "mujet/zero_test.hpp"

namespace mujet {

class SingularJacobian : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// (x, u) -> (y, sigma; v). The target bundle lists the invariants y first
/// and the parametric coordinate sigma last.
struct CoordinateChange {
    JetBundle source;
    JetBundle target;
    /// y^j(x, u) and sigma(x, u), one per target independent variable.
    std::vector<Expr> forward_independent;
    /// v^a(x, u).
    std::vector<Expr> forward_dependent;
    /// x^i(y, sigma, v).
    std::vector<Expr> inverse_independent;
    /// u^a(y, sigma, v).
    std::vector<Expr> inverse_dependent;

    void validate() const;
    /// The same change read backwards.
    CoordinateChange reversed() const;
};

/// Source jet u^a_J (1 <= |J| <= order) -> expression in target jets.
using JetTransform = std::vector<std::pair<Expr, Expr>>;

/// Order is capped at 2. Throws SingularJacobian when the Jacobian of the
/// inverse map is not invertible.
JetTransform transform_jet(const CoordinateChange& change, int order, const ZeroTestConfig& cfg = {});

/// Rewrites an expression on the source jet space in target coordinates.
Expr to_target(const Expr& e, const CoordinateChange& change, const JetTransform& jets);

/// Forward-then-inverse residuals: y, sigma, v composed with the inverse maps
/// minus the target symbols.
std::vector<Expr> change_round_trip_residual(const CoordinateChange& change);

/// Residuals u_J(v_K(u)) - u_J for every transformed source jet.
std::vector<Expr> jet_round_trip_residual(const CoordinateChange& change, int order, const ZeroTestConfig& cfg = {});

struct InvariantCheck {
    std::string name;
    Expr residual;
    ZeroVerdict verdict;
};

InvariantCheck verify_invariant(const JetVectorField& Y, const std::string& name, const Expr& inv,
                                const JetBundle& bundle, const ZeroTestConfig& cfg = {});

struct NamedExpr {
    std::string name;
    Expr value;
};

/// User-supplied restricted value for an invariant whose direct substitution
/// is singular. The note is mandatory.
struct RestrictionOverride {
    Expr value;
    std::string note;
};

struct RestrictedInvariant {
    std::string name;
    Expr value;
    bool overridden = false;
    std::string note;
};

/// Substitutes the I_X rules into each invariant. A singular substitution
/// falls back to the override for that name, or throws SingularError.
std::vector<RestrictedInvariant> restrict_invariants(const std::vector<NamedExpr>& invariants,
                                                     const SubstitutionSystem& rules,
                                                     const std::map<std::string, RestrictionOverride>& overrides = {});

struct SolutionCheck {
    Expr residual;
    ZeroVerdict verdict;
};

/// Substitutes u^a_J -> d_J f^a into each equation.
std::vector<SolutionCheck> verify_section_solution(const std::vector<Expr>& equations, const std::vector<Expr>& section,
                                                   const JetBundle& bundle, const ZeroTestConfig& cfg = {});

struct ReducedEquation {
    /// F composed with the restricted invariants.
    Expr composed;
    /// `composed` rewritten in adapted coordinates (when a change is given).
    std::optional<Expr> adapted;
    /// `adapted` with every sigma-derivative of v set to zero.
    std::optional<Expr> reduced;
    /// d(reduced)/d(sigma).
    std::optional<ZeroVerdict> sigma_free;
};

/// Replaces the invariant symbols of F by their restricted values. Any
/// parameter of F named like an invariant must be present in `restricted`;
/// `invariant_names` lists all recognised invariant names.
ReducedEquation reduced_equation(const Expr& F, const std::vector<RestrictedInvariant>& restricted,
                                 const std::vector<std::string>& invariant_names,
                                 const std::optional<CoordinateChange>& change = std::nullopt, int order = 2,
                                 const ZeroTestConfig& cfg = {});

/// Sets every jet with a derivative in the last (parametric) target variable to zero.
Expr drop_parametric_derivatives(const Expr& e, const JetBundle& target);

}  // namespace mujet

#endif
