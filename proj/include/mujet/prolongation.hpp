#ifndef MUJET_PROLONGATION_HPP
#define MUJET_PROLONGATION_HPP

#include <vector>

#include "mujet/expr.hpp"
#include "mujet/jet_space.hpp"
#include "mujet/substitution.hpp"

namespace mujet {

/// X = xi^i d/dx^i + phi^a d/du^a.
struct PointVectorField {
    std::vector<Expr> xi;
    std::vector<Expr> phi;
    /// Allows coefficients depending on jets up to source_order.
    bool generalized = false;
    int source_order = 0;

    void validate(const JetBundle& bundle) const;
};

/// Q^a = phi^a - u^a_i xi^i.
std::vector<Expr> characteristic(const PointVectorField& X, const JetBundle& bundle);

/// Standard prolongation to J^(k) by the recursive formula.
JetVectorField prolong_standard(const PointVectorField& X, const JetBundle& bundle);

/// mu-prolongation; scalar mu needs q = 1, matrix mu needs q x q blocks.
JetVectorField prolong_mu(const PointVectorField& X, const SemibasicOneForm& mu, const JetBundle& bundle);

/// Difference terms F^a_J with prolong_mu = prolong_standard + F (xi left empty).
JetVectorField difference_terms(const PointVectorField& X, const SemibasicOneForm& mu, const JetBundle& bundle);

/// The equation D_J Q^a = 0.
struct InvariantEquation {
    int a = 0;
    MultiIndex J;
    Expr expr;
};

/// All D_J Q^a = 0 with |J| <= k-1, dependent-major, J in graded order.
std::vector<InvariantEquation> invariant_manifold(const PointVectorField& X, const JetBundle& bundle);

/// Solves E = 0 for the designated jet L, which must occur linearly with a
/// coefficient that is not identically zero: L -> L - E / (dE/dL).
Rule solve_for(const Expr& equation, const Expr& leading);

/// Solves each equation for its designated leading jet, in order.
SubstitutionSystem solve_invariant_manifold(const std::vector<InvariantEquation>& equations,
                                            const std::vector<Expr>& leading, const JetBundle& bundle);

/// Coefficientwise residual of X^(k) - X_Q^(k) - xi^i D_i, dependent-major
/// over |J| <= k.
std::vector<Expr> evolutionary_identity_residual(const PointVectorField& X, const JetBundle& bundle);

}  // namespace mujet

#endif
