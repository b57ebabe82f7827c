#ifndef MUJET_SYMMETRY_HPP
#define MUJET_SYMMETRY_HPP

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "mujet/expr.hpp"
#include "mujet/jet_space.hpp"
#include "mujet/prolongation.hpp"
#include "mujet/substitution.hpp"
#include "mujet/zero_test.hpp"

namespace mujet {

/// Delta_1 = ... = Delta_r = 0 with solved forms for the leading derivatives.
struct EquationSystem {
    std::vector<Expr> equations;
    std::vector<Expr> leading;
    SubstitutionSystem solved;

    /// Builds solved forms by solving each equation for its leading jet.
    static EquationSystem from_equations(std::vector<Expr> equations, std::vector<Expr> leading,
                                         const JetBundle& bundle);

    /// Largest jet order among the equations.
    int order() const;

    /// Throws std::invalid_argument if some solved form does not annihilate
    /// its equation.
    void check_consistency(const ZeroTestConfig& cfg = {}) const;
};

/// Y(f) = xi^i df/dx^i + Psi^a_J df/du^a_J.
Expr apply(const JetVectorField& Y, const Expr& f, const JetBundle& bundle);

enum class SymmetryClass { StrongSymmetry, Symmetry, NotSymmetry };

const char* to_string(SymmetryClass c);

struct EquationVerdict {
    Expr raw;
    Expr restricted;
    ZeroVerdict raw_verdict;
    ZeroVerdict restricted_verdict;
    /// Phi with Y(Delta) = Phi * Delta, when exact division succeeds.
    std::optional<Expr> factor;
};

struct SymmetryVerdict {
    std::vector<EquationVerdict> equations;
    SymmetryClass classification = SymmetryClass::NotSymmetry;
};

SymmetryVerdict check_mu_symmetry(const PointVectorField& X, const SemibasicOneForm& mu, const EquationSystem& sys,
                                  const JetBundle& bundle, const ZeroTestConfig& cfg = {});

struct PreservationEntry {
    int a = 0;
    MultiIndex J;
    int i = 0;
    Expr residual;
};

/// dx^i components of L_Y theta^a_J + (Y contracted with Lambda_i theta_J)^a dx^i
/// for |J| <= Y.order - 1; all vanish iff Y is the mu-prolongation of its projection.
std::vector<PreservationEntry> mu_preservation_residual(const JetVectorField& Y, const SemibasicOneForm& mu,
                                                        const JetBundle& bundle);

struct DeterminingEquation {
    /// Monomial in the split jet variables whose coefficient this is.
    Expr monomial;
    Expr equation;
};

/// Y(Delta_i) for a field with unknown coefficients, restricted to the
/// solution manifold and split by monomials in the jet variables outside
/// `ansatz_arguments`. Ordered by total degree, then canonically.
std::vector<DeterminingEquation> determining_system(const PointVectorField& X, const SemibasicOneForm& mu,
                                                    const EquationSystem& sys,
                                                    const std::vector<Expr>& ansatz_arguments,
                                                    const JetBundle& bundle);

}  // namespace mujet

#endif
