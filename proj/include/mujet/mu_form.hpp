#ifndef MUJET_MU_FORM_HPP
#define MUJET_MU_FORM_HPP

#include <vector>

#include "mujet/expr.hpp"
#include "mujet/jet_space.hpp"
#include "mujet/prolongation.hpp"
#include "mujet/substitution.hpp"
#include "mujet/symmetry.hpp"
#include "mujet/zero_test.hpp"

namespace mujet {

/// Entry (row, col) of the compatibility residual for the pair i < j.
struct CompatEntry {
    int i = 0;
    int j = 0;
    int row = 0;
    int col = 0;
    Expr residual;
};

/// D_i lambda_j - D_j lambda_i (scalar), or
/// D_i Lambda_j - D_j Lambda_i + [Lambda_i, Lambda_j] entrywise (matrix).
std::vector<CompatEntry> compat_residual(const SemibasicOneForm& mu, const JetBundle& bundle);

struct CompatReport {
    std::vector<CompatEntry> entries;
    std::vector<ZeroVerdict> verdicts;
    bool ok() const;
};

/// Zero-tests every compatibility entry, after restriction by `rules` when given.
CompatReport check_compat(const SemibasicOneForm& mu, const JetBundle& bundle, const ZeroTestConfig& cfg = {});
CompatReport compat_on_solution(const SemibasicOneForm& mu, const SubstitutionSystem& rules, const JetBundle& bundle,
                                const ZeroTestConfig& cfg = {});

/// [nabla_i, nabla_j] f with nabla_i = D_i + Lambda_i acting on a q-vector f;
/// entries for i < j, dependent-major.
std::vector<Expr> nabla_commutator(const SemibasicOneForm& mu, const std::vector<Expr>& f, const JetBundle& bundle);

/// lambda_i = D_i P for P depending on (x, u) only.
SemibasicOneForm exact_from_potential(const Expr& P, const JetBundle& bundle);

/// Lambda_i = lambda_i^k L_k with [L_a, L_b] = c^k_ab L_k.
struct GaugedAlgebraSpec {
    std::vector<ExprMatrix> generators;
    /// structure[a][b][k] = c^k_ab.
    std::vector<std::vector<std::vector<Rational>>> structure;
    /// coefficients[i][k] = lambda_i^k.
    std::vector<std::vector<Expr>> coefficients;

    /// Throws std::invalid_argument on shape or structure-constant mismatch.
    void validate(const JetBundle& bundle) const;
    SemibasicOneForm assemble() const;
};

struct GaugedEntry {
    int i = 0;
    int j = 0;
    int k = 0;
    Expr residual;
};

/// (D_i lambda_j^k - D_j lambda_i^k) + c^k_ab lambda_i^a lambda_j^b for i < j.
std::vector<GaugedEntry> gauged_residual(const GaugedAlgebraSpec& spec, const JetBundle& bundle);

struct ExponentialFactorReport {
    /// X0 checked as a mu-symmetry with mu = dP.
    SymmetryVerdict mu_symmetry;
    /// e^P X0 checked as an ordinary symmetry.
    SymmetryVerdict rescaled_symmetry;
};

ExponentialFactorReport exponential_factor_check(const PointVectorField& X0, const Expr& P, const EquationSystem& sys,
                                                 const JetBundle& bundle, const ZeroTestConfig& cfg = {});

}  // namespace mujet

#endif
