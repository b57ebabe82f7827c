#ifndef MUJET_JET_SPACE_HPP
#define MUJET_JET_SPACE_HPP

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mujet/expr.hpp"

namespace mujet {

/// Multi-index J = (j_1, ..., j_p).
using MultiIndex = std::vector<int>;

int order_of(const MultiIndex& J);
MultiIndex unit_index(int p, int i);
MultiIndex plus_unit(MultiIndex J, int i);

/// A total derivative (or other operation) would leave the truncated jet space.
class OrderOverflow : public std::runtime_error {
public:
    OrderOverflow(const std::string& what, std::string jet) : std::runtime_error(what), jet_(std::move(jet)) {}
    const std::string& jet() const { return jet_; }

private:
    std::string jet_;
};

/// Trivial bundle with p independent and q dependent variables, truncated at order k.
class JetBundle {
public:
    JetBundle() = default;
    JetBundle(std::vector<std::string> independent, std::vector<std::string> dependent, int order);

    int p() const { return static_cast<int>(independent_.size()); }
    int q() const { return static_cast<int>(dependent_.size()); }
    int order() const { return order_; }

    const std::vector<std::string>& independent_names() const { return independent_; }
    const std::vector<std::string>& dependent_names() const { return dependent_; }

    const Expr& x(int i) const { return x_[static_cast<std::size_t>(i)]; }
    Expr u(int a) const { return jet(a, MultiIndex(static_cast<std::size_t>(p()), 0)); }
    Expr jet(int a, const MultiIndex& J) const;
    std::string jet_name(int a, const MultiIndex& J) const;

    int independent_index(const std::string& name) const;
    int dependent_index(const std::string& name) const;

    /// Splits a derivative suffix such as "xxt" into a multi-index.
    std::optional<MultiIndex> parse_suffix(const std::string& suffix) const;

    /// Resolves a jet-variable name such as "u_xt" into (dependent, J).
    std::optional<std::pair<int, MultiIndex>> parse_jet(const std::string& name) const;

    /// All multi-indices with |J| <= max_order in graded order; within a
    /// degree, earlier independent variables come first (xx, xt, tt).
    std::vector<MultiIndex> multi_indices(int max_order) const;

    /// Multi-indices with |J| == n, graded order.
    std::vector<MultiIndex> multi_indices_of_order(int n) const;

    JetBundle with_order(int k) const;

private:
    std::vector<std::string> independent_;
    std::vector<std::string> dependent_;
    std::vector<Expr> x_;
    int order_ = 1;
};

/// D_i e on J^(k); throws OrderOverflow when e holds a jet of order >= k.
Expr total_derivative(const Expr& e, int i, const JetBundle& bundle);

/// D_i without the truncation check (maps J^(n) into J^(n+1) for any n).
Expr total_derivative_unbounded(const Expr& e, int i, const JetBundle& bundle);

/// D_J e = D_1^{j_1} ... D_p^{j_p} e, unbounded.
Expr total_derivative_multi(const Expr& e, const MultiIndex& J, const JetBundle& bundle);

/// Vector field on J^(k)M: base coefficients xi^i and vertical table Psi^a_J.
struct JetVectorField {
    std::vector<Expr> xi;
    std::vector<std::map<MultiIndex, Expr>> psi;
    int order = 0;

    const Expr& coefficient(int a, const MultiIndex& J) const;
    Expr& coefficient(int a, const MultiIndex& J);
};

/// Structural contact form theta^a_J = du^a_J - u^a_{J,m} dx^m.
struct ContactForm {
    int a = 0;
    MultiIndex J;
};

/// Y contracted with theta^a_J: Psi^a_J - u^a_{J,m} xi^m.
Expr contract(const JetVectorField& Y, const ContactForm& theta, const JetBundle& bundle);

/// [D_i, Y] contracted with theta^a_J:
/// -Psi^a_{J,i} + D_i Psi^a_J - u^a_{J,m} D_i xi^m.
/// Requires |J| <= Y.order - 1; D_i is taken into J^(k+1).
Expr commutator_contract(const JetVectorField& Y, int i, const ContactForm& theta, const JetBundle& bundle);

/// df = h_i dx^i + sum (df/du^a_J) theta^a_J.
struct ContactDecomposition {
    std::vector<Expr> horizontal;
    std::vector<std::pair<ContactForm, Expr>> contact;
};

ContactDecomposition contact_decompose(const Expr& f, const JetBundle& bundle);

/// One-form written in the coordinate basis dx^i, du^a_J.
struct OneForm {
    std::vector<Expr> dx;
    std::map<std::pair<int, MultiIndex>, Expr> du;
};

OneForm differential(const Expr& f, const JetBundle& bundle);

/// dx^i components after rewriting du^a_J = theta^a_J + u^a_{J,i} dx^i. The
/// form lies in the contact module iff all of them vanish.
std::vector<Expr> horizontal_components(const OneForm& w, const JetBundle& bundle);

using ExprMatrix = std::vector<std::vector<Expr>>;

ExprMatrix zero_matrix(int n);
ExprMatrix identity_matrix(int n);
ExprMatrix matrix_add(const ExprMatrix& a, const ExprMatrix& b);
ExprMatrix matrix_sub(const ExprMatrix& a, const ExprMatrix& b);
ExprMatrix matrix_mul(const ExprMatrix& a, const ExprMatrix& b);
ExprMatrix matrix_scale(const ExprMatrix& a, const Expr& s);

/// The form mu = lambda_i dx^i (scalar) or Lambda_i dx^i (q x q matrices).
struct SemibasicOneForm {
    bool is_matrix = false;
    std::vector<Expr> scalar;
    std::vector<ExprMatrix> matrices;
    int source_order = 1;

    static SemibasicOneForm zero(int p);
    static SemibasicOneForm from_scalar(std::vector<Expr> lambda, int source_order = 1);
    static SemibasicOneForm from_matrices(std::vector<ExprMatrix> lambda, int source_order = 1);

    int p() const;
    bool is_zero() const;

    /// (Lambda_i)^a_b; for the scalar case lambda_i when a == b.
    Expr entry(int i, int a, int b) const;

    /// Matrix view with q rows (scalar forms become lambda_i times identity).
    ExprMatrix matrix(int i, int q) const;

    /// Throws std::invalid_argument on dimension or order mismatch.
    void validate(const JetBundle& bundle) const;
};

}  // namespace mujet

#endif
