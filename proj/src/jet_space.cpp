#include "mujet/jet_space.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <numeric>
#include <set>

namespace mujet {

int order_of(const MultiIndex& J) { return std::accumulate(J.begin(), J.end(), 0); }

MultiIndex unit_index(int p, int i)
{
    MultiIndex J(static_cast<std::size_t>(p), 0);
    J[static_cast<std::size_t>(i)] = 1;
    return J;
}

MultiIndex plus_unit(MultiIndex J, int i)
{
    ++J[static_cast<std::size_t>(i)];
    return J;
}

// ---- JetBundle ------------------------------------------------------------

JetBundle::JetBundle(std::vector<std::string> independent, std::vector<std::string> dependent, int order)
    : independent_(std::move(independent)), dependent_(std::move(dependent)), order_(order)
{
    if (independent_.empty()) throw std::invalid_argument("bundle needs at least one independent variable");
    if (dependent_.empty()) throw std::invalid_argument("bundle needs at least one dependent variable");
    if (order_ < 1) throw std::invalid_argument("bundle order must be at least 1");
    std::set<std::string> seen;
    auto check_name = [&](const std::string& n) {
        if (n.empty() || !std::isalpha(static_cast<unsigned char>(n[0]))) {
            throw std::invalid_argument("invalid variable name '" + n + "'");
        }
        for (char c : n) {
            if (!std::isalnum(static_cast<unsigned char>(c))) {
                throw std::invalid_argument("invalid variable name '" + n + "'");
            }
        }
        if (!seen.insert(n).second) throw std::invalid_argument("duplicate variable name '" + n + "'");
    };
    for (const auto& n : independent_) check_name(n);
    for (const auto& n : dependent_) check_name(n);
    for (const auto& a : independent_) {
        for (const auto& b : independent_) {
            if (a != b && b.compare(0, a.size(), a) == 0) {
                throw std::invalid_argument("independent names must be prefix-free: '" + a + "' and '" + b + "'");
            }
        }
    }
    for (std::size_t i = 0; i < independent_.size(); ++i) {
        x_.push_back(mujet::independent(independent_[i], static_cast<int>(i)));
    }
}

std::string JetBundle::jet_name(int a, const MultiIndex& J) const
{
    std::string s = dependent_.at(static_cast<std::size_t>(a));
    if (order_of(J) == 0) return s;
    s += "_";
    for (std::size_t i = 0; i < J.size(); ++i) {
        for (int k = 0; k < J[i]; ++k) s += independent_[i];
    }
    return s;
}

Expr JetBundle::jet(int a, const MultiIndex& J) const
{
    if (static_cast<int>(J.size()) != p()) throw std::invalid_argument("multi-index has wrong length");
    return jet_symbol(jet_name(a, J), a, J);
}

int JetBundle::independent_index(const std::string& name) const
{
    auto it = std::find(independent_.begin(), independent_.end(), name);
    return it == independent_.end() ? -1 : static_cast<int>(it - independent_.begin());
}

int JetBundle::dependent_index(const std::string& name) const
{
    auto it = std::find(dependent_.begin(), dependent_.end(), name);
    return it == dependent_.end() ? -1 : static_cast<int>(it - dependent_.begin());
}

std::optional<MultiIndex> JetBundle::parse_suffix(const std::string& suffix) const
{
    if (suffix.empty()) return std::nullopt;
    MultiIndex J(static_cast<std::size_t>(p()), 0);
    std::size_t pos = 0;
    while (pos < suffix.size()) {
        bool matched = false;
        for (std::size_t i = 0; i < independent_.size(); ++i) {
            const std::string& n = independent_[i];
            if (suffix.compare(pos, n.size(), n) == 0) {
                ++J[i];
                pos += n.size();
                matched = true;
                break;
            }
        }
        if (!matched) return std::nullopt;
    }
    return J;
}

std::optional<std::pair<int, MultiIndex>> JetBundle::parse_jet(const std::string& name) const
{
    auto us = name.find('_');
    std::string base = us == std::string::npos ? name : name.substr(0, us);
    int a = dependent_index(base);
    if (a < 0) return std::nullopt;
    if (us == std::string::npos) return std::make_pair(a, MultiIndex(static_cast<std::size_t>(p()), 0));
    auto J = parse_suffix(name.substr(us + 1));
    if (!J) return std::nullopt;
    return std::make_pair(a, *J);
}

std::vector<MultiIndex> JetBundle::multi_indices_of_order(int n) const
{
    std::vector<MultiIndex> out;
    MultiIndex J(static_cast<std::size_t>(p()), 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i + 1 == J.size()) {
            J[i] = left;
            out.push_back(J);
            return;
        }
        for (int v = left; v >= 0; --v) {
            J[i] = v;
            rec(i + 1, left - v);
        }
    };
    rec(0, n);
    return out;
}

std::vector<MultiIndex> JetBundle::multi_indices(int max_order) const
{
    std::vector<MultiIndex> out;
    for (int n = 0; n <= max_order; ++n) {
        auto level = multi_indices_of_order(n);
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

JetBundle JetBundle::with_order(int k) const { return JetBundle(independent_, dependent_, k); }

// ---- total derivatives ----------------------------------------------------

namespace {

Expr total_derivative_impl(const Expr& e, int i, const JetBundle& bundle, bool bounded)
{
    const std::string& xi = bundle.independent_names().at(static_cast<std::size_t>(i));
    return derive(e, [&](const Expr& s) -> Expr {
        const Node& n = s.node();
        if (n.symbol_kind == SymbolKind::Independent) {
            return n.name == xi ? Expr(1) : Expr();
        }
        if (n.symbol_kind == SymbolKind::Jet) {
            if (static_cast<int>(n.orders.size()) != bundle.p()) {
                throw std::invalid_argument("jet variable " + n.name + " does not belong to this bundle");
            }
            if (bounded && order_of(n.orders) >= bundle.order()) {
                throw OrderOverflow("total derivative D_" + xi + " of " + n.name + " exceeds jet order " +
                                        std::to_string(bundle.order()),
                                    n.name);
            }
            return bundle.jet(n.index, plus_unit(n.orders, i));
        }
        return Expr();
    });
}

}  // namespace

Expr total_derivative(const Expr& e, int i, const JetBundle& bundle)
{
    return total_derivative_impl(e, i, bundle, true);
}

Expr total_derivative_unbounded(const Expr& e, int i, const JetBundle& bundle)
{
    return total_derivative_impl(e, i, bundle, false);
}

Expr total_derivative_multi(const Expr& e, const MultiIndex& J, const JetBundle& bundle)
{
    Expr r = e;
    for (std::size_t i = 0; i < J.size(); ++i) {
        for (int k = 0; k < J[i]; ++k) r = total_derivative_unbounded(r, static_cast<int>(i), bundle);
    }
    return r;
}

// ---- vector fields and contact forms --------------------------------------

const Expr& JetVectorField::coefficient(int a, const MultiIndex& J) const
{
    if (a < 0 || a >= static_cast<int>(psi.size())) throw std::out_of_range("dependent index out of table");
    auto it = psi[static_cast<std::size_t>(a)].find(J);
    if (it == psi[static_cast<std::size_t>(a)].end()) {
        throw std::out_of_range("multi-index of order " + std::to_string(order_of(J)) + " out of table");
    }
    return it->second;
}

Expr& JetVectorField::coefficient(int a, const MultiIndex& J)
{
    return const_cast<Expr&>(static_cast<const JetVectorField&>(*this).coefficient(a, J));
}

Expr contract(const JetVectorField& Y, const ContactForm& theta, const JetBundle& bundle)
{
    if (order_of(theta.J) > bundle.order() - 1) {
        throw std::out_of_range("contact form index exceeds order k-1");
    }
    std::vector<Expr> terms{Y.coefficient(theta.a, theta.J)};
    for (int m = 0; m < bundle.p(); ++m) {
        terms.push_back(-(bundle.jet(theta.a, plus_unit(theta.J, m)) * Y.xi[static_cast<std::size_t>(m)]));
    }
    return add(std::move(terms));
}

Expr commutator_contract(const JetVectorField& Y, int i, const ContactForm& theta, const JetBundle& bundle)
{
    if (order_of(theta.J) > Y.order - 1) {
        throw OrderOverflow("commutator needs Psi of order " + std::to_string(order_of(theta.J) + 1) +
                                " beyond the table",
                            bundle.jet_name(theta.a, theta.J));
    }
    std::vector<Expr> terms;
    terms.push_back(-Y.coefficient(theta.a, plus_unit(theta.J, i)));
    terms.push_back(total_derivative_unbounded(Y.coefficient(theta.a, theta.J), i, bundle));
    for (int m = 0; m < bundle.p(); ++m) {
        Expr dxi = total_derivative_unbounded(Y.xi[static_cast<std::size_t>(m)], i, bundle);
        if (!dxi.is_zero()) terms.push_back(-(bundle.jet(theta.a, plus_unit(theta.J, m)) * dxi));
    }
    return add(std::move(terms));
}

ContactDecomposition contact_decompose(const Expr& f, const JetBundle& bundle)
{
    ContactDecomposition out;
    for (int i = 0; i < bundle.p(); ++i) out.horizontal.push_back(total_derivative(f, i, bundle));
    for (const Expr& s : free_symbols(f)) {
        if (!s.is_jet()) continue;
        Expr c = diff(f, s);
        if (!c.is_zero()) out.contact.push_back({ContactForm{s.node().index, s.node().orders}, c});
    }
    return out;
}

OneForm differential(const Expr& f, const JetBundle& bundle)
{
    OneForm w;
    for (int i = 0; i < bundle.p(); ++i) w.dx.push_back(diff(f, bundle.x(i)));
    for (const Expr& s : free_symbols(f)) {
        if (!s.is_jet()) continue;
        Expr c = diff(f, s);
        if (!c.is_zero()) w.du[{s.node().index, s.node().orders}] = c;
    }
    return w;
}

std::vector<Expr> horizontal_components(const OneForm& w, const JetBundle& bundle)
{
    std::vector<Expr> out;
    for (int i = 0; i < bundle.p(); ++i) {
        std::vector<Expr> terms{w.dx.at(static_cast<std::size_t>(i))};
        for (const auto& [key, c] : w.du) {
            if (order_of(key.second) >= bundle.order()) {
                throw OrderOverflow("du component of top order has no contact rewriting", bundle.jet_name(key.first, key.second));
            }
            terms.push_back(c * bundle.jet(key.first, plus_unit(key.second, i)));
        }
        out.push_back(add(std::move(terms)));
    }
    return out;
}

// ---- matrices -------------------------------------------------------------

ExprMatrix zero_matrix(int n)
{
    return ExprMatrix(static_cast<std::size_t>(n), std::vector<Expr>(static_cast<std::size_t>(n)));
}

ExprMatrix identity_matrix(int n)
{
    ExprMatrix m = zero_matrix(n);
    for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = Expr(1);
    return m;
}

ExprMatrix matrix_add(const ExprMatrix& a, const ExprMatrix& b)
{
    ExprMatrix r = a;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a[i].size(); ++j) r[i][j] = a[i][j] + b[i][j];
    }
    return r;
}

ExprMatrix matrix_sub(const ExprMatrix& a, const ExprMatrix& b)
{
    ExprMatrix r = a;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a[i].size(); ++j) r[i][j] = a[i][j] - b[i][j];
    }
    return r;
}

ExprMatrix matrix_mul(const ExprMatrix& a, const ExprMatrix& b)
{
    const std::size_t n = a.size();
    const std::size_t m = b.empty() ? 0 : b[0].size();
    ExprMatrix r(n, std::vector<Expr>(m));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            std::vector<Expr> terms;
            for (std::size_t k = 0; k < b.size(); ++k) terms.push_back(a[i][k] * b[k][j]);
            r[i][j] = add(std::move(terms));
        }
    }
    return r;
}

ExprMatrix matrix_scale(const ExprMatrix& a, const Expr& s)
{
    ExprMatrix r = a;
    for (auto& row : r) {
        for (auto& e : row) e = e * s;
    }
    return r;
}

// ---- semibasic forms ------------------------------------------------------

SemibasicOneForm SemibasicOneForm::zero(int p)
{
    SemibasicOneForm m;
    m.scalar.assign(static_cast<std::size_t>(p), Expr());
    return m;
}

SemibasicOneForm SemibasicOneForm::from_scalar(std::vector<Expr> lambda, int source_order)
{
    SemibasicOneForm m;
    m.scalar = std::move(lambda);
    m.source_order = source_order;
    return m;
}

SemibasicOneForm SemibasicOneForm::from_matrices(std::vector<ExprMatrix> lambda, int source_order)
{
    SemibasicOneForm m;
    m.is_matrix = true;
    m.matrices = std::move(lambda);
    m.source_order = source_order;
    return m;
}

int SemibasicOneForm::p() const
{
    return static_cast<int>(is_matrix ? matrices.size() : scalar.size());
}

bool SemibasicOneForm::is_zero() const
{
    if (!is_matrix) {
        return std::all_of(scalar.begin(), scalar.end(), [](const Expr& e) { return e.is_zero(); });
    }
    for (const auto& m : matrices) {
        for (const auto& row : m) {
            for (const auto& e : row) {
                if (!e.is_zero()) return false;
            }
        }
    }
    return true;
}

Expr SemibasicOneForm::entry(int i, int a, int b) const
{
    if (is_matrix) {
        return matrices.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(a)).at(static_cast<std::size_t>(b));
    }
    return a == b ? scalar.at(static_cast<std::size_t>(i)) : Expr();
}

ExprMatrix SemibasicOneForm::matrix(int i, int q) const
{
    if (is_matrix) return matrices.at(static_cast<std::size_t>(i));
    return matrix_scale(identity_matrix(q), scalar.at(static_cast<std::size_t>(i)));
}

void SemibasicOneForm::validate(const JetBundle& bundle) const
{
    if (p() != bundle.p()) {
        throw std::invalid_argument("mu has " + std::to_string(p()) + " components, bundle has p = " +
                                    std::to_string(bundle.p()));
    }
    if (source_order < 0 || source_order > bundle.order()) {
        throw std::invalid_argument("mu source order " + std::to_string(source_order) + " exceeds bundle order");
    }
    auto check_order = [&](const Expr& e) {
        if (max_jet_order(e) > source_order) {
            throw std::invalid_argument("mu coefficient " + to_string(e) + " exceeds declared source order " +
                                        std::to_string(source_order));
        }
    };
    if (!is_matrix) {
        if (bundle.q() != 1 && !is_zero()) {
            throw std::invalid_argument("scalar mu requires a single dependent variable");
        }
        for (const auto& e : scalar) check_order(e);
        return;
    }
    for (const auto& m : matrices) {
        if (static_cast<int>(m.size()) != bundle.q()) throw std::invalid_argument("mu matrix must be q x q");
        for (const auto& row : m) {
            if (static_cast<int>(row.size()) != bundle.q()) throw std::invalid_argument("mu matrix must be q x q");
            for (const auto& e : row) check_order(e);
        }
    }
}

}  // namespace mujet
