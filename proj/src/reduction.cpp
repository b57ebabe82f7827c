#include "mujet/reduction.hpp"

#include <algorithm>
#include <set>

namespace mujet {

namespace {

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

int last_direction(const MultiIndex& K)
{
    for (int i = static_cast<int>(K.size()) - 1; i >= 0; --i) {
        if (K[sz(i)] > 0) return i;
    }
    return -1;
}

using Matrix = std::vector<std::vector<Expr>>;

Matrix minor_of(const Matrix& m, std::size_t row, std::size_t col)
{
    Matrix out;
    for (std::size_t r = 0; r < m.size(); ++r) {
        if (r == row) continue;
        std::vector<Expr> line;
        for (std::size_t c = 0; c < m.size(); ++c) {
            if (c != col) line.push_back(m[r][c]);
        }
        out.push_back(std::move(line));
    }
    return out;
}

Expr determinant(const Matrix& m)
{
    if (m.empty()) return Expr(1);
    if (m.size() == 1) return m[0][0];
    std::vector<Expr> terms;
    for (std::size_t c = 0; c < m.size(); ++c) {
        if (m[0][c].is_zero()) continue;
        Expr t = m[0][c] * determinant(minor_of(m, 0, c));
        terms.push_back(c % 2 == 0 ? t : -t);
    }
    return add(std::move(terms));
}

ExprMap<Expr> point_map(const CoordinateChange& change)
{
    ExprMap<Expr> map;
    for (int i = 0; i < change.source.p(); ++i) map[change.source.x(i)] = change.inverse_independent[sz(i)];
    for (int a = 0; a < change.source.q(); ++a) map[change.source.u(a)] = change.inverse_dependent[sz(a)];
    return map;
}

}  // namespace

void CoordinateChange::validate() const
{
    if (source.p() != target.p() || source.q() != target.q()) {
        throw std::invalid_argument("coordinate change must preserve the numbers of independent and dependent variables");
    }
    if (static_cast<int>(forward_independent.size()) != target.p() ||
        static_cast<int>(inverse_independent.size()) != source.p()) {
        throw std::invalid_argument("coordinate change needs one map per independent variable");
    }
    if (static_cast<int>(forward_dependent.size()) != target.q() ||
        static_cast<int>(inverse_dependent.size()) != source.q()) {
        throw std::invalid_argument("coordinate change needs one map per dependent variable");
    }
    auto point_only = [](const std::vector<Expr>& v) {
        for (const Expr& e : v) {
            if (max_jet_order(e) > 0) throw std::invalid_argument("coordinate maps must not involve derivatives");
        }
    };
    point_only(forward_independent);
    point_only(forward_dependent);
    point_only(inverse_independent);
    point_only(inverse_dependent);
}

CoordinateChange CoordinateChange::reversed() const
{
    return CoordinateChange{target, source, inverse_independent, inverse_dependent, forward_independent,
                            forward_dependent};
}

JetTransform transform_jet(const CoordinateChange& change, int order, const ZeroTestConfig& cfg)
{
    change.validate();
    if (order > 2) throw std::invalid_argument("jet transformation is limited to order 2");
    JetTransform out;
    if (order < 1) return out;
    const int p = change.source.p();
    const int q = change.source.q();
    const JetBundle& T = change.target;

    // A[i][alpha] = D~_alpha chi^i
    Matrix A(sz(p), std::vector<Expr>(sz(p)));
    for (int i = 0; i < p; ++i) {
        for (int al = 0; al < p; ++al) {
            A[sz(i)][sz(al)] = total_derivative_unbounded(change.inverse_independent[sz(i)], al, T);
        }
    }
    const Expr det = determinant(A);
    if (is_zero(det, cfg).zero()) {
        throw SingularJacobian("Jacobian of the inverse change is singular (determinant " + to_string(det) + ")");
    }
    const Expr inv_det = pow(det, Rational(-1));
    // inv[alpha][i] = cofactor(i, alpha) / det
    Matrix inv(sz(p), std::vector<Expr>(sz(p)));
    for (int i = 0; i < p; ++i) {
        for (int al = 0; al < p; ++al) {
            Expr c = determinant(minor_of(A, sz(i), sz(al)));
            if ((i + al) % 2 != 0) c = -c;
            inv[sz(al)][sz(i)] = c * inv_det;
        }
    }

    const MultiIndex zero(sz(p), 0);
    for (int a = 0; a < q; ++a) {
        std::map<MultiIndex, Expr> table;
        table[zero] = change.inverse_dependent[sz(a)];
        for (int n = 1; n <= order; ++n) {
            for (const MultiIndex& K : change.source.multi_indices_of_order(n)) {
                const int i = last_direction(K);
                MultiIndex J = K;
                --J[sz(i)];
                const Expr& prev = table.at(J);
                std::vector<Expr> terms;
                for (int al = 0; al < p; ++al) {
                    const Expr& w = inv[sz(al)][sz(i)];
                    if (w.is_zero()) continue;
                    terms.push_back(total_derivative_unbounded(prev, al, T) * w);
                }
                table[K] = add(std::move(terms));
                out.emplace_back(change.source.jet(a, K), table[K]);
            }
        }
    }
    return out;
}

Expr to_target(const Expr& e, const CoordinateChange& change, const JetTransform& jets)
{
    ExprMap<Expr> map = point_map(change);
    for (const auto& [from, to] : jets) map[from] = to;
    for (const Expr& s : free_symbols(e)) {
        if (s.is_jet() && map.find(s) == map.end()) {
            throw std::invalid_argument("no transformation available for " + to_string(s));
        }
    }
    return replace(e, map);
}

std::vector<Expr> change_round_trip_residual(const CoordinateChange& change)
{
    change.validate();
    const ExprMap<Expr> map = point_map(change);
    std::vector<Expr> out;
    for (int j = 0; j < change.target.p(); ++j) {
        out.push_back(replace(change.forward_independent[sz(j)], map) - change.target.x(j));
    }
    for (int a = 0; a < change.target.q(); ++a) {
        out.push_back(replace(change.forward_dependent[sz(a)], map) - change.target.u(a));
    }
    return out;
}

std::vector<Expr> jet_round_trip_residual(const CoordinateChange& change, int order, const ZeroTestConfig& cfg)
{
    const JetTransform there = transform_jet(change, order, cfg);
    const CoordinateChange back = change.reversed();
    const JetTransform back_jets = transform_jet(back, order, cfg);
    std::vector<Expr> out;
    for (const auto& [u, e] : there) out.push_back(to_target(e, back, back_jets) - u);
    return out;
}

InvariantCheck verify_invariant(const JetVectorField& Y, const std::string& name, const Expr& inv,
                                const JetBundle& bundle, const ZeroTestConfig& cfg)
{
    InvariantCheck c;
    c.name = name;
    c.residual = apply(Y, inv, bundle);
    c.verdict = is_zero(c.residual, cfg);
    return c;
}

std::vector<RestrictedInvariant> restrict_invariants(const std::vector<NamedExpr>& invariants,
                                                     const SubstitutionSystem& rules,
                                                     const std::map<std::string, RestrictionOverride>& overrides)
{
    std::vector<RestrictedInvariant> out;
    for (const auto& [name, value] : invariants) {
        RestrictedInvariant r;
        r.name = name;
        auto ov = overrides.find(name);
        if (ov != overrides.end() && ov->second.note.empty()) {
            throw std::invalid_argument("override for " + name + " needs a note");
        }
        try {
            r.value = rules.apply(value);
            if (ov != overrides.end()) r.note = "override not needed: substitution is regular";
        } catch (const SingularError& e) {
            if (ov == overrides.end()) {
                throw SingularError("restriction of " + name + " is singular (" + e.what() +
                                    "); supply a restricted value");
            }
            r.value = ov->second.value;
            r.overridden = true;
            r.note = ov->second.note;
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<SolutionCheck> verify_section_solution(const std::vector<Expr>& equations, const std::vector<Expr>& section,
                                                   const JetBundle& bundle, const ZeroTestConfig& cfg)
{
    if (static_cast<int>(section.size()) != bundle.q()) {
        throw std::invalid_argument("section needs one function per dependent variable");
    }
    std::vector<SolutionCheck> out;
    for (const Expr& eq : equations) {
        ExprMap<Expr> map;
        for (const Expr& s : free_symbols(eq)) {
            if (!s.is_jet()) continue;
            const Node& n = s.node();
            Expr d = section[sz(n.index)];
            for (int i = 0; i < bundle.p(); ++i) {
                for (int k = 0; k < n.orders[sz(i)]; ++k) d = diff(d, bundle.x(i));
            }
            map[s] = d;
        }
        SolutionCheck c;
        c.residual = replace(eq, map);
        c.verdict = is_zero(c.residual, cfg);
        out.push_back(std::move(c));
    }
    return out;
}

Expr drop_parametric_derivatives(const Expr& e, const JetBundle& target)
{
    ExprMap<Expr> map;
    const std::size_t last = sz(target.p() - 1);
    for (const Expr& s : free_symbols(e)) {
        if (s.is_jet() && s.node().orders.size() == last + 1 && s.node().orders[last] > 0) map[s] = Expr();
    }
    return map.empty() ? e : replace(e, map);
}

ReducedEquation reduced_equation(const Expr& F, const std::vector<RestrictedInvariant>& restricted,
                                 const std::vector<std::string>& invariant_names,
                                 const std::optional<CoordinateChange>& change, int order, const ZeroTestConfig& cfg)
{
    const std::set<std::string> names(invariant_names.begin(), invariant_names.end());
    ExprMap<Expr> map;
    for (const Expr& s : free_symbols(F)) {
        if (s.node().symbol_kind != SymbolKind::Parameter || !names.count(s.node().name)) continue;
        auto it = std::find_if(restricted.begin(), restricted.end(),
                               [&](const RestrictedInvariant& r) { return r.name == s.node().name; });
        if (it == restricted.end()) throw std::invalid_argument("unknown invariant " + s.node().name);
        map[s] = it->value;
    }
    ReducedEquation out;
    out.composed = replace(F, map);
    if (change) {
        const JetTransform jets = transform_jet(*change, order, cfg);
        out.adapted = to_target(out.composed, *change, jets);
        out.reduced = drop_parametric_derivatives(*out.adapted, change->target);
        const Expr sigma = change->target.x(change->target.p() - 1);
        out.sigma_free = is_zero(diff(*out.reduced, sigma), cfg);
    }
    return out;
}

}  // namespace mujet
