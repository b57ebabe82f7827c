#include "mujet/prolongation.hpp"

#include "mujet/zero_test.hpp"

namespace mujet {

namespace {

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

// Index i used to reach K from its predecessor: the last one with k_i > 0.
int last_direction(const MultiIndex& K)
{
    for (int i = static_cast<int>(K.size()) - 1; i >= 0; --i) {
        if (K[sz(i)] > 0) return i;
    }
    return -1;
}

JetVectorField empty_field(const JetBundle& bundle)
{
    JetVectorField Y;
    Y.order = bundle.order();
    Y.psi.resize(sz(bundle.q()));
    return Y;
}

void check_mu(const SemibasicOneForm& mu, const JetBundle& bundle)
{
    mu.validate(bundle);
}

}  // namespace

void PointVectorField::validate(const JetBundle& bundle) const
{
    if (static_cast<int>(xi.size()) != bundle.p()) throw std::invalid_argument("field needs one xi per independent variable");
    if (static_cast<int>(phi.size()) != bundle.q()) throw std::invalid_argument("field needs one phi per dependent variable");
    const int allowed = generalized ? source_order : 0;
    auto check = [&](const Expr& e) {
        if (max_jet_order(e) > allowed) {
            throw std::invalid_argument("field coefficient " + to_string(e) + " depends on derivatives; mark the field generalized");
        }
    };
    for (const auto& e : xi) check(e);
    for (const auto& e : phi) check(e);
}

std::vector<Expr> characteristic(const PointVectorField& X, const JetBundle& bundle)
{
    std::vector<Expr> Q;
    for (int a = 0; a < bundle.q(); ++a) {
        std::vector<Expr> terms{X.phi[sz(a)]};
        for (int i = 0; i < bundle.p(); ++i) {
            terms.push_back(-(bundle.jet(a, unit_index(bundle.p(), i)) * X.xi[sz(i)]));
        }
        Q.push_back(add(std::move(terms)));
    }
    return Q;
}

JetVectorField prolong_mu(const PointVectorField& X, const SemibasicOneForm& mu, const JetBundle& bundle)
{
    X.validate(bundle);
    check_mu(mu, bundle);
    const int p = bundle.p();
    const int q = bundle.q();
    JetVectorField Y = empty_field(bundle);
    Y.xi = X.xi;
    const MultiIndex zero(sz(p), 0);
    for (int a = 0; a < q; ++a) Y.psi[sz(a)][zero] = X.phi[sz(a)];
    const bool twisted = !mu.is_zero();
    // Generalized coefficients reach source_order beyond the table order.
    auto D = [&](const Expr& e, int i) {
        return X.generalized ? total_derivative_unbounded(e, i, bundle) : total_derivative(e, i, bundle);
    };

    std::vector<std::vector<Expr>> dxi(sz(p));
    for (int i = 0; i < p; ++i) {
        for (int m = 0; m < p; ++m) dxi[sz(i)].push_back(D(X.xi[sz(m)], i));
    }

    for (int n = 1; n <= bundle.order(); ++n) {
        for (const MultiIndex& K : bundle.multi_indices_of_order(n)) {
            const int i = last_direction(K);
            MultiIndex J = K;
            --J[sz(i)];
            // Y contracted with theta^b_J, needed only for the twist.
            std::vector<Expr> contracted(sz(q));
            if (twisted) {
                for (int b = 0; b < q; ++b) {
                    std::vector<Expr> terms{Y.psi[sz(b)][J]};
                    for (int m = 0; m < p; ++m) {
                        terms.push_back(-(bundle.jet(b, plus_unit(J, m)) * X.xi[sz(m)]));
                    }
                    contracted[sz(b)] = add(std::move(terms));
                }
            }
            for (int a = 0; a < q; ++a) {
                std::vector<Expr> terms{D(Y.psi[sz(a)][J], i)};
                for (int m = 0; m < p; ++m) {
                    const Expr& d = dxi[sz(i)][sz(m)];
                    if (!d.is_zero()) terms.push_back(-(bundle.jet(a, plus_unit(J, m)) * d));
                }
                if (twisted) {
                    for (int b = 0; b < q; ++b) {
                        Expr l = mu.entry(i, a, b);
                        if (!l.is_zero()) terms.push_back(l * contracted[sz(b)]);
                    }
                }
                Y.psi[sz(a)][K] = add(std::move(terms));
            }
        }
    }
    return Y;
}

JetVectorField prolong_standard(const PointVectorField& X, const JetBundle& bundle)
{
    return prolong_mu(X, SemibasicOneForm::zero(bundle.p()), bundle);
}

JetVectorField difference_terms(const PointVectorField& X, const SemibasicOneForm& mu, const JetBundle& bundle)
{
    X.validate(bundle);
    check_mu(mu, bundle);
    const int q = bundle.q();
    JetVectorField F = empty_field(bundle);
    F.xi.assign(sz(bundle.p()), Expr());
    const std::vector<Expr> Q = characteristic(X, bundle);
    const MultiIndex zero(sz(bundle.p()), 0);
    for (int a = 0; a < q; ++a) F.psi[sz(a)][zero] = Expr();
    std::vector<std::map<MultiIndex, Expr>> DQ(sz(q));
    for (int a = 0; a < q; ++a) DQ[sz(a)][zero] = Q[sz(a)];
    auto dq = [&](int b, const MultiIndex& J) -> const Expr& {
        auto it = DQ[sz(b)].find(J);
        if (it != DQ[sz(b)].end()) return it->second;
        const int i = last_direction(J);
        MultiIndex prev = J;
        --prev[sz(i)];
        Expr base = DQ[sz(b)].at(prev);
        return DQ[sz(b)][J] = total_derivative(base, i, bundle);
    };
    for (int n = 1; n <= bundle.order(); ++n) {
        for (const MultiIndex& K : bundle.multi_indices_of_order(n)) {
            const int i = last_direction(K);
            MultiIndex J = K;
            --J[sz(i)];
            for (int a = 0; a < q; ++a) {
                std::vector<Expr> terms{total_derivative(F.psi[sz(a)][J], i, bundle)};
                for (int b = 0; b < q; ++b) {
                    Expr l = mu.entry(i, a, b);
                    if (l.is_zero()) continue;
                    terms.push_back(l * F.psi[sz(b)][J]);
                    terms.push_back(l * dq(b, J));
                }
                F.psi[sz(a)][K] = add(std::move(terms));
            }
        }
    }
    return F;
}

std::vector<InvariantEquation> invariant_manifold(const PointVectorField& X, const JetBundle& bundle)
{
    X.validate(bundle);
    const std::vector<Expr> Q = characteristic(X, bundle);
    std::vector<InvariantEquation> out;
    for (int a = 0; a < bundle.q(); ++a) {
        std::map<MultiIndex, Expr> D;
        for (const MultiIndex& J : bundle.multi_indices(bundle.order() - 1)) {
            Expr e;
            const int i = last_direction(J);
            if (i < 0) {
                e = Q[sz(a)];
            } else {
                MultiIndex prev = J;
                --prev[sz(i)];
                e = total_derivative(D.at(prev), i, bundle);
            }
            D[J] = e;
            out.push_back({a, J, e});
        }
    }
    return out;
}

Rule solve_for(const Expr& equation, const Expr& leading)
{
    if (!leading.is_symbol()) throw std::invalid_argument("leading variable must be a symbol");
    Expr c = diff(equation, leading);
    if (is_zero(c).zero()) {
        throw std::invalid_argument("leading variable " + to_string(leading) + " has identically zero coefficient in " +
                                    to_string(equation));
    }
    if (!is_exact_zero(diff(c, leading))) {
        throw std::invalid_argument("equation " + to_string(equation) + " is not linear in " + to_string(leading));
    }
    return Rule{leading, leading - equation / c};
}

SubstitutionSystem solve_invariant_manifold(const std::vector<InvariantEquation>& equations,
                                            const std::vector<Expr>& leading, const JetBundle& bundle)
{
    if (leading.size() != equations.size()) {
        throw std::invalid_argument("need one leading variable per invariance equation (" +
                                    std::to_string(equations.size()) + ")");
    }
    std::vector<Rule> rules;
    for (std::size_t k = 0; k < equations.size(); ++k) rules.push_back(solve_for(equations[k].expr, leading[k]));
    return SubstitutionSystem(std::move(rules), true, bundle);
}

std::vector<Expr> evolutionary_identity_residual(const PointVectorField& X, const JetBundle& bundle)
{
    // D_J Q has order |J| + max(1, source order).
    const JetBundle big = bundle.with_order(bundle.order() + std::max(1, X.generalized ? X.source_order : 0));
    const JetVectorField Y = prolong_standard(X, bundle);
    const std::vector<Expr> Q = characteristic(X, bundle);
    std::vector<Expr> out;
    for (int a = 0; a < bundle.q(); ++a) {
        for (const MultiIndex& J : bundle.multi_indices(bundle.order())) {
            std::vector<Expr> terms{Y.coefficient(a, J), -total_derivative_multi(Q[sz(a)], J, big)};
            for (int i = 0; i < bundle.p(); ++i) {
                terms.push_back(-(X.xi[sz(i)] * bundle.jet(a, plus_unit(J, i))));
            }
            out.push_back(add(std::move(terms)));
        }
    }
    return out;
}

}  // namespace mujet
