#include "mujet/symmetry.hpp"

#include <algorithm>

namespace mujet {

namespace {

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

}  // namespace

EquationSystem EquationSystem::from_equations(std::vector<Expr> equations, std::vector<Expr> leading,
                                              const JetBundle& bundle)
{
    if (equations.size() != leading.size()) throw std::invalid_argument("need one leading variable per equation");
    EquationSystem sys;
    std::vector<Rule> rules;
    for (std::size_t k = 0; k < equations.size(); ++k) rules.push_back(solve_for(equations[k], leading[k]));
    sys.equations = std::move(equations);
    sys.leading = std::move(leading);
    sys.solved = SubstitutionSystem(std::move(rules), true, bundle);
    return sys;
}

int EquationSystem::order() const
{
    int k = 0;
    for (const Expr& e : equations) k = std::max(k, max_jet_order(e));
    return k;
}

void EquationSystem::check_consistency(const ZeroTestConfig& cfg) const
{
    for (const Expr& e : equations) {
        Expr r = solved.apply(e);
        if (!is_zero(r, cfg).zero()) {
            throw std::invalid_argument("solved forms do not annihilate equation " + to_string(e) + "; residual " +
                                        to_string(r));
        }
    }
}

Expr apply(const JetVectorField& Y, const Expr& f, const JetBundle& bundle)
{
    return derive(f, [&](const Expr& s) -> Expr {
        const Node& n = s.node();
        if (n.symbol_kind == SymbolKind::Independent) {
            int i = bundle.independent_index(n.name);
            if (i < 0) throw std::invalid_argument("symbol " + n.name + " is not an independent variable of the bundle");
            return Y.xi[sz(i)];
        }
        if (n.symbol_kind == SymbolKind::Jet) {
            if (order_of(n.orders) > Y.order) {
                throw OrderOverflow("jet variable " + n.name + " exceeds the prolongation order " +
                                        std::to_string(Y.order),
                                    n.name);
            }
            return Y.coefficient(n.index, n.orders);
        }
        return Expr();
    });
}

const char* to_string(SymmetryClass c)
{
    switch (c) {
    case SymmetryClass::StrongSymmetry: return "StrongSymmetry";
    case SymmetryClass::Symmetry: return "Symmetry";
    case SymmetryClass::NotSymmetry: return "NotSymmetry";
    }
    return "?";
}

SymmetryVerdict check_mu_symmetry(const PointVectorField& X, const SemibasicOneForm& mu, const EquationSystem& sys,
                                  const JetBundle& bundle, const ZeroTestConfig& cfg)
{
    const JetVectorField Y = prolong_mu(X, mu, bundle);
    SymmetryVerdict out;
    bool strong = true;
    bool restricted_ok = true;
    for (std::size_t k = 0; k < sys.equations.size(); ++k) {
        const Expr& delta = sys.equations[k];
        EquationVerdict v;
        v.raw = apply(Y, delta, bundle);
        v.raw_verdict = is_zero(v.raw, cfg);
        v.restricted = sys.solved.apply(v.raw);
        v.restricted_verdict = is_zero(v.restricted, cfg);
        if (!v.raw_verdict.zero()) strong = false;
        if (!v.restricted_verdict.zero()) restricted_ok = false;
        if (!v.raw_verdict.zero() && v.restricted_verdict.zero() && k < sys.leading.size()) {
            const Expr& L = sys.leading[k];
            Expr c = diff(delta, L);
            Expr dR = diff(v.raw, L);
            if (is_exact_zero(diff(dR, L))) {
                Expr phi = dR / c;
                if (is_exact_zero(v.raw - phi * delta)) v.factor = phi;
            }
        }
        out.equations.push_back(std::move(v));
    }
    if (strong) {
        out.classification = SymmetryClass::StrongSymmetry;
    } else if (restricted_ok) {
        out.classification = SymmetryClass::Symmetry;
    } else {
        out.classification = SymmetryClass::NotSymmetry;
    }
    return out;
}

std::vector<PreservationEntry> mu_preservation_residual(const JetVectorField& Y, const SemibasicOneForm& mu,
                                                        const JetBundle& bundle)
{
    mu.validate(bundle);
    std::vector<PreservationEntry> out;
    const int top = std::min(Y.order, bundle.order()) - 1;
    for (int a = 0; a < bundle.q(); ++a) {
        for (const MultiIndex& J : bundle.multi_indices(top)) {
            for (int i = 0; i < bundle.p(); ++i) {
                std::vector<Expr> terms{commutator_contract(Y, i, ContactForm{a, J}, bundle)};
                for (int b = 0; b < bundle.q(); ++b) {
                    Expr l = mu.entry(i, a, b);
                    if (!l.is_zero()) terms.push_back(l * contract(Y, ContactForm{b, J}, bundle));
                }
                out.push_back({a, J, i, add(std::move(terms))});
            }
        }
    }
    return out;
}

std::vector<DeterminingEquation> determining_system(const PointVectorField& X, const SemibasicOneForm& mu,
                                                    const EquationSystem& sys,
                                                    const std::vector<Expr>& ansatz_arguments,
                                                    const JetBundle& bundle)
{
    const JetVectorField Y = prolong_mu(X, mu, bundle);

    auto is_split = [&](const Expr& s) {
        if (!s.is_jet()) return false;
        return std::none_of(ansatz_arguments.begin(), ansatz_arguments.end(), [&](const Expr& a) { return a == s; });
    };
    auto has_split = [&](const Expr& e) {
        for (const Expr& s : free_symbols(e)) {
            if (is_split(s)) return true;
        }
        return false;
    };
    auto degree = [](const Expr& m) {
        Rational d(0);
        for (const Expr& f : m.kind() == Kind::Product ? m.children() : std::vector<Expr>{m}) {
            if (f.is_number()) continue;
            d += f.kind() == Kind::Power ? f.node().value : Rational(1);
        }
        return d;
    };

    std::vector<DeterminingEquation> out;
    for (const Expr& delta : sys.equations) {
        std::vector<Expr> monomials;
        ExprMap<std::vector<Expr>> coefficients;
        Expr r = sys.solved.apply(apply(Y, delta, bundle));
        for (const Expr& t : terms_of(r)) {
            auto [c, m] = split_coefficient(t);
            std::vector<Expr> factors =
                m.kind() == Kind::Product ? m.children() : (m.is_number() ? std::vector<Expr>{} : std::vector<Expr>{m});
            std::vector<Expr> mono{Expr(1)};
            std::vector<Expr> coef{Expr(c)};
            for (const Expr& f : factors) {
                if (is_split(f)) {
                    mono.push_back(f);
                } else if (f.kind() == Kind::Power && is_split(f.children()[0]) && f.node().value > 0 &&
                           f.node().value.get_den() == 1) {
                    mono.push_back(f);
                } else if (has_split(f)) {
                    throw std::invalid_argument("jet variable occurs in nonpolynomial position " + to_string(f) +
                                                "; extend the ansatz arguments");
                } else {
                    coef.push_back(f);
                }
            }
            Expr key = mul(std::move(mono));
            auto [it, inserted] = coefficients.try_emplace(key);
            if (inserted) monomials.push_back(key);
            it->second.push_back(mul(std::move(coef)));
        }
        std::sort(monomials.begin(), monomials.end(), [&](const Expr& a, const Expr& b) {
            Rational da = degree(a);
            Rational db = degree(b);
            if (da != db) return da < db;
            return compare(a, b) < 0;
        });
        for (const Expr& m : monomials) {
            Expr eq = add(coefficients[m]);
            if (!eq.is_zero()) out.push_back({m, eq});
        }
    }
    return out;
}

}  // namespace mujet
