#include "mujet/mu_form.hpp"

#include <algorithm>

namespace mujet {

namespace {

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

}  // namespace

std::vector<CompatEntry> compat_residual(const SemibasicOneForm& mu, const JetBundle& bundle)
{
    mu.validate(bundle);
    std::vector<CompatEntry> out;
    const int p = bundle.p();
    if (!mu.is_matrix) {
        for (int i = 0; i < p; ++i) {
            for (int j = i + 1; j < p; ++j) {
                Expr r = total_derivative(mu.scalar[sz(j)], i, bundle) - total_derivative(mu.scalar[sz(i)], j, bundle);
                out.push_back({i, j, 0, 0, r});
            }
        }
        return out;
    }
    const int q = bundle.q();
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            const ExprMatrix& Li = mu.matrices[sz(i)];
            const ExprMatrix& Lj = mu.matrices[sz(j)];
            ExprMatrix bracket = matrix_sub(matrix_mul(Li, Lj), matrix_mul(Lj, Li));
            for (int a = 0; a < q; ++a) {
                for (int b = 0; b < q; ++b) {
                    Expr r = add({total_derivative(Lj[sz(a)][sz(b)], i, bundle),
                                  -total_derivative(Li[sz(a)][sz(b)], j, bundle), bracket[sz(a)][sz(b)]});
                    out.push_back({i, j, a, b, r});
                }
            }
        }
    }
    return out;
}

bool CompatReport::ok() const
{
    return std::all_of(verdicts.begin(), verdicts.end(), [](const ZeroVerdict& v) { return v.zero(); });
}

CompatReport check_compat(const SemibasicOneForm& mu, const JetBundle& bundle, const ZeroTestConfig& cfg)
{
    return compat_on_solution(mu, SubstitutionSystem(), bundle, cfg);
}

CompatReport compat_on_solution(const SemibasicOneForm& mu, const SubstitutionSystem& rules, const JetBundle& bundle,
                                const ZeroTestConfig& cfg)
{
    CompatReport report;
    for (CompatEntry e : compat_residual(mu, bundle)) {
        e.residual = rules.apply(e.residual);
        report.verdicts.push_back(is_zero(e.residual, cfg));
        report.entries.push_back(std::move(e));
    }
    return report;
}

std::vector<Expr> nabla_commutator(const SemibasicOneForm& mu, const std::vector<Expr>& f, const JetBundle& bundle)
{
    const int p = bundle.p();
    const int q = bundle.q();
    auto nabla = [&](int i, const std::vector<Expr>& g) {
        std::vector<Expr> r;
        for (int a = 0; a < q; ++a) {
            std::vector<Expr> terms{total_derivative_unbounded(g[sz(a)], i, bundle)};
            for (int b = 0; b < q; ++b) terms.push_back(mu.entry(i, a, b) * g[sz(b)]);
            r.push_back(add(std::move(terms)));
        }
        return r;
    };
    std::vector<Expr> out;
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            auto ij = nabla(i, nabla(j, f));
            auto ji = nabla(j, nabla(i, f));
            for (int a = 0; a < q; ++a) out.push_back(ij[sz(a)] - ji[sz(a)]);
        }
    }
    return out;
}

SemibasicOneForm exact_from_potential(const Expr& P, const JetBundle& bundle)
{
    if (max_jet_order(P) > 0) throw std::invalid_argument("potential must depend on (x, u) only");
    std::vector<Expr> lambda;
    for (int i = 0; i < bundle.p(); ++i) lambda.push_back(total_derivative(P, i, bundle));
    return SemibasicOneForm::from_scalar(std::move(lambda), 1);
}

void GaugedAlgebraSpec::validate(const JetBundle& bundle) const
{
    const std::size_t r = generators.size();
    const int q = bundle.q();
    for (const auto& L : generators) {
        if (static_cast<int>(L.size()) != q) throw std::invalid_argument("generator must be q x q");
        for (const auto& row : L) {
            if (static_cast<int>(row.size()) != q) throw std::invalid_argument("generator must be q x q");
        }
    }
    if (structure.size() != r) throw std::invalid_argument("structure constants must be r x r x r");
    for (const auto& plane : structure) {
        if (plane.size() != r) throw std::invalid_argument("structure constants must be r x r x r");
        for (const auto& line : plane) {
            if (line.size() != r) throw std::invalid_argument("structure constants must be r x r x r");
        }
    }
    if (static_cast<int>(coefficients.size()) != bundle.p()) {
        throw std::invalid_argument("need gauged coefficients for every independent variable");
    }
    for (const auto& c : coefficients) {
        if (c.size() != r) throw std::invalid_argument("need one coefficient per generator");
    }
    for (std::size_t a = 0; a < r; ++a) {
        for (std::size_t b = 0; b < r; ++b) {
            ExprMatrix lhs = matrix_sub(matrix_mul(generators[a], generators[b]), matrix_mul(generators[b], generators[a]));
            ExprMatrix rhs = zero_matrix(q);
            for (std::size_t k = 0; k < r; ++k) {
                rhs = matrix_add(rhs, matrix_scale(generators[k], Expr(structure[a][b][k])));
            }
            ExprMatrix diff = matrix_sub(lhs, rhs);
            for (const auto& row : diff) {
                for (const auto& e : row) {
                    if (!is_exact_zero(e)) {
                        throw std::invalid_argument("structure-constant mismatch for [L_" + std::to_string(a + 1) +
                                                    ", L_" + std::to_string(b + 1) + "]");
                    }
                }
            }
        }
    }
}

SemibasicOneForm GaugedAlgebraSpec::assemble() const
{
    std::vector<ExprMatrix> lambda;
    const int q = generators.empty() ? 0 : static_cast<int>(generators.front().size());
    for (const auto& ci : coefficients) {
        ExprMatrix m = zero_matrix(q);
        for (std::size_t k = 0; k < generators.size(); ++k) m = matrix_add(m, matrix_scale(generators[k], ci[k]));
        lambda.push_back(std::move(m));
    }
    return SemibasicOneForm::from_matrices(std::move(lambda));
}

std::vector<GaugedEntry> gauged_residual(const GaugedAlgebraSpec& spec, const JetBundle& bundle)
{
    spec.validate(bundle);
    const int p = bundle.p();
    const std::size_t r = spec.generators.size();
    std::vector<GaugedEntry> out;
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            for (std::size_t k = 0; k < r; ++k) {
                std::vector<Expr> terms{total_derivative(spec.coefficients[sz(j)][k], i, bundle),
                                        -total_derivative(spec.coefficients[sz(i)][k], j, bundle)};
                for (std::size_t a = 0; a < r; ++a) {
                    for (std::size_t b = 0; b < r; ++b) {
                        const Rational& c = spec.structure[a][b][k];
                        if (c == 0) continue;
                        terms.push_back(mul({Expr(c), spec.coefficients[sz(i)][a], spec.coefficients[sz(j)][b]}));
                    }
                }
                out.push_back({i, j, static_cast<int>(k), add(std::move(terms))});
            }
        }
    }
    return out;
}

ExponentialFactorReport exponential_factor_check(const PointVectorField& X0, const Expr& P, const EquationSystem& sys,
                                                 const JetBundle& bundle, const ZeroTestConfig& cfg)
{
    ExponentialFactorReport report;
    report.mu_symmetry = check_mu_symmetry(X0, exact_from_potential(P, bundle), sys, bundle, cfg);
    PointVectorField X = X0;
    Expr factor = exp(P);
    for (auto& e : X.xi) e = factor * e;
    for (auto& e : X.phi) e = factor * e;
    report.rescaled_symmetry = check_mu_symmetry(X, SemibasicOneForm::zero(bundle.p()), sys, bundle, cfg);
    return report;
}

}  // namespace mujet
