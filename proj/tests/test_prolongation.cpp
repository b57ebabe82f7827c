#include <gtest/gtest.h>

#include <random>

#include "mujet/mu_form.hpp"
#include "mujet/parse.hpp"
#include "mujet/problem.hpp"
#include "mujet/prolongation.hpp"
#include "mujet/symmetry.hpp"
#include "mujet/zero_test.hpp"
#include "support.hpp"

using namespace mujet;
using namespace mujet::testing;

namespace {

struct Ex1 {
    SymbolTable table;
    JetBundle bundle;
    PointVectorField X;
    SemibasicOneForm mu;
};

Ex1 ex1(int order = 2)
{
    Ex1 e;
    e.bundle = xt_bundle(order);
    e.table = SymbolTable(e.bundle);
    e.table.add_parameter("lambda");
    e.X = {{parse("x", e.table), parse("2*t", e.table)}, {parse("u", e.table)}};
    e.mu = SemibasicOneForm::from_scalar({parse("lambda", e.table), Expr(0)});
    return e;
}

void expect_tables_equal(const JetVectorField& a, const JetVectorField& b, const JetBundle& bundle)
{
    for (int q = 0; q < bundle.q(); ++q)
        for (const auto& J : bundle.multi_indices(bundle.order()))
            EXPECT_TRUE(is_exact_zero(a.coefficient(q, J) - b.coefficient(q, J))) << bundle.jet_name(q, J);
}

// prolong_mu - prolong_standard - difference_terms, coefficientwise.
void expect_difference_identity(const PointVectorField& X, const SemibasicOneForm& mu, const JetBundle& b)
{
    auto Y = prolong_mu(X, mu, b);
    auto S = prolong_standard(X, b);
    auto F = difference_terms(X, mu, b);
    for (int a = 0; a < b.q(); ++a)
        for (const auto& J : b.multi_indices(b.order()))
            ASSERT_TRUE(is_exact_zero(Y.coefficient(a, J) - S.coefficient(a, J) - F.coefficient(a, J)))
                << b.jet_name(a, J);
}

}  // namespace

TEST(Prolongation, Ex1MatchesOracle)
{
    auto e = ex1();
    auto oracle = oracle_values();
    auto Y = prolong_mu(e.X, e.mu, e.bundle);
    for (const char* J : {"x", "t", "xx", "xt", "tt"}) {
        auto idx = *e.bundle.parse_suffix(J);
        Expr expected = parse(oracle.at(std::string("ex1.Psi_") + J), e.table);
        EXPECT_EQ(is_zero(Y.coefficient(0, idx) - expected).tier, ZeroTier::ZeroExact) << J;
    }
    Expr paper_xt = parse("-2*u_xt - lambda*(x*u_xt + 2*t*u_tt + u_t)", e.table);
    EXPECT_TRUE(is_exact_zero(Y.coefficient(0, {1, 1}) - paper_xt));
    Expr paper_x = parse("lambda*(u - x*u_x - 2*t*u_t)", e.table);
    EXPECT_TRUE(is_exact_zero(Y.coefficient(0, {1, 0}) - paper_x));
}

TEST(Prolongation, StandardExamples)
{
    auto e = ex1();
    auto S = prolong_standard(e.X, e.bundle);
    EXPECT_EQ(S.coefficient(0, {0, 1}), parse("-u_t", e.table));
    EXPECT_EQ(S.coefficient(0, {0, 2}), parse("-3*u_tt", e.table));
    PointVectorField dx{{Expr(1), Expr(0)}, {Expr(0)}};
    auto T = prolong_standard(dx, e.bundle);
    for (const auto& J : e.bundle.multi_indices(2)) EXPECT_TRUE(T.coefficient(0, J).is_zero());
    PointVectorField scale{{Expr(0), Expr(0)}, {parse("u", e.table)}};
    auto U = prolong_standard(scale, e.bundle);
    for (const auto& J : e.bundle.multi_indices(2)) EXPECT_EQ(U.coefficient(0, J), e.bundle.jet(0, J));
}

TEST(Prolongation, ZeroMuIsStandard)
{
    auto b = xt_bundle(3);
    std::mt19937_64 rng(31);
    for (int n = 0; n < 5; ++n) {
        auto X = random_field(rng, b);
        expect_tables_equal(prolong_mu(X, SemibasicOneForm::zero(2), b), prolong_standard(X, b), b);
    }
}

TEST(Prolongation, ClosedFormCrossCheck)
{
    // Psi_J = D_J Q + xi^i u_{J,i}
    auto b = xt_bundle(3);
    std::mt19937_64 rng(32);
    for (int n = 0; n < 10; ++n) {
        auto X = random_field(rng, b);
        auto S = prolong_standard(X, b);
        Expr Q = characteristic(X, b)[0];
        for (const auto& J : b.multi_indices(3)) {
            Expr closed = total_derivative_multi(Q, J, b);
            for (int i = 0; i < 2; ++i) closed += X.xi[static_cast<std::size_t>(i)] * b.jet(0, plus_unit(J, i));
            ASSERT_TRUE(is_exact_zero(S.coefficient(0, J) - closed)) << b.jet_name(0, J);
        }
    }
}

TEST(Prolongation, Characteristic)
{
    auto e = ex1();
    EXPECT_EQ(characteristic(e.X, e.bundle)[0], parse("u - x*u_x - 2*t*u_t", e.table));
    PointVectorField dx{{Expr(1), Expr(0)}, {Expr(0)}};
    EXPECT_EQ(characteristic(dx, e.bundle)[0], parse("-u_x", e.table));
    PointVectorField ex4{{parse("x", e.table), Expr(0)}, {parse("u", e.table)}};
    EXPECT_EQ(characteristic(ex4, e.bundle)[0], parse("u - x*u_x", e.table));
}

TEST(Prolongation, DifferenceTerms)
{
    auto e = ex1();
    auto oracle = oracle_values();
    auto F = difference_terms(e.X, e.mu, e.bundle);
    Expr Q = characteristic(e.X, e.bundle)[0];
    EXPECT_TRUE(F.coefficient(0, {0, 0}).is_zero());
    EXPECT_TRUE(is_exact_zero(F.coefficient(0, {1, 0}) - parse("lambda", e.table) * Q));
    EXPECT_TRUE(F.coefficient(0, {0, 1}).is_zero());
    EXPECT_TRUE(is_exact_zero(F.coefficient(0, {2, 0}) - parse(oracle.at("ex1.F_xx"), e.table)));
    Expr by_hand = parse("-2*lambda*(x*u_xx + 2*t*u_xt) + lambda^2*(u - x*u_x - 2*t*u_t)", e.table);
    EXPECT_TRUE(is_exact_zero(F.coefficient(0, {2, 0}) - by_hand));
    auto Z = difference_terms(e.X, SemibasicOneForm::zero(2), e.bundle);
    for (const auto& J : e.bundle.multi_indices(2)) EXPECT_TRUE(Z.coefficient(0, J).is_zero());
}

TEST(Prolongation, DifferenceIdentityRandomScalar)
{
    auto b = xt_bundle(3);
    std::mt19937_64 rng(33);
    for (int n = 0; n < 30; ++n) expect_difference_identity(random_field(rng, b), random_scalar_mu(rng, b), b);
}

TEST(Prolongation, DifferenceIdentityRandomMatrix)
{
    auto b = xy_uv_bundle(2);
    std::mt19937_64 rng(34);
    for (int n = 0; n < 30; ++n) expect_difference_identity(random_field(rng, b), random_matrix_mu(rng, b), b);
}

TEST(Prolongation, DifferenceIdentityExamples)
{
    for (const char* name : {"scalar_ex1", "scalar_ex2", "scalar_ex3", "scalar_ex4", "systems_ex1", "systems_ex2", "euler"}) {
        auto p = load_problem(problem_path(name));
        expect_difference_identity(*p.field, p.mu, p.bundle);
    }
}

TEST(Prolongation, StandardPreservesContact)
{
    auto b = xt_bundle(3);
    std::mt19937_64 rng(35);
    for (int n = 0; n < 50; ++n) {
        auto Y = prolong_standard(random_field(rng, b), b);
        for (const auto& J : b.multi_indices(2))
            for (int i = 0; i < 2; ++i) ASSERT_TRUE(is_exact_zero(commutator_contract(Y, i, {0, J}, b)));
    }
}

TEST(Prolongation, ScalarMuTwistsContact)
{
    auto b = xt_bundle(3);
    std::mt19937_64 rng(36);
    for (int n = 0; n < 20; ++n) {
        auto mu = exact_from_potential(random_poly(rng, point_symbols(b), 3, 2), b);
        auto Y = prolong_mu(random_field(rng, b), mu, b);
        for (const auto& J : b.multi_indices(2))
            for (int i = 0; i < 2; ++i)
                ASSERT_TRUE(is_exact_zero(commutator_contract(Y, i, {0, J}, b) +
                                          mu.scalar[static_cast<std::size_t>(i)] * contract(Y, {0, J}, b)));
    }
}

TEST(Prolongation, InvariantManifoldExamples)
{
    auto e = ex1();
    PointVectorField dx{{Expr(1), Expr(0)}, {Expr(0)}};
    auto eqs = invariant_manifold(dx, e.bundle);
    ASSERT_EQ(eqs.size(), 3u);
    EXPECT_EQ(eqs[0].expr, parse("-u_x", e.table));
    EXPECT_EQ(eqs[1].expr, parse("-u_xx", e.table));
    EXPECT_EQ(eqs[2].expr, parse("-u_xt", e.table));

    auto sys1 = load_problem(problem_path("systems_ex1"));
    SymbolTable st(sys1.bundle);
    auto rules = sys1.invariant_manifold_rules();
    EXPECT_TRUE(is_exact_zero(rules.apply(parse("u_y", st)) - parse("(u - x*u_x)/(2*y)", st)));
    EXPECT_TRUE(is_exact_zero(rules.apply(parse("v_yy", st)) - rules.apply(parse("-(x*v_xy)/(2*y)", st))));

    auto ex3 = load_problem(problem_path("scalar_ex3"));
    SymbolTable t3(ex3.bundle);
    EXPECT_TRUE(is_exact_zero(ex3.invariant_manifold_rules().apply(parse("u_t", t3)) - parse("(t/x)*u_x", t3)));
}

TEST(Prolongation, SolveForRejectsZeroCoefficient)
{
    auto e = ex1();
    EXPECT_THROW(solve_for(parse("u_x - x", e.table), parse("u_t", e.table)), std::invalid_argument);
    Rule r = solve_for(parse("2*t*u_t - u", e.table), parse("u_t", e.table));
    EXPECT_EQ(r.replacement, parse("u/(2*t)", e.table));
}

TEST(Prolongation, EvolutionaryIdentity)
{
    auto e = ex1();
    PointVectorField dx{{Expr(1), Expr(0)}, {Expr(0)}};
    for (const auto& r : evolutionary_identity_residual(dx, e.bundle)) EXPECT_TRUE(is_exact_zero(r));
    for (const auto& r : evolutionary_identity_residual(e.X, e.bundle)) EXPECT_TRUE(is_exact_zero(r));
    PointVectorField gen{{parse("u", e.table), Expr(0)}, {parse("x*u", e.table)}, true, 0};
    for (const auto& r : evolutionary_identity_residual(gen, e.bundle)) EXPECT_TRUE(is_exact_zero(r));
    PointVectorField gen1{{parse("u_t", e.table), Expr(0)}, {Expr(0)}, true, 1};
    for (const auto& r : evolutionary_identity_residual(gen1, e.bundle.with_order(3))) EXPECT_TRUE(is_exact_zero(r));
}

TEST(Prolongation, FieldValidation)
{
    auto e = ex1();
    PointVectorField bad{{parse("u_x", e.table), Expr(0)}, {Expr(0)}};
    EXPECT_THROW(bad.validate(e.bundle), std::invalid_argument);
    bad.generalized = true;
    bad.source_order = 1;
    EXPECT_NO_THROW(bad.validate(e.bundle));
    PointVectorField short_xi{{Expr(1)}, {Expr(0)}};
    EXPECT_THROW(short_xi.validate(e.bundle), std::invalid_argument);
}

namespace {

// mu- and standard prolongation agree coefficientwise once the I_X rules are imposed.
void expect_agree_on_manifold(const PointVectorField& X, const SemibasicOneForm& mu, const SubstitutionSystem& rules,
                              const JetBundle& b, bool exact)
{
    auto Y = prolong_mu(X, mu, b);
    auto S = prolong_standard(X, b);
    for (int a = 0; a < b.q(); ++a)
        for (const auto& J : b.multi_indices(b.order())) {
            Expr r = rules.apply(Y.coefficient(a, J) - S.coefficient(a, J));
            auto v = is_zero(r);
            if (exact)
                ASSERT_EQ(v.tier, ZeroTier::ZeroExact) << b.jet_name(a, J);
            else
                ASSERT_TRUE(v.zero()) << b.jet_name(a, J) << " " << r.str();
        }
}

}  // namespace

TEST(Prolongation, CoincideOnInvariantManifoldExamples)
{
    for (const char* name : {"scalar_ex1", "systems_ex1"}) {
        auto p = load_problem(problem_path(name));
        expect_agree_on_manifold(*p.field, p.mu, p.invariant_manifold_rules(), p.bundle, true);
    }
}

TEST(Prolongation, CoincideOnInvariantManifoldRandom)
{
    auto b = xt_bundle(2);
    std::mt19937_64 rng(37);
    auto lead = std::vector<Expr>{b.jet(0, {0, 1}), b.jet(0, {1, 1}), b.jet(0, {0, 2})};
    std::uniform_int_distribution<int> c(1, 3);
    for (int n = 0; n < 20; ++n) {
        auto X = random_field(rng, b);
        // constant xi^t keeps the solved rules polynomial
        X.xi[1] = Expr(c(rng));
        auto mu = random_scalar_mu(rng, b);
        auto rules = solve_invariant_manifold(invariant_manifold(X, b), lead, b);
        expect_agree_on_manifold(X, mu, rules, b, true);
    }
}

TEST(Prolongation, InvariantManifoldIsInvariant)
{
    auto p = load_problem(problem_path("scalar_ex1"));
    auto Y = prolong_mu(*p.field, p.mu, p.bundle);
    auto rules = p.invariant_manifold_rules();
    Expr Q = characteristic(*p.field, p.bundle)[0];
    for (const auto& J : p.bundle.multi_indices(p.bundle.order() - 1))
        EXPECT_TRUE(is_exact_zero(rules.apply(apply(Y, total_derivative_multi(Q, J, p.bundle), p.bundle))))
            << p.bundle.jet_name(0, J);
}
