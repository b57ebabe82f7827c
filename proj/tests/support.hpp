#ifndef MUJET_TESTS_SUPPORT_HPP
#define MUJET_TESTS_SUPPORT_HPP

#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mujet/expr.hpp"
#include "mujet/jet_space.hpp"
#include "mujet/parse.hpp"
#include "mujet/prolongation.hpp"

#ifndef MUJET_SOURCE_DIR
#define MUJET_SOURCE_DIR "."
#endif

namespace mujet::testing {

inline std::string source_path(const std::string& relative)
{
    return std::string(MUJET_SOURCE_DIR) + "/" + relative;
}

inline std::string problem_path(const std::string& name)
{
    return source_path("problems/" + name + ".mujet");
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Frozen values from tests/oracle/derive_values.py, "name: expr" per line.
inline std::map<std::string, std::string> oracle_values()
{
    std::map<std::string, std::string> values;
    std::istringstream in(read_file(source_path("tests/data/oracle_values.txt")));
    std::string line;
    while (std::getline(in, line)) {
        auto colon = line.find(": ");
        if (line.empty() || line[0] == '#' || colon == std::string::npos) continue;
        values[line.substr(0, colon)] = line.substr(colon + 2);
    }
    return values;
}

/// Random polynomial with small rational coefficients in the given symbols.
inline Expr random_poly(std::mt19937_64& rng, const std::vector<Expr>& vars, int terms, int degree)
{
    std::uniform_int_distribution<int> coef(-5, 5);
    std::uniform_int_distribution<int> den(1, 3);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(vars.size()) - 1);
    std::uniform_int_distribution<int> deg(0, degree);
    std::vector<Expr> sum;
    for (int n = 0; n < terms; ++n) {
        int c = coef(rng);
        if (c == 0) c = 1;
        std::vector<Expr> factors{Expr(Rational(c, den(rng)))};
        int d = deg(rng);
        for (int m = 0; m < d; ++m) factors.push_back(vars[static_cast<std::size_t>(pick(rng))]);
        sum.push_back(mul(factors));
    }
    return add(sum);
}

/// Point symbols (x, u) of a bundle.
inline std::vector<Expr> point_symbols(const JetBundle& b)
{
    std::vector<Expr> v;
    for (int i = 0; i < b.p(); ++i) v.push_back(b.x(i));
    for (int a = 0; a < b.q(); ++a) v.push_back(b.u(a));
    return v;
}

/// Point symbols plus first-order jets.
inline std::vector<Expr> first_order_symbols(const JetBundle& b)
{
    auto v = point_symbols(b);
    for (int a = 0; a < b.q(); ++a)
        for (int i = 0; i < b.p(); ++i) v.push_back(b.jet(a, unit_index(b.p(), i)));
    return v;
}

inline PointVectorField random_field(std::mt19937_64& rng, const JetBundle& b)
{
    auto vars = point_symbols(b);
    PointVectorField X;
    for (int i = 0; i < b.p(); ++i) X.xi.push_back(random_poly(rng, vars, 2, 2));
    for (int a = 0; a < b.q(); ++a) X.phi.push_back(random_poly(rng, vars, 3, 2));
    return X;
}

inline SemibasicOneForm random_scalar_mu(std::mt19937_64& rng, const JetBundle& b)
{
    auto vars = first_order_symbols(b);
    std::vector<Expr> lambda;
    for (int i = 0; i < b.p(); ++i) lambda.push_back(random_poly(rng, vars, 2, 2));
    return SemibasicOneForm::from_scalar(lambda);
}

inline SemibasicOneForm random_matrix_mu(std::mt19937_64& rng, const JetBundle& b)
{
    auto vars = point_symbols(b);
    std::vector<ExprMatrix> lambda;
    for (int i = 0; i < b.p(); ++i) {
        ExprMatrix m = zero_matrix(b.q());
        for (auto& row : m)
            for (auto& e : row) e = random_poly(rng, vars, 2, 1);
        lambda.push_back(m);
    }
    return SemibasicOneForm::from_matrices(lambda);
}

inline JetBundle xt_bundle(int order) { return JetBundle({"x", "t"}, {"u"}, order); }
inline JetBundle xy_uv_bundle(int order) { return JetBundle({"x", "y"}, {"u", "v"}, order); }

}  // namespace mujet::testing

#endif
