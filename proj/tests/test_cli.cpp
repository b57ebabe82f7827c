#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "golden.hpp"
#include "mujet/problem.hpp"

using namespace mujet;
using namespace mujet::testing;

namespace {

class TempFile {
public:
    explicit TempFile(const std::string& text)
    {
        path_ = (std::filesystem::temp_directory_path() / ("mujet_test_" + std::to_string(counter_++) + ".mujet")).string();
        std::ofstream(path_) << text;
    }
    ~TempFile() { std::remove(path_.c_str()); }
    const std::string& path() const { return path_; }

private:
    static inline int counter_ = 0;
    std::string path_;
};

const char* kHeatFile = R"(mujet 1
[bundle]
independent = x, t
dependent = u
order = 2
[equations]
Delta = u_t - u_xx | u_t
[field]
xi_x = 1
xi_t = 0
phi_u = 0
)";

}  // namespace

class Golden : public ::testing::TestWithParam<GoldenCase> {};

TEST_P(Golden, MatchesFile)
{
    const GoldenCase& c = GetParam();
    RunResult r = run_golden(c);
    if (std::getenv("MUJET_UPDATE_GOLDEN")) std::ofstream(c.golden_path()) << r.out;
    EXPECT_EQ(r.exit_code, c.exit_code) << r.err;
    EXPECT_TRUE(r.err.empty()) << r.err;
    EXPECT_EQ(r.out, read_file(c.golden_path()));
}

INSTANTIATE_TEST_SUITE_P(Cli, Golden, ::testing::ValuesIn(golden_cases()),
                         [](const ::testing::TestParamInfo<GoldenCase>& info) {
                             std::string n = info.param.name();
                             for (char& ch : n)
                                 if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
                             return n;
                         });

TEST(Cli, EveryProblemHasGoldenCoverage)
{
    auto cases = golden_cases();
    for (const auto& entry : std::filesystem::directory_iterator(source_path("problems"))) {
        std::string stem = entry.path().stem().string();
        bool covered = std::any_of(cases.begin(), cases.end(), [&](const GoldenCase& c) { return c.problem == stem; });
        EXPECT_TRUE(covered) << stem;
    }
}

TEST(Cli, Deterministic)
{
    for (const auto& c : golden_cases()) {
        RunResult a = run_golden(c);
        RunResult b = run_golden(c);
        ASSERT_EQ(a.out, b.out) << c.name();
    }
}

TEST(Cli, SeedPrecedence)
{
    std::string file = problem_path("euler");
    unsetenv("MUJET_SEED");
    EXPECT_NE(run_cli({"check", "compat", file}).out.find("seed=20240611"), std::string::npos);
    setenv("MUJET_SEED", "77", 1);
    EXPECT_NE(run_cli({"check", "compat", file}).out.find("seed=77"), std::string::npos);
    EXPECT_NE(run_cli({"--seed", "5", "check", "compat", file}).out.find("seed=5 "), std::string::npos);
    TempFile seeded(std::string(kHeatFile) + "[config]\nseed = 31\n");
    EXPECT_NE(run_cli({"check", "symmetry", seeded.path()}).out.find("seed=31 "), std::string::npos);
    EXPECT_NE(run_cli({"--seed", "6", "check", "symmetry", seeded.path()}).out.find("seed=6 "), std::string::npos);
    setenv("MUJET_SEED", "banana", 1);
    EXPECT_EQ(run_cli({"check", "compat", file}).exit_code, cli::InputError);
    unsetenv("MUJET_SEED");
}

TEST(Cli, TrialsAndTolerance)
{
    auto r = run_cli({"--trials", "4", "--tolerance", "1e-6", "check", "restricted", problem_path("scalar_ex3")});
    EXPECT_EQ(r.exit_code, cli::Ok);
    EXPECT_NE(r.out.find("trials=4 tolerance=1e-06"), std::string::npos);
    EXPECT_EQ(run_cli({"--trials", "0", "check", "compat", problem_path("euler")}).exit_code, cli::InputError);
}

TEST(Cli, ExitCodes)
{
    EXPECT_EQ(run_cli({"--help"}).exit_code, cli::Ok);
    EXPECT_EQ(run_cli({}).exit_code, cli::InputError);
    EXPECT_EQ(run_cli({"frobnicate"}).exit_code, cli::InputError);
    EXPECT_EQ(run_cli({"prolong", "/nonexistent/file.mujet"}).exit_code, cli::InputError);
    EXPECT_EQ(run_cli({"prolong", "--order", "3", problem_path("scalar_ex1")}).exit_code, cli::Degenerate);
    EXPECT_EQ(run_cli({"prolong", "--mu", "--standard", problem_path("scalar_ex1")}).exit_code, cli::InputError);
    EXPECT_EQ(run_cli({"determining", problem_path("scalar_ex1")}).exit_code, cli::InputError);
    EXPECT_EQ(run_cli({"--format", "xml", "prolong", problem_path("scalar_ex1")}).exit_code, cli::InputError);

    TempFile bad_header("mujet 2\n[bundle]\nindependent = x\ndependent = u\norder = 1\n");
    auto r = run_cli({"prolong", bad_header.path()});
    EXPECT_EQ(r.exit_code, cli::InputError);
    EXPECT_NE(r.err.find("line 1"), std::string::npos);

    TempFile undeclared(std::string(kHeatFile) + "[invariants]\nz = q*x\n");
    r = run_cli({"check", "invariants", undeclared.path()});
    EXPECT_EQ(r.exit_code, cli::InputError);
    EXPECT_NE(r.err.find("line 13"), std::string::npos) << r.err;

    TempFile singular(std::string(kHeatFile) + R"([invariants]
tee = t
[reduce]
F = tee
[change]
target-independent = y, s
target-dependent = v
forward y = t
forward s = x
forward v = u
inverse x = y
inverse t = y
inverse u = v
)");
    r = run_cli({"reduce", singular.path()});
    EXPECT_EQ(r.exit_code, cli::Degenerate);
    EXPECT_NE(r.err.find("singular Jacobian"), std::string::npos) << r.err;

    auto ex4 = read_file(problem_path("scalar_ex4"));
    auto pos = ex4.find("[restricted-override]");
    ASSERT_NE(pos, std::string::npos);
    auto end = ex4.find("\n\n", pos);
    TempFile no_override(ex4.substr(0, pos) + ex4.substr(end + 2));
    r = run_cli({"check", "restricted", no_override.path()});
    EXPECT_EQ(r.exit_code, cli::Degenerate) << r.err;
}

TEST(Cli, ProlongTable)
{
    auto r = run_cli({"prolong", problem_path("scalar_ex1")});
    EXPECT_EQ(r.exit_code, cli::Ok);
    auto p = load_problem(problem_path("scalar_ex1"));
    std::istringstream in(r.out);
    std::string line;
    bool found = false;
    while (std::getline(in, line)) {
        if (line.rfind("Psi_xt = ", 0) != 0) continue;
        found = true;
        Expr got = parse(line.substr(9), p.table);
        EXPECT_TRUE(is_exact_zero(got - parse("-2*u_xt - lambda*(x*u_xt + 2*t*u_tt + u_t)", p.table)));
    }
    EXPECT_TRUE(found);
    auto s = run_cli({"prolong", problem_path("trivial_heat")});
    EXPECT_NE(s.out.find("# standard prolongation"), std::string::npos);
}

TEST(Cli, DeterminingLinesParse)
{
    auto r = run_cli({"--format", "lines", "determining", problem_path("heat")});
    auto p = load_problem(problem_path("heat"));
    std::istringstream in(r.out);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ASSERT_EQ(line.substr(line.size() - 4), " = 0");
        EXPECT_NO_THROW(parse(line.substr(0, line.size() - 4), p.table)) << line;
        ++n;
    }
    EXPECT_EQ(n, 9);
}

TEST(ProblemFile, Errors)
{
    EXPECT_THROW(parse_problem("[bundle]\n"), ProblemError);
    EXPECT_THROW(parse_problem("mujet 1\n[field]\nxi_x = 1\n"), ProblemError);
    EXPECT_THROW(parse_problem(std::string(kHeatFile) + "[field]\nxi_x = 1\n"), ProblemError);
    EXPECT_THROW(parse_problem(std::string(kHeatFile) + "[nonsense]\n"), ProblemError);
    EXPECT_THROW(parse_problem(std::string(kHeatFile) + "[restricted-override]\nz = u | \n"), ProblemError);
    EXPECT_NO_THROW(parse_problem(std::string(kHeatFile) + "# trailing comment\n"));
}

TEST(ProblemFile, Sections)
{
    auto p = load_problem(problem_path("systems_ex2"));
    EXPECT_EQ(p.bundle.p(), 2);
    EXPECT_EQ(p.bundle.q(), 2);
    EXPECT_TRUE(p.mu.is_matrix);
    EXPECT_EQ(p.invariants.size(), 13u);
    EXPECT_EQ(p.manifold_leading.size(), 6u);
    ASSERT_TRUE(p.change.has_value());
    EXPECT_EQ(p.change->target.independent_names().back(), "sigma");
    EXPECT_EQ(p.reduce.size(), 2u);
    auto h = load_problem(problem_path("heat"));
    EXPECT_TRUE(h.potential.has_value());
    EXPECT_EQ(h.solved.size(), 2u);
    ASSERT_TRUE(h.ansatz.has_value());
    ASSERT_EQ(h.ansatz_arguments.size(), 1u);
    EXPECT_EQ(h.ansatz_arguments[0], h.bundle.u(0));
    auto e = load_problem(problem_path("scalar_ex4"));
    EXPECT_EQ(e.overrides.count("zeta1"), 1u);
}
