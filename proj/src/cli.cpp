#include "mujet/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <functional>
#include <ostream>
#include <sstream>

#include "mujet/problem.hpp"

namespace mujet::cli {

namespace {

struct Options {
    std::string file;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<double> tolerance;
    std::string format = "human";

    bool mu = false;
    bool standard = false;
    std::optional<int> order;
    bool on_solution = false;
};

std::string verdict(const ZeroVerdict& v, const std::string& residual)
{
    switch (v.tier) {
    case ZeroTier::ZeroExact: return "OK(exact)";
    case ZeroTier::ZeroNumeric: return "OK(numeric, trials=" + std::to_string(v.trials) + ")";
    case ZeroTier::NonZero: break;
    }
    return "FAIL residual=" + residual;
}

class Session {
public:
    Session(const Options& opt, std::ostream& out) : opt_(opt), out_(out), p_(load_problem(opt.file))
    {
        cfg_ = p_.config;
        if (!p_.seed_in_file) {
            if (const char* env = std::getenv("MUJET_SEED")) {
                try {
                    cfg_.seed = std::stoull(env);
                } catch (const std::logic_error&) {
                    throw std::invalid_argument("MUJET_SEED must be a non-negative integer");
                }
            }
        }
        if (opt.seed) cfg_.seed = *opt.seed;
        if (opt.trials) cfg_.trials = *opt.trials;
        if (opt.tolerance) cfg_.tolerance = *opt.tolerance;
        cfg_.validate();
        po_ = p_.table.print_options();
    }

    int prolong()
    {
        if (opt_.mu && opt_.standard) throw std::invalid_argument("--mu and --standard are exclusive");
        const PointVectorField& X = need_field();
        JetBundle b = p_.bundle;
        if (opt_.order) {
            if (*opt_.order > b.order()) {
                throw OrderOverflow("requested order " + std::to_string(*opt_.order) + " exceeds the bundle order " +
                                        std::to_string(b.order()),
                                    "");
            }
            if (*opt_.order < 0) throw std::invalid_argument("--order must be non-negative");
            b = b.with_order(*opt_.order);
        }
        const bool twisted = p_.has_mu && !opt_.standard;
        const JetVectorField Y = twisted ? prolong_mu(X, p_.mu, b) : prolong_standard(X, b);
        out_ << "# " << (twisted ? "mu-prolongation" : "standard prolongation") << " of order " << b.order() << "\n";
        for (int i = 0; i < b.p(); ++i) {
            out_ << "xi^" << b.independent_names()[static_cast<std::size_t>(i)] << " = " << show(Y.xi[static_cast<std::size_t>(i)])
                 << "\n";
        }
        for (int a = 0; a < b.q(); ++a) {
            for (const MultiIndex& J : b.multi_indices(b.order())) {
                out_ << psi_label(b, a, J) << " = " << show(Y.coefficient(a, J)) << "\n";
            }
        }
        return Ok;
    }

    int check_compat()
    {
        const SemibasicOneForm& mu = need_mu();
        SubstitutionSystem rules;
        if (opt_.on_solution) rules = p_.equation_system().solved;
        const CompatReport report = compat_on_solution(mu, rules, p_.bundle, cfg_);
        const auto& names = p_.bundle.independent_names();
        for (std::size_t k = 0; k < report.entries.size(); ++k) {
            const CompatEntry& e = report.entries[k];
            std::string label = "compat(" + names[static_cast<std::size_t>(e.i)] + "," + names[static_cast<std::size_t>(e.j)] + ")";
            if (mu.is_matrix) label += "[" + std::to_string(e.row + 1) + "," + std::to_string(e.col + 1) + "]";
            line(label, report.verdicts[k], e.residual);
        }
        if (p_.gauged) {
            for (const GaugedEntry& e : gauged_residual(*p_.gauged, p_.bundle)) {
                Expr r = rules.apply(e.residual);
                line("gauged(" + names[static_cast<std::size_t>(e.i)] + "," + names[static_cast<std::size_t>(e.j)] +
                         ")[" + std::to_string(e.k + 1) + "]",
                     is_zero(r, cfg_), r);
            }
        }
        return status();
    }

    int check_symmetry()
    {
        const EquationSystem sys = p_.equation_system();
        const SymmetryVerdict v = check_mu_symmetry(need_field(), p_.mu, sys, p_.bundle, cfg_);
        for (std::size_t k = 0; k < v.equations.size(); ++k) {
            const EquationVerdict& e = v.equations[k];
            const std::string& name = p_.equations[k].name;
            line(name + " raw", e.raw_verdict, e.raw, false);
            line(name + " restricted", e.restricted_verdict, e.restricted);
            if (e.factor) out_ << name << " factor = " << show(*e.factor) << "\n";
        }
        out_ << "classification: " << to_string(v.classification) << "\n";
        return v.classification == SymmetryClass::NotSymmetry ? Fail : Ok;
    }

    int check_invariants()
    {
        if (p_.invariants.empty()) throw std::invalid_argument("problem has no [invariants]");
        const JetVectorField Y = prolong_mu(need_field(), p_.mu, p_.bundle);
        for (const auto& inv : p_.invariants) {
            const InvariantCheck c = verify_invariant(Y, inv.name, inv.value, p_.bundle, cfg_);
            line(c.name, c.verdict, c.residual);
        }
        return status();
    }

    int check_preservation()
    {
        const JetVectorField Y = prolong_mu(need_field(), p_.mu, p_.bundle);
        for (const PreservationEntry& e : mu_preservation_residual(Y, p_.mu, p_.bundle)) {
            line("theta(" + p_.bundle.jet_name(e.a, e.J) + ").d" + p_.bundle.independent_names()[static_cast<std::size_t>(e.i)],
                 is_zero(e.residual, cfg_), e.residual);
        }
        return status();
    }

    int check_solution()
    {
        if (p_.solutions.empty()) throw std::invalid_argument("problem has no [solutions]");
        std::vector<Expr> eqs;
        for (const auto& e : p_.equations) eqs.push_back(e.expr);
        const auto checks = verify_section_solution(eqs, p_.solutions, p_.bundle, cfg_);
        for (std::size_t k = 0; k < checks.size(); ++k) line(p_.equations[k].name, checks[k].verdict, checks[k].residual);
        return status();
    }

    int check_restricted()
    {
        const SubstitutionSystem rules = p_.invariant_manifold_rules();
        const auto restricted = restrict_invariants(p_.invariants, rules, p_.overrides);
        print_restricted(restricted);
        for (const auto& exp : p_.restricted_expected) {
            auto it = std::find_if(restricted.begin(), restricted.end(),
                                   [&](const RestrictedInvariant& r) { return r.name == exp.name; });
            if (it == restricted.end()) throw std::invalid_argument("no invariant named " + exp.name);
            const Expr diff = it->value - exp.value;
            line(exp.name + " matches", is_zero(diff, cfg_), diff);
        }
        return status();
    }

    int determining()
    {
        if (!p_.ansatz) throw std::invalid_argument("problem has no [ansatz]");
        const EquationSystem sys = p_.equation_system();
        const auto eqs = determining_system(*p_.ansatz, p_.mu, sys, p_.ansatz_arguments, p_.bundle);
        const bool lines = opt_.format == "lines";
        if (!lines) out_ << "# " << eqs.size() << " determining equations\n";
        for (std::size_t k = 0; k < eqs.size(); ++k) {
            if (!lines) out_ << "E" << (k + 1) << " [" << show(eqs[k].monomial) << "]: ";
            out_ << show(eqs[k].equation) << " = 0\n";
        }
        return Ok;
    }

    int reduce()
    {
        if (p_.reduce.empty()) throw std::invalid_argument("problem has no [reduce]");
        std::optional<JetTransform> jets;
        const PrintOptions tpo = p_.target_table.print_options();
        if (p_.change) {
            jets = transform_jet(*p_.change, std::min(p_.bundle.order(), 2), cfg_);
            out_ << "transformed jets:\n";
            for (const auto& [u, e] : *jets) out_ << "  " << show(u) << " = " << to_string(e, tpo) << "\n";
            const auto rt = change_round_trip_residual(*p_.change);
            for (const Expr& r : rt) line("  change round trip", is_zero(r, cfg_), r);
        }
        const SubstitutionSystem rules = p_.invariant_manifold_rules();
        out_ << "invariant manifold:\n";
        for (const Rule& r : rules.rules()) out_ << "  " << show(r.target) << " -> " << show(r.replacement) << "\n";
        const auto restricted = restrict_invariants(p_.invariants, rules, p_.overrides);
        out_ << "restricted invariants:\n";
        print_restricted(restricted, "  ");

        ExprMap<Expr> full;
        for (const auto& inv : p_.invariants) full[parameter(inv.name)] = inv.value;
        std::vector<Expr> originals;
        std::vector<Expr> reduced_eqs;
        const std::vector<std::string> names = p_.invariant_names();
        for (const auto& F : p_.reduce) {
            out_ << "reduced equation " << F.name << ":\n";
            const Expr original = replace(F.value, full);
            originals.push_back(original);
            out_ << "  original: " << show(original) << " = 0\n";
            const ReducedEquation red = reduced_equation(F.value, restricted, names, p_.change,
                                                         std::min(p_.bundle.order(), 2), cfg_);
            out_ << "  restricted: " << show(red.composed) << " = 0\n";
            if (red.reduced) {
                const Expr adapted = to_target(original, *p_.change, *jets);
                out_ << "  adapted: " << to_string(adapted, tpo) << " = 0\n";
                out_ << "  reduced: " << to_string(*red.reduced, tpo) << " = 0\n";
                line("  sigma-free", *red.sigma_free, "d/d" + p_.change->target.independent_names().back() + " != 0");
                const Expr gap = drop_parametric_derivatives(adapted, p_.change->target) - *red.reduced;
                line("  adapted consistency", is_zero(gap, cfg_), gap, true, &tpo);
                reduced_eqs.push_back(*red.reduced);
            }
        }
        if (!p_.solutions.empty()) {
            const auto checks = verify_section_solution(originals, p_.solutions, p_.bundle, cfg_);
            for (std::size_t k = 0; k < checks.size(); ++k) {
                line("solution in " + p_.reduce[k].name, checks[k].verdict, checks[k].residual);
            }
        }
        if (!p_.reduced_solutions.empty()) {
            if (reduced_eqs.empty()) throw std::invalid_argument("[reduced-solutions] needs a [change]");
            const auto checks = verify_section_solution(reduced_eqs, p_.reduced_solutions, p_.change->target, cfg_);
            for (std::size_t k = 0; k < checks.size(); ++k) {
                line("reduced solution in " + p_.reduce[k].name, checks[k].verdict, checks[k].residual, true, &tpo);
            }
        }
        return status();
    }

    void settings_header()
    {
        if (opt_.format == "lines") return;
        std::ostringstream tol;
        tol << cfg_.tolerance;
        out_ << "# zero test: seed=" << cfg_.seed << " trials=" << cfg_.trials << " tolerance=" << tol.str() << "\n";
    }

private:
    std::string show(const Expr& e) const { return to_string(e, po_); }

    static std::string psi_label(const JetBundle& b, int a, const MultiIndex& J)
    {
        std::string s = "Psi";
        if (b.q() > 1) s += "^" + b.dependent_names()[static_cast<std::size_t>(a)];
        const std::string name = b.jet_name(a, J);
        const auto us = name.find('_');
        if (us != std::string::npos) s += name.substr(us);
        return s;
    }

    void line(const std::string& label, const ZeroVerdict& v, const Expr& residual, bool counts = true,
              const PrintOptions* po = nullptr)
    {
        line(label, v, po ? to_string(residual, *po) : show(residual), counts);
    }

    void line(const std::string& label, const ZeroVerdict& v, const std::string& residual, bool counts = true)
    {
        out_ << label << ": " << verdict(v, residual) << "\n";
        if (counts && !v.zero()) failed_ = true;
    }

    void print_restricted(const std::vector<RestrictedInvariant>& restricted, const std::string& indent = "")
    {
        for (const auto& r : restricted) {
            out_ << indent << r.name << " = " << show(r.value);
            if (r.overridden) out_ << "   [override: " << r.note << "]";
            out_ << "\n";
        }
    }

    const PointVectorField& need_field() const
    {
        if (!p_.field) throw std::invalid_argument("problem has no [field]");
        return *p_.field;
    }

    const SemibasicOneForm& need_mu() const
    {
        if (!p_.has_mu) throw std::invalid_argument("problem has no [mu]");
        return p_.mu;
    }

    int status() const { return failed_ ? Fail : Ok; }

    const Options& opt_;
    std::ostream& out_;
    Problem p_;
    ZeroTestConfig cfg_;
    PrintOptions po_;
    bool failed_ = false;
};

int guarded(std::ostream& err, const std::function<int()>& body)
{
    try {
        return body();
    } catch (const OrderOverflow& e) {
        err << "error: order overflow: " << e.what() << "\n";
        return Degenerate;
    } catch (const SingularJacobian& e) {
        err << "error: singular Jacobian: " << e.what() << "\n";
        return Degenerate;
    } catch (const SingularError& e) {
        err << "error: singular substitution: " << e.what() << "\n";
        return Degenerate;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return InputError;
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    Options opt;
    CLI::App app{"Jet-space engine for mu-prolongations, mu-symmetries and symmetry reduction", "mujet"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", opt.seed, "Seed for the numeric zero test (default: $MUJET_SEED)");
    app.add_option("--trials", opt.trials, "Random trials per numeric zero test")->check(CLI::PositiveNumber);
    app.add_option("--tolerance", opt.tolerance, "Relative tolerance of the numeric zero test")
        ->check(CLI::PositiveNumber);
    app.add_option("--format", opt.format, "Report format")->check(CLI::IsMember({"human", "lines"}));

    std::function<int(Session&)> action;

    auto* prolong = app.add_subcommand("prolong", "Print the prolongation coefficients");
    prolong->add_option("file", opt.file, "Problem file")->required();
    auto* mu_flag = prolong->add_flag("--mu", opt.mu, "Use the mu-prolongation (default when [mu] is present)");
    prolong->add_flag("--standard", opt.standard, "Use the standard prolongation")->excludes(mu_flag);
    prolong->add_option("--order", opt.order, "Prolongation order (at most the bundle order)");
    prolong->callback([&] { action = [](Session& s) { return s.prolong(); }; });

    auto* check = app.add_subcommand("check", "Run verification checks");
    check->require_subcommand(1);
    auto add_check = [&](const std::string& name, const std::string& help, int (Session::*fn)()) {
        auto* c = check->add_subcommand(name, help);
        c->add_option("file", opt.file, "Problem file")->required();
        c->callback([&action, fn] {
            action = [fn](Session& s) {
                s.settings_header();
                return (s.*fn)();
            };
        });
        return c;
    };
    auto* compat = add_check("compat", "Compatibility of mu", &Session::check_compat);
    compat->add_flag("--on-solution", opt.on_solution, "Restrict to the solution manifold first");
    add_check("symmetry", "Check the field as a mu-symmetry of the equations", &Session::check_symmetry);
    add_check("invariants", "Check that the listed invariants are annihilated", &Session::check_invariants);
    add_check("preservation", "Check preservation of the contact structure up to mu", &Session::check_preservation);
    add_check("solution", "Check [solutions] against the equations", &Session::check_solution);
    add_check("restricted", "Restrict invariants to the invariant manifold", &Session::check_restricted);

    auto* det = app.add_subcommand("determining", "Print the determining equations for the ansatz");
    det->add_option("file", opt.file, "Problem file")->required();
    det->callback([&] { action = [](Session& s) { return s.determining(); }; });

    auto* red = app.add_subcommand("reduce", "Symmetry reduction report");
    red->add_option("file", opt.file, "Problem file")->required();
    red->callback([&] {
        action = [](Session& s) {
            s.settings_header();
            return s.reduce();
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Ok : InputError;
    }
    return guarded(err, [&] {
        Session session(opt, out);
        return action(session);
    });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    std::vector<const char*> argv{"mujet"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace mujet::cli
