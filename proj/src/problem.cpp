#include "mujet/problem.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace mujet {

namespace {

struct Entry {
    int line = 0;
    std::string key;
    std::string value;
    bool has_value = false;
};

struct Section {
    int line = 0;
    std::string name;
    std::vector<Entry> entries;
};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Splits at `sep` outside of brackets.
std::vector<std::string> split_top(const std::string& s, char sep)
{
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (c == sep && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    for (auto& item : split_top(s, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<Section> split_sections(const std::string& text)
{
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    bool header = false;
    std::vector<Section> sections;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (!header) {
            if (s != "mujet 1") throw ProblemError(line, "expected header line \"mujet 1\"");
            header = true;
            continue;
        }
        if (s.front() == '[' && s.back() == ']' && s.find('=') == std::string::npos) {
            sections.push_back({line, trim(s.substr(1, s.size() - 2)), {}});
            continue;
        }
        if (sections.empty()) throw ProblemError(line, "entry outside of a section");
        Entry e;
        e.line = line;
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            e.key = s;
        } else {
            e.key = trim(s.substr(0, eq));
            e.value = trim(s.substr(eq + 1));
            e.has_value = true;
        }
        sections.back().entries.push_back(std::move(e));
    }
    if (!header) throw ProblemError(0, "empty problem file");
    return sections;
}

Expr parse_at(const std::string& text, const SymbolTable& table, int line)
{
    if (text.empty()) throw ProblemError(line, "missing expression");
    try {
        return parse(text, table);
    } catch (const ParseError& e) {
        throw ProblemError(line, std::string(e.what()) + " in \"" + text + "\"");
    } catch (const SingularError& e) {
        throw ProblemError(line, std::string(e.what()) + " in \"" + text + "\"");
    }
}

ExprMatrix parse_matrix(const std::string& text, const SymbolTable& table, int q, int line)
{
    auto strip = [&](const std::string& s) {
        std::string t = trim(s);
        if (t.size() < 2 || t.front() != '[' || t.back() != ']') throw ProblemError(line, "malformed matrix " + s);
        return t.substr(1, t.size() - 2);
    };
    ExprMatrix m;
    for (const auto& row : split_top(strip(text), ',')) {
        std::vector<Expr> r;
        for (const auto& item : split_top(strip(row), ',')) r.push_back(parse_at(item, table, line));
        if (static_cast<int>(r.size()) != q) throw ProblemError(line, "matrix rows must have " + std::to_string(q) + " entries");
        m.push_back(std::move(r));
    }
    if (static_cast<int>(m.size()) != q) throw ProblemError(line, "matrix must have " + std::to_string(q) + " rows");
    return m;
}

int parse_int(const std::string& s, int line)
{
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ProblemError(line, "expected an integer, got \"" + s + "\"");
    }
}

const Entry* find_key(const Section& s, const std::string& key)
{
    const Entry* found = nullptr;
    for (const auto& e : s.entries) {
        if (e.key != key) continue;
        if (found) throw ProblemError(e.line, "duplicate key " + key);
        found = &e;
    }
    return found;
}

void require_value(const Entry& e)
{
    if (!e.has_value) throw ProblemError(e.line, "expected \"key = value\"");
}

// "value | tail" -> (value, tail)
std::pair<std::string, std::string> split_bar(const std::string& s)
{
    const auto bar = s.find('|');
    if (bar == std::string::npos) return {trim(s), ""};
    return {trim(s.substr(0, bar)), trim(s.substr(bar + 1))};
}

class Builder {
public:
    Problem build(const std::vector<Section>& sections)
    {
        std::set<std::string> seen;
        for (const auto& s : sections) {
            if (!seen.insert(s.name).second) throw ProblemError(s.line, "duplicate section [" + s.name + "]");
            if (s.name != "bundle" && !have_bundle_) throw ProblemError(s.line, "[bundle] must come first");
            if (s.name == "bundle") bundle(s);
            else if (s.name == "parameters") parameters(s);
            else if (s.name == "functions") functions(s);
            else if (s.name == "field") p_.field = field(s, false);
            else if (s.name == "ansatz") p_.ansatz = field(s, true);
            else if (s.name == "mu") mu(s);
            else if (s.name == "equations") equations(s);
            else if (s.name == "solved") solved(s);
            else if (s.name == "invariants") invariants(s);
            else if (s.name == "invariant-manifold") manifold(s);
            else if (s.name == "restricted-override") overrides(s);
            else if (s.name == "restricted-expected") expected(s);
            else if (s.name == "change") change(s);
            else if (s.name == "reduce") reduce(s);
            else if (s.name == "solutions") p_.solutions = section_functions(s, p_.bundle, p_.table);
            else if (s.name == "reduced-solutions") reduced_solutions(s);
            else if (s.name == "config") config(s);
            else throw ProblemError(s.line, "unknown section [" + s.name + "]");
        }
        if (!have_bundle_) throw ProblemError(0, "missing [bundle] section");
        p_.reduce_table = p_.table;
        for (const auto& inv : p_.invariants) p_.reduce_table.add_parameter(inv.name);
        return std::move(p_);
    }

private:
    void bundle(const Section& s)
    {
        const Entry* ind = find_key(s, "independent");
        const Entry* dep = find_key(s, "dependent");
        const Entry* ord = find_key(s, "order");
        if (!ind || !dep || !ord) throw ProblemError(s.line, "[bundle] needs independent, dependent and order");
        for (const auto& e : s.entries) {
            if (e.key != "independent" && e.key != "dependent" && e.key != "order") {
                throw ProblemError(e.line, "unknown key " + e.key + " in [bundle]");
            }
        }
        try {
            p_.bundle = JetBundle(split_list(ind->value), split_list(dep->value), parse_int(ord->value, ord->line));
        } catch (const std::invalid_argument& e) {
            throw ProblemError(s.line, e.what());
        }
        p_.table = SymbolTable(p_.bundle);
        p_.mu = SemibasicOneForm::zero(p_.bundle.p());
        have_bundle_ = true;
    }

    void parameters(const Section& s)
    {
        for (const auto& e : s.entries) {
            const std::string list = e.has_value ? e.value : e.key;
            if (e.has_value && e.key != "names") throw ProblemError(e.line, "expected \"names = ...\"");
            for (const auto& n : split_list(list)) {
                try {
                    p_.table.add_parameter(n);
                } catch (const std::invalid_argument& ex) {
                    throw ProblemError(e.line, ex.what());
                }
                parameters_.push_back(n);
            }
        }
    }

    void functions(const Section& s)
    {
        for (const auto& e : s.entries) {
            const std::string decl = e.has_value ? e.value : e.key;
            const auto open = decl.find('(');
            if (open == std::string::npos || decl.back() != ')') {
                throw ProblemError(e.line, "expected a declaration like f(x, u)");
            }
            const std::string name = trim(decl.substr(0, open));
            std::vector<Expr> args;
            for (const auto& a : split_list(decl.substr(open + 1, decl.size() - open - 2))) {
                Expr v = parse_at(a, p_.table, e.line);
                if (!v.is_symbol()) throw ProblemError(e.line, "function arguments must be symbols");
                args.push_back(v);
            }
            try {
                p_.table.add_function(name, std::move(args));
            } catch (const std::invalid_argument& ex) {
                throw ProblemError(e.line, ex.what());
            }
        }
    }

    PointVectorField field(const Section& s, bool ansatz)
    {
        PointVectorField X;
        X.xi.assign(static_cast<std::size_t>(p_.bundle.p()), Expr());
        X.phi.assign(static_cast<std::size_t>(p_.bundle.q()), Expr());
        for (const auto& e : s.entries) {
            require_value(e);
            if (e.key == "generalized") {
                X.generalized = true;
                X.source_order = parse_int(e.value, e.line);
                continue;
            }
            if (ansatz && e.key == "arguments") {
                for (const auto& a : split_list(e.value)) {
                    Expr v = parse_at(a, p_.table, e.line);
                    if (!v.is_jet()) throw ProblemError(e.line, "ansatz arguments must be jet variables");
                    p_.ansatz_arguments.push_back(v);
                }
                continue;
            }
            if (e.key.rfind("xi_", 0) == 0) {
                const int i = p_.bundle.independent_index(e.key.substr(3));
                if (i < 0) throw ProblemError(e.line, "unknown independent variable in " + e.key);
                X.xi[static_cast<std::size_t>(i)] = parse_at(e.value, p_.table, e.line);
            } else if (e.key.rfind("phi_", 0) == 0) {
                const int a = p_.bundle.dependent_index(e.key.substr(4));
                if (a < 0) throw ProblemError(e.line, "unknown dependent variable in " + e.key);
                X.phi[static_cast<std::size_t>(a)] = parse_at(e.value, p_.table, e.line);
            } else {
                throw ProblemError(e.line, "unknown key " + e.key + " (expected xi_<x> or phi_<u>)");
            }
        }
        if (ansatz) {
            for (int a = 0; a < p_.bundle.q(); ++a) p_.ansatz_arguments.insert(p_.ansatz_arguments.begin() + a, p_.bundle.u(a));
        }
        try {
            X.validate(p_.bundle);
        } catch (const std::invalid_argument& ex) {
            throw ProblemError(s.line, ex.what());
        }
        return X;
    }

    void mu(const Section& s)
    {
        const int p = p_.bundle.p();
        const int q = p_.bundle.q();
        int source_order = 1;
        std::vector<std::optional<Expr>> scalar(static_cast<std::size_t>(p));
        std::vector<std::optional<ExprMatrix>> matrices(static_cast<std::size_t>(p));
        std::vector<std::pair<std::string, ExprMatrix>> generators;
        std::vector<std::pair<const Entry*, std::vector<std::string>>> structure;
        std::vector<std::pair<const Entry*, std::vector<std::string>>> coefficients;
        for (const auto& e : s.entries) {
            require_value(e);
            if (e.key == "source-order") {
                source_order = parse_int(e.value, e.line);
            } else if (e.key == "potential") {
                p_.potential = parse_at(e.value, p_.table, e.line);
            } else if (e.key.rfind("generator ", 0) == 0) {
                generators.emplace_back(trim(e.key.substr(10)), parse_matrix(e.value, p_.table, q, e.line));
            } else if (e.key.rfind("structure ", 0) == 0) {
                structure.emplace_back(&e, split_list(e.key.substr(10)));
            } else if (e.key.rfind("coefficients ", 0) == 0) {
                coefficients.emplace_back(&e, std::vector<std::string>{trim(e.key.substr(13))});
            } else {
                const int i = p_.bundle.independent_index(e.key);
                if (i < 0) throw ProblemError(e.line, "unknown key " + e.key + " in [mu]");
                if (!e.value.empty() && e.value.front() == '[') {
                    matrices[static_cast<std::size_t>(i)] = parse_matrix(e.value, p_.table, q, e.line);
                } else {
                    scalar[static_cast<std::size_t>(i)] = parse_at(e.value, p_.table, e.line);
                }
            }
        }
        const bool any_scalar = std::any_of(scalar.begin(), scalar.end(), [](const auto& v) { return v.has_value(); });
        const bool any_matrix = std::any_of(matrices.begin(), matrices.end(), [](const auto& v) { return v.has_value(); });
        const int kinds = int(any_scalar) + int(any_matrix) + int(p_.potential.has_value()) + int(!generators.empty());
        if (kinds > 1) throw ProblemError(s.line, "[mu] mixes scalar, matrix, potential and gauged forms");
        try {
            if (p_.potential) {
                p_.mu = exact_from_potential(*p_.potential, p_.bundle);
            } else if (!generators.empty()) {
                gauged(s, generators, structure, coefficients);
                p_.mu = p_.gauged->assemble();
                p_.mu.source_order = source_order;
            } else if (any_matrix) {
                std::vector<ExprMatrix> m;
                for (auto& v : matrices) m.push_back(v ? *v : zero_matrix(q));
                p_.mu = SemibasicOneForm::from_matrices(std::move(m), source_order);
            } else {
                std::vector<Expr> l;
                for (auto& v : scalar) l.push_back(v ? *v : Expr());
                p_.mu = SemibasicOneForm::from_scalar(std::move(l), source_order);
            }
            p_.mu.validate(p_.bundle);
        } catch (const std::invalid_argument& ex) {
            throw ProblemError(s.line, ex.what());
        }
        p_.has_mu = true;
    }

    void gauged(const Section& s, const std::vector<std::pair<std::string, ExprMatrix>>& generators,
                const std::vector<std::pair<const Entry*, std::vector<std::string>>>& structure,
                const std::vector<std::pair<const Entry*, std::vector<std::string>>>& coefficients)
    {
        GaugedAlgebraSpec spec;
        const std::size_t r = generators.size();
        auto index_of = [&](const std::string& name, int line) {
            for (std::size_t k = 0; k < r; ++k) {
                if (generators[k].first == name) return k;
            }
            throw ProblemError(line, "unknown generator " + name);
        };
        for (const auto& g : generators) spec.generators.push_back(g.second);
        spec.structure.assign(r, std::vector<std::vector<Rational>>(r, std::vector<Rational>(r, Rational(0))));
        for (const auto& [e, names] : structure) {
            if (names.size() != 2) throw ProblemError(e->line, "expected \"structure L_a, L_b = c_1, ..., c_r\"");
            const std::size_t a = index_of(names[0], e->line);
            const std::size_t b = index_of(names[1], e->line);
            auto values = split_list(e->value);
            if (values.size() != r) throw ProblemError(e->line, "need one structure constant per generator");
            for (std::size_t k = 0; k < r; ++k) {
                Expr c = parse_at(values[k], p_.table, e->line);
                if (!c.is_number()) throw ProblemError(e->line, "structure constants must be rational numbers");
                spec.structure[a][b][k] = c.node().value;
                spec.structure[b][a][k] = -c.node().value;
            }
        }
        spec.coefficients.assign(static_cast<std::size_t>(p_.bundle.p()), std::vector<Expr>(r, Expr()));
        for (const auto& [e, names] : coefficients) {
            const int i = p_.bundle.independent_index(names[0]);
            if (i < 0) throw ProblemError(e->line, "unknown independent variable " + names[0]);
            auto values = split_list(e->value);
            if (values.size() != r) throw ProblemError(e->line, "need one coefficient per generator");
            for (std::size_t k = 0; k < r; ++k) {
                spec.coefficients[static_cast<std::size_t>(i)][k] = parse_at(values[k], p_.table, e->line);
            }
        }
        try {
            spec.validate(p_.bundle);
        } catch (const std::invalid_argument& ex) {
            throw ProblemError(s.line, ex.what());
        }
        p_.gauged = std::move(spec);
    }

    void equations(const Section& s)
    {
        for (const auto& e : s.entries) {
            require_value(e);
            auto [expr, lead] = split_bar(e.value);
            NamedEquation eq{e.key, parse_at(expr, p_.table, e.line), std::nullopt};
            if (!lead.empty()) {
                Expr l = parse_at(lead, p_.table, e.line);
                if (!l.is_jet()) throw ProblemError(e.line, "leading variable must be a jet variable");
                eq.leading = l;
            }
            p_.equations.push_back(std::move(eq));
        }
    }

    void solved(const Section& s)
    {
        for (const auto& e : s.entries) {
            require_value(e);
            Expr target = parse_at(e.key, p_.table, e.line);
            if (!target.is_jet() && target.kind() != Kind::Function) {
                throw ProblemError(e.line, "solved form target must be a jet variable or function");
            }
            p_.solved.push_back({target, parse_at(e.value, p_.table, e.line)});
        }
    }

    void invariants(const Section& s)
    {
        for (const auto& e : s.entries) {
            require_value(e);
            p_.invariants.push_back({e.key, parse_at(e.value, p_.table, e.line)});
        }
    }

    void manifold(const Section& s)
    {
        for (const auto& e : s.entries) {
            require_value(e);
            if (e.key != "leading") throw ProblemError(e.line, "expected \"leading = ...\"");
            for (const auto& item : split_list(e.value)) {
                Expr l = parse_at(item, p_.table, e.line);
                if (!l.is_jet()) throw ProblemError(e.line, "leading variable must be a jet variable");
                p_.manifold_leading.push_back(l);
            }
        }
    }

    void overrides(const Section& s)
    {
        for (const auto& e : s.entries) {
            require_value(e);
            auto [expr, note] = split_bar(e.value);
            if (note.empty()) throw ProblemError(e.line, "restricted override needs a note after '|'");
            p_.overrides[e.key] = RestrictionOverride{parse_at(expr, p_.table, e.line), note};
        }
    }

    void expected(const Section& s)
    {
        for (const auto& e : s.entries) {
            require_value(e);
            p_.restricted_expected.push_back({e.key, parse_at(e.value, p_.table, e.line)});
        }
    }

    void change(const Section& s)
    {
        const Entry* ind = find_key(s, "target-independent");
        const Entry* dep = find_key(s, "target-dependent");
        if (!ind || !dep) throw ProblemError(s.line, "[change] needs target-independent and target-dependent");
        JetBundle target;
        try {
            target = JetBundle(split_list(ind->value), split_list(dep->value), p_.bundle.order());
        } catch (const std::invalid_argument& ex) {
            throw ProblemError(ind->line, ex.what());
        }
        p_.target_table = SymbolTable(target);
        for (const auto& n : parameters_) p_.target_table.add_parameter(n);
        CoordinateChange c{p_.bundle, target, {}, {}, {}, {}};
        c.forward_independent.resize(static_cast<std::size_t>(target.p()));
        c.forward_dependent.resize(static_cast<std::size_t>(target.q()));
        c.inverse_independent.resize(static_cast<std::size_t>(p_.bundle.p()));
        c.inverse_dependent.resize(static_cast<std::size_t>(p_.bundle.q()));
        std::set<std::string> filled;
        for (const auto& e : s.entries) {
            require_value(e);
            if (&e == ind || &e == dep) continue;
            const bool forward = e.key.rfind("forward ", 0) == 0;
            const bool inverse = e.key.rfind("inverse ", 0) == 0;
            if (!forward && !inverse) throw ProblemError(e.line, "expected \"forward <name> = ...\" or \"inverse <name> = ...\"");
            const std::string name = trim(e.key.substr(8));
            if (!filled.insert(e.key.substr(0, 8) + name).second) throw ProblemError(e.line, "duplicate map for " + name);
            const JetBundle& b = forward ? target : p_.bundle;
            Expr value = parse_at(e.value, forward ? p_.table : p_.target_table, e.line);
            if (int i = b.independent_index(name); i >= 0) {
                (forward ? c.forward_independent : c.inverse_independent)[static_cast<std::size_t>(i)] = value;
            } else if (int a = b.dependent_index(name); a >= 0) {
                (forward ? c.forward_dependent : c.inverse_dependent)[static_cast<std::size_t>(a)] = value;
            } else {
                throw ProblemError(e.line, "unknown variable " + name + " in change of coordinates");
            }
        }
        const std::size_t needed = static_cast<std::size_t>(2 * (target.p() + target.q()));
        if (filled.size() != needed) throw ProblemError(s.line, "[change] must give every forward and inverse map");
        try {
            c.validate();
        } catch (const std::invalid_argument& ex) {
            throw ProblemError(s.line, ex.what());
        }
        p_.change = std::move(c);
    }

    void reduce(const Section& s)
    {
        SymbolTable t = p_.table;
        for (const auto& inv : p_.invariants) t.add_parameter(inv.name);
        for (const auto& e : s.entries) {
            require_value(e);
            p_.reduce.push_back({e.key, parse_at(e.value, t, e.line)});
        }
    }

    std::vector<Expr> section_functions(const Section& s, const JetBundle& b, const SymbolTable& t)
    {
        std::vector<std::optional<Expr>> f(static_cast<std::size_t>(b.q()));
        for (const auto& e : s.entries) {
            require_value(e);
            const int a = b.dependent_index(e.key);
            if (a < 0) throw ProblemError(e.line, "unknown dependent variable " + e.key);
            Expr v = parse_at(e.value, t, e.line);
            for (const Expr& sym : free_symbols(v)) {
                if (sym.is_jet()) throw ProblemError(e.line, "solutions must depend on independent variables only");
            }
            f[static_cast<std::size_t>(a)] = v;
        }
        std::vector<Expr> out;
        for (std::size_t a = 0; a < f.size(); ++a) {
            if (!f[a]) throw ProblemError(s.line, "missing solution for " + b.dependent_names()[a]);
            out.push_back(*f[a]);
        }
        return out;
    }

    void reduced_solutions(const Section& s)
    {
        if (!p_.change) throw ProblemError(s.line, "[reduced-solutions] needs a preceding [change]");
        p_.reduced_solutions = section_functions(s, p_.change->target, p_.target_table);
    }

    void config(const Section& s)
    {
        for (const auto& e : s.entries) {
            require_value(e);
            try {
                if (e.key == "trials") {
                    p_.config.trials = parse_int(e.value, e.line);
                } else if (e.key == "tolerance") {
                    p_.config.tolerance = std::stod(e.value);
                } else if (e.key == "seed") {
                    p_.config.seed = std::stoull(e.value);
                    p_.seed_in_file = true;
                } else {
                    throw ProblemError(e.line, "unknown key " + e.key + " in [config]");
                }
            } catch (const std::logic_error&) {
                throw ProblemError(e.line, "malformed value for " + e.key);
            }
        }
        try {
            p_.config.validate();
        } catch (const std::invalid_argument& ex) {
            throw ProblemError(s.line, ex.what());
        }
    }

    Problem p_;
    bool have_bundle_ = false;
    std::vector<std::string> parameters_;
};

}  // namespace

EquationSystem Problem::equation_system() const
{
    if (equations.empty()) throw std::invalid_argument("problem has no [equations]");
    EquationSystem sys;
    for (const auto& e : equations) sys.equations.push_back(e.expr);
    if (!solved.empty()) {
        sys.solved = SubstitutionSystem(solved, true, bundle);
        for (const auto& e : equations) {
            if (e.leading) sys.leading.push_back(*e.leading);
        }
        if (sys.leading.size() != sys.equations.size()) sys.leading.clear();
        return sys;
    }
    std::vector<Expr> leading;
    for (const auto& e : equations) {
        if (!e.leading) throw std::invalid_argument("equation " + e.name + " needs a leading variable or a [solved] section");
        leading.push_back(*e.leading);
    }
    return EquationSystem::from_equations(sys.equations, std::move(leading), bundle);
}

SubstitutionSystem Problem::invariant_manifold_rules() const
{
    if (!field) throw std::invalid_argument("problem has no [field]");
    return solve_invariant_manifold(invariant_manifold(*field, bundle), manifold_leading, bundle);
}

std::vector<std::string> Problem::invariant_names() const
{
    std::vector<std::string> out;
    for (const auto& inv : invariants) out.push_back(inv.name);
    return out;
}

Problem parse_problem(const std::string& text)
{
    return Builder().build(split_sections(text));
}

Problem load_problem(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ProblemError(0, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_problem(ss.str());
}

}  // namespace mujet
