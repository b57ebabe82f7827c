#include "mujet/expr.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

namespace mujet {

namespace {

std::size_t hash_combine(std::size_t seed, std::size_t v)
{
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t hash_rational(const Rational& r)
{
    std::size_t h = static_cast<std::size_t>(mpz_get_si(r.get_num_mpz_t()));
    h = hash_combine(h, static_cast<std::size_t>(mpz_get_si(r.get_den_mpz_t())));
    return hash_combine(h, mpz_size(r.get_num_mpz_t()));
}

std::uint64_t name_bit(const std::string& name)
{
    return std::uint64_t{1} << (std::hash<std::string>{}(name) & 63u);
}

Expr finish(std::shared_ptr<Node> n)
{
    std::size_t h = static_cast<std::size_t>(n->kind) * 0x100000001b3ULL;
    std::uint64_t mask = 0;
    switch (n->kind) {
    case Kind::Number:
        h = hash_combine(h, hash_rational(n->value));
        break;
    case Kind::Symbol:
        h = hash_combine(h, std::hash<std::string>{}(n->name));
        h = hash_combine(h, static_cast<std::size_t>(n->symbol_kind));
        mask = name_bit(n->name);
        break;
    case Kind::Function:
        h = hash_combine(h, std::hash<std::string>{}(n->name));
        for (int o : n->orders) h = hash_combine(h, static_cast<std::size_t>(o));
        mask = name_bit(n->name);
        break;
    case Kind::Elementary:
        h = hash_combine(h, static_cast<std::size_t>(n->fn));
        break;
    case Kind::Power:
    case Kind::Product:
        h = hash_combine(h, hash_rational(n->value));
        break;
    case Kind::Sum:
        break;
    }
    for (const Expr& c : n->children) {
        h = hash_combine(h, c.hash());
        mask |= c.symbol_mask();
    }
    n->hash = h;
    n->symbol_mask = mask;
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr make_number(const Rational& v)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Number;
    n->value = v;
    return finish(std::move(n));
}

const Expr& zero_expr()
{
    static const Expr z = make_number(Rational(0));
    return z;
}

const Expr& one_expr()
{
    static const Expr o = make_number(Rational(1));
    return o;
}

Expr make_power(const Expr& base, const Rational& e)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Power;
    n->value = e;
    n->children = {base};
    return finish(std::move(n));
}

Expr make_product(const Rational& coeff, std::vector<Expr> factors)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Product;
    n->value = coeff;
    n->children = std::move(factors);
    return finish(std::move(n));
}

Expr make_sum(std::vector<Expr> terms)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Sum;
    n->children = std::move(terms);
    return finish(std::move(n));
}

Expr make_elementary(ElementaryFn fn, const Expr& arg)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Elementary;
    n->fn = fn;
    n->children = {arg};
    return finish(std::move(n));
}

bool is_integer(const Rational& r) { return r.get_den() == 1; }

Rational rational_pow(const Rational& base, long e)
{
    mpz_class num, den;
    unsigned long ue = static_cast<unsigned long>(e < 0 ? -e : e);
    mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), ue);
    mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), ue);
    Rational r = e < 0 ? Rational(den, num) : Rational(num, den);
    r.canonicalize();
    return r;
}

// Exact q-th root of a positive rational, if it exists.
bool rational_root(const Rational& v, unsigned long q, Rational& out)
{
    if (v <= 0) return false;
    mpz_class rn, rd;
    if (mpz_root(rn.get_mpz_t(), v.get_num_mpz_t(), q) == 0) return false;
    if (mpz_root(rd.get_mpz_t(), v.get_den_mpz_t(), q) == 0) return false;
    out = Rational(rn, rd);
    out.canonicalize();
    return true;
}

Expr scale_monomial(const Expr& m, const Rational& c)
{
    if (c == 1) return m;
    if (m.kind() == Kind::Product) {
        return make_product(c, m.children());
    }
    return make_product(c, {m});
}

std::pair<Expr, Rational> as_power(const Expr& e)
{
    if (e.kind() == Kind::Power) return {e.children()[0], e.node().value};
    return {e, Rational(1)};
}

int compare_rational(const Rational& a, const Rational& b)
{
    int c = cmp(a, b);
    return (c > 0) - (c < 0);
}

int compare_vectors(const std::vector<Expr>& a, const std::vector<Expr>& b)
{
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        int c = compare(a[i], b[i]);
        if (c != 0) return c;
    }
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    return 0;
}

int compare_structural(const Expr& a, const Expr& b)
{
    if (a.get() == b.get()) return 0;
    const Node& x = a.node();
    const Node& y = b.node();
    if (x.kind != y.kind) return static_cast<int>(x.kind) < static_cast<int>(y.kind) ? -1 : 1;
    switch (x.kind) {
    case Kind::Number:
        return compare_rational(x.value, y.value);
    case Kind::Symbol:
        if (x.symbol_kind != y.symbol_kind) return x.symbol_kind < y.symbol_kind ? -1 : 1;
        return x.name.compare(y.name) < 0 ? -1 : (x.name == y.name ? 0 : 1);
    case Kind::Function: {
        int c = x.name.compare(y.name);
        if (c != 0) return c < 0 ? -1 : 1;
        if (x.orders != y.orders) return x.orders < y.orders ? -1 : 1;
        return compare_vectors(x.children, y.children);
    }
    case Kind::Elementary:
        if (x.fn != y.fn) return x.fn < y.fn ? -1 : 1;
        return compare(x.children[0], y.children[0]);
    case Kind::Power: {
        int c = compare(x.children[0], y.children[0]);
        if (c != 0) return c;
        return compare_rational(x.value, y.value);
    }
    case Kind::Product: {
        int c = compare_vectors(x.children, y.children);
        if (c != 0) return c;
        return compare_rational(x.value, y.value);
    }
    case Kind::Sum:
        return compare_vectors(x.children, y.children);
    }
    return 0;
}

struct SumContent {
    Rational coeff{1};
    std::vector<std::pair<Expr, Rational>> monomial;
    Expr primitive;
};

// Writes a sum as coeff * monomial * primitive, where the primitive sum has
// leading coefficient 1 and no atom common to all terms. Sum-valued atoms are
// never pulled out.
SumContent sum_content(const Expr& s)
{
    SumContent out;
    const auto& terms = s.children();
    std::vector<std::pair<Expr, Rational>> content;
    ExprMap<std::size_t> where;
    std::vector<ExprMap<Rational>> per_term(terms.size());
    for (std::size_t t = 0; t < terms.size(); ++t) {
        auto [c, m] = split_coefficient(terms[t]);
        std::vector<Expr> atoms;
        if (m.kind() == Kind::Product) {
            atoms = m.children();
        } else if (!m.is_number()) {
            atoms = {m};
        }
        for (const Expr& a : atoms) {
            auto [base, e] = as_power(a);
            if (base.kind() == Kind::Sum) continue;
            per_term[t][base] += e;
            if (where.find(base) == where.end()) {
                where.emplace(base, content.size());
                content.emplace_back(base, Rational(0));
            }
        }
    }
    for (auto& [base, e] : content) {
        bool first = true;
        Rational lo(0);
        for (auto& pt : per_term) {
            auto it = pt.find(base);
            Rational v = it == pt.end() ? Rational(0) : it->second;
            if (first || v < lo) lo = v;
            first = false;
        }
        e = lo;
    }
    std::vector<Expr> inverse{s};
    for (auto& [base, e] : content) {
        if (e != 0) {
            out.monomial.emplace_back(base, e);
            inverse.push_back(pow(base, -e));
        }
    }
    Expr prim = out.monomial.empty() ? s : mul(std::move(inverse));
    std::vector<Expr> pt = terms_of(prim);
    Rational lead = pt.empty() ? Rational(1) : split_coefficient(pt.front()).first;
    if (lead != 1 && lead != 0) {
        std::vector<Expr> scaled;
        scaled.reserve(pt.size());
        for (const Expr& t : pt) {
            auto [c, m] = split_coefficient(t);
            scaled.push_back(m.is_number() ? Expr(Rational(c / lead)) : scale_monomial(m, c / lead));
        }
        prim = add(std::move(scaled));
        out.coeff = lead;
    }
    out.primitive = prim;
    return out;
}

}  // namespace

// ---- Expr -----------------------------------------------------------------

Expr::Expr() : node_(zero_expr().node_) {}
Expr::Expr(int value) : Expr(Rational(value)) {}
Expr::Expr(const Rational& raw)
{
    Rational value(raw);
    value.canonicalize();
    if (value == 0) {
        node_ = zero_expr().node_;
    } else if (value == 1) {
        node_ = one_expr().node_;
    } else {
        node_ = make_number(value).node_;
    }
}

Kind Expr::kind() const { return node_->kind; }
std::size_t Expr::hash() const { return node_->hash; }
std::uint64_t Expr::symbol_mask() const { return node_->symbol_mask; }
bool Expr::is_zero() const { return node_->kind == Kind::Number && node_->value == 0; }
bool Expr::is_one() const { return node_->kind == Kind::Number && node_->value == 1; }
bool Expr::is_integer() const { return node_->kind == Kind::Number && node_->value.get_den() == 1; }
const Rational& Expr::number() const { return node_->value; }
bool Expr::is_jet() const { return node_->kind == Kind::Symbol && node_->symbol_kind == SymbolKind::Jet; }
const std::string& Expr::name() const { return node_->name; }
const std::vector<Expr>& Expr::children() const { return node_->children; }
std::string Expr::str() const { return to_string(*this); }

int compare(const Expr& a, const Expr& b)
{
    if (a.get() == b.get()) return 0;
    auto [ba, ea] = as_power(a);
    auto [bb, eb] = as_power(b);
    int c = compare_structural(ba, bb);
    if (c != 0) return c;
    return compare_rational(ea, eb);
}

bool operator==(const Expr& a, const Expr& b)
{
    if (a.get() == b.get()) return true;
    if (a.hash() != b.hash()) return false;
    return compare_structural(a, b) == 0;
}

// ---- leaves ---------------------------------------------------------------

Expr parameter(const std::string& name)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Symbol;
    n->symbol_kind = SymbolKind::Parameter;
    n->name = name;
    return finish(std::move(n));
}

Expr independent(const std::string& name, int position)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Symbol;
    n->symbol_kind = SymbolKind::Independent;
    n->name = name;
    n->index = position;
    return finish(std::move(n));
}

Expr jet_symbol(const std::string& name, int dependent, std::vector<int> multi_index)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Symbol;
    n->symbol_kind = SymbolKind::Jet;
    n->name = name;
    n->index = dependent;
    n->orders = std::move(multi_index);
    return finish(std::move(n));
}

Expr function(const std::string& name, std::vector<int> orders, std::vector<Expr> args)
{
    if (orders.size() != args.size()) {
        throw std::invalid_argument("function " + name + ": derivative orders do not match arity");
    }
    for (int o : orders) {
        if (o < 0) throw std::invalid_argument("function " + name + ": negative derivative order");
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::Function;
    n->name = name;
    n->orders = std::move(orders);
    n->children = std::move(args);
    return finish(std::move(n));
}

Expr function(const std::string& name, std::vector<Expr> args)
{
    std::vector<int> orders(args.size(), 0);
    return function(name, std::move(orders), std::move(args));
}

// ---- arithmetic -----------------------------------------------------------

std::pair<Rational, Expr> split_coefficient(const Expr& term)
{
    if (term.kind() == Kind::Number) return {term.number(), Expr(1)};
    if (term.kind() == Kind::Product) {
        const auto& f = term.children();
        if (f.size() == 1) return {term.node().value, f[0]};
        if (term.node().value == 1) return {Rational(1), term};
        return {term.node().value, make_product(Rational(1), f)};
    }
    return {Rational(1), term};
}

std::vector<Expr> terms_of(const Expr& e)
{
    if (e.kind() == Kind::Sum) return e.children();
    if (e.is_zero()) return {};
    return {e};
}

Expr add(std::vector<Expr> terms)
{
    Rational constant(0);
    std::vector<Expr> keys;
    ExprMap<Rational> coeffs;
    auto accept = [&](const Expr& t) {
        if (t.kind() == Kind::Number) {
            constant += t.number();
            return;
        }
        auto [c, m] = split_coefficient(t);
        auto [it, inserted] = coeffs.try_emplace(m, c);
        if (inserted) {
            keys.push_back(m);
        } else {
            it->second += c;
        }
    };
    for (const Expr& t : terms) {
        if (t.kind() == Kind::Sum) {
            for (const Expr& c : t.children()) accept(c);
        } else {
            accept(t);
        }
    }
    // Terms are ordered by monomial alone, so s and -s list their terms alike.
    std::vector<std::pair<Expr, Rational>> kept;
    kept.reserve(keys.size());
    for (const Expr& k : keys) {
        const Rational& c = coeffs.find(k)->second;
        if (c != 0) kept.emplace_back(k, c);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return compare(a.first, b.first) < 0; });
    std::vector<Expr> out;
    out.reserve(kept.size() + 1);
    if (constant != 0) out.emplace_back(constant);
    for (const auto& [k, c] : kept) out.push_back(scale_monomial(k, c));
    if (out.empty()) return Expr();
    if (out.size() == 1) return out.front();
    return make_sum(std::move(out));
}

Expr mul(std::vector<Expr> factors)
{
    Rational coeff(1);
    std::vector<std::pair<Expr, Rational>> powers;
    ExprMap<std::size_t> where;
    std::vector<Expr> exp_args;

    auto push = [&](const Expr& base, const Rational& e) {
        auto it = where.find(base);
        if (it == where.end()) {
            where.emplace(base, powers.size());
            powers.emplace_back(base, e);
        } else {
            powers[it->second].second += e;
        }
    };
    // Accepts f^k for an atom or canonical product f.
    std::function<void(const Expr&, const Rational&)> accept = [&](const Expr& f, const Rational& k) {
        switch (f.kind()) {
        case Kind::Number:
            if (k == 1) {
                coeff *= f.number();
            } else {
                push(f, k);
            }
            break;
        case Kind::Product:
            if (is_integer(k)) {
                coeff *= rational_pow(f.node().value, k.get_num().get_si());
                for (const Expr& c : f.children()) accept(c, k);
            } else {
                push(f, k);
            }
            break;
        case Kind::Power:
            push(f.children()[0], f.node().value * k);
            break;
        case Kind::Elementary:
            if (f.node().fn == ElementaryFn::Exp) {
                exp_args.push_back(k == 1 ? f.children()[0] : mul({Expr(k), f.children()[0]}));
                break;
            }
            push(f, k);
            break;
        default:
            push(f, k);
        }
    };
    for (const Expr& f : factors) {
        if (f.is_zero()) return Expr();
        accept(f, Rational(1));
    }
    if (coeff == 0) return Expr();

    // Merged exponents may turn a power of a product or power back into
    // something that has to be distributed.
    for (bool again = true; again;) {
        again = false;
        for (std::size_t i = 0; i < powers.size(); ++i) {
            auto [b, e] = powers[i];
            if (e == 0 || !is_integer(e)) continue;
            if (b.kind() == Kind::Product || b.kind() == Kind::Power) {
                powers[i].second = 0;
                accept(b, e);
                again = true;
            }
        }
    }

    bool negative_sum = false;
    for (auto& [b, e] : powers) {
        if (b.kind() == Kind::Sum && e < 0) negative_sum = true;
    }
    if (negative_sum) {
        std::vector<std::pair<Expr, Rational>> old;
        old.swap(powers);
        where.clear();
        for (auto& [b, e] : old) {
            if (e == 0) continue;
            if (b.kind() == Kind::Sum && e > 0 && is_integer(e)) {
                SumContent sc = sum_content(b);
                coeff *= rational_pow(sc.coeff, e.get_num().get_si());
                for (auto& [atom, ae] : sc.monomial) accept(atom, ae * e);
                push(sc.primitive, e);
            } else {
                push(b, e);
            }
        }
    }

    if (!exp_args.empty()) {
        Expr a = add(std::move(exp_args));
        if (!a.is_zero()) push(make_elementary(ElementaryFn::Exp, a), Rational(1));
    }

    std::vector<Expr> plain;
    std::vector<Expr> expand;
    for (auto& [b, e] : powers) {
        if (e == 0) continue;
        if (b.kind() == Kind::Number) {
            Expr v = pow(b, e);
            if (v.is_number()) {
                coeff *= v.number();
            } else {
                plain.push_back(v);
            }
            continue;
        }
        if (b.kind() == Kind::Sum && e > 0 && is_integer(e)) {
            for (long i = 0; i < e.get_num().get_si(); ++i) expand.push_back(b);
            continue;
        }
        plain.push_back(e == 1 ? b : make_power(b, e));
    }
    if (coeff == 0) return Expr();

    Expr base;
    if (plain.empty()) {
        base = Expr(coeff);
    } else if (plain.size() == 1 && coeff == 1) {
        base = plain.front();
    } else {
        std::sort(plain.begin(), plain.end(), ExprLess{});
        base = make_product(coeff, std::move(plain));
    }
    if (expand.empty()) return base;

    std::vector<Expr> acc{base};
    for (const Expr& s : expand) {
        std::vector<Expr> next;
        next.reserve(acc.size() * s.children().size());
        for (const Expr& a : acc) {
            for (const Expr& t : s.children()) next.push_back(mul({a, t}));
        }
        acc = terms_of(add(std::move(next)));
        if (acc.empty()) return Expr();
    }
    return add(std::move(acc));
}

Expr pow(const Expr& base, const Rational& r)
{
    if (r == 0) return Expr(1);
    if (r == 1) return base;
    switch (base.kind()) {
    case Kind::Number: {
        const Rational& v = base.number();
        if (v == 0) {
            if (r > 0) return Expr();
            throw SingularError("division by zero");
        }
        if (v == 1) return Expr(1);
        if (is_integer(r)) return Expr(rational_pow(v, r.get_num().get_si()));
        Rational w = rational_pow(v, r.get_num().get_si());
        Rational root;
        if (rational_root(w, r.get_den().get_ui(), root)) return Expr(root);
        return make_power(base, r);
    }
    case Kind::Power:
        if (is_integer(r)) return pow(base.children()[0], base.node().value * r);
        return make_power(base, r);
    case Kind::Product:
        if (is_integer(r)) return mul({make_power(base, r)});
        return make_power(base, r);
    case Kind::Sum:
        if (is_integer(r) && r > 0) {
            std::vector<Expr> copies(static_cast<std::size_t>(r.get_num().get_si()), base);
            return mul(std::move(copies));
        }
        if (is_integer(r)) {
            SumContent sc = sum_content(base);
            std::vector<Expr> f{Expr(rational_pow(sc.coeff, r.get_num().get_si()))};
            for (auto& [atom, e] : sc.monomial) f.push_back(pow(atom, e * r));
            f.push_back(sc.primitive.kind() == Kind::Sum ? make_power(sc.primitive, r) : pow(sc.primitive, r));
            return mul(std::move(f));
        }
        return make_power(base, r);
    case Kind::Elementary:
        if (base.node().fn == ElementaryFn::Exp) return exp(mul({Expr(r), base.children()[0]}));
        return make_power(base, r);
    default:
        return make_power(base, r);
    }
}

Expr elementary(ElementaryFn fn, const Expr& a)
{
    switch (fn) {
    case ElementaryFn::Exp:
        if (a.is_zero()) return Expr(1);
        break;
    case ElementaryFn::Log:
        if (a.is_one()) return Expr();
        if (a.is_zero()) throw SingularError("log(0)");
        break;
    case ElementaryFn::Sin:
    case ElementaryFn::Tan:
    case ElementaryFn::Arctan:
        if (a.is_zero()) return Expr();
        break;
    case ElementaryFn::Cos:
        if (a.is_zero()) return Expr(1);
        break;
    }
    return make_elementary(fn, a);
}

Expr exp(const Expr& a) { return elementary(ElementaryFn::Exp, a); }
Expr log(const Expr& a) { return elementary(ElementaryFn::Log, a); }
Expr sin(const Expr& a) { return elementary(ElementaryFn::Sin, a); }
Expr cos(const Expr& a) { return elementary(ElementaryFn::Cos, a); }
Expr tan(const Expr& a) { return elementary(ElementaryFn::Tan, a); }
Expr arctan(const Expr& a) { return elementary(ElementaryFn::Arctan, a); }
Expr sqrt(const Expr& a) { return pow(a, Rational(1, 2)); }

Expr operator+(const Expr& a, const Expr& b)
{
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    return add({a, b});
}
Expr operator-(const Expr& a, const Expr& b)
{
    if (b.is_zero()) return a;
    return add({a, mul({Expr(-1), b})});
}
Expr operator*(const Expr& a, const Expr& b)
{
    if (a.is_zero() || b.is_zero()) return Expr();
    if (a.is_one()) return b;
    if (b.is_one()) return a;
    return mul({a, b});
}
Expr operator/(const Expr& a, const Expr& b) { return a * pow(b, Rational(-1)); }
Expr operator-(const Expr& a) { return mul({Expr(-1), a}); }
Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

// ---- traversal ------------------------------------------------------------

Expr derive(const Expr& e, const SymbolDerivative& d, std::uint64_t mask)
{
    std::unordered_map<const Node*, Expr> memo;
    std::function<Expr(const Expr&)> rec = [&](const Expr& x) -> Expr {
        if ((x.symbol_mask() & mask) == 0) return Expr();
        auto it = memo.find(x.get());
        if (it != memo.end()) return it->second;
        Expr r;
        const Node& n = x.node();
        switch (n.kind) {
        case Kind::Number:
            break;
        case Kind::Symbol:
            r = d(x);
            break;
        case Kind::Function: {
            std::vector<Expr> terms;
            for (std::size_t k = 0; k < n.children.size(); ++k) {
                Expr dk = rec(n.children[k]);
                if (dk.is_zero()) continue;
                std::vector<int> orders = n.orders;
                ++orders[k];
                terms.push_back(function(n.name, std::move(orders), n.children) * dk);
            }
            r = add(std::move(terms));
            break;
        }
        case Kind::Elementary: {
            const Expr& a = n.children[0];
            Expr da = rec(a);
            if (da.is_zero()) break;
            switch (n.fn) {
            case ElementaryFn::Exp:
                r = x * da;
                break;
            case ElementaryFn::Log:
                r = da / a;
                break;
            case ElementaryFn::Sin:
                r = cos(a) * da;
                break;
            case ElementaryFn::Cos:
                r = -(sin(a) * da);
                break;
            case ElementaryFn::Tan:
                r = (Expr(1) + pow(tan(a), 2)) * da;
                break;
            case ElementaryFn::Arctan:
                r = da / (Expr(1) + pow(a, 2));
                break;
            }
            break;
        }
        case Kind::Power: {
            const Expr& b = n.children[0];
            Expr db = rec(b);
            if (!db.is_zero()) r = mul({Expr(n.value), pow(b, n.value - 1), db});
            break;
        }
        case Kind::Product: {
            std::vector<Expr> terms;
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                Expr di = rec(n.children[i]);
                if (di.is_zero()) continue;
                std::vector<Expr> f;
                f.reserve(n.children.size() + 1);
                f.emplace_back(n.value);
                for (std::size_t j = 0; j < n.children.size(); ++j) {
                    if (j != i) f.push_back(n.children[j]);
                }
                f.push_back(di);
                terms.push_back(mul(std::move(f)));
            }
            r = add(std::move(terms));
            break;
        }
        case Kind::Sum: {
            std::vector<Expr> terms;
            for (const Expr& t : n.children) {
                Expr dt = rec(t);
                if (!dt.is_zero()) terms.push_back(dt);
            }
            r = add(std::move(terms));
            break;
        }
        }
        memo.emplace(x.get(), r);
        return r;
    };
    return rec(e);
}

Expr diff(const Expr& e, const Expr& symbol)
{
    return derive(
        e, [&](const Expr& s) { return s == symbol ? Expr(1) : Expr(); }, symbol.symbol_mask());
}

Expr replace(const Expr& e, const ExprMap<Expr>& map)
{
    if (map.empty()) return e;
    std::uint64_t mask = 0;
    for (const auto& [k, v] : map) mask |= k.symbol_mask();
    std::unordered_map<const Node*, Expr> memo;
    std::function<Expr(const Expr&)> rec = [&](const Expr& x) -> Expr {
        if ((x.symbol_mask() & mask) == 0) return x;
        auto it = memo.find(x.get());
        if (it != memo.end()) return it->second;
        const Node& n = x.node();
        Expr r = x;
        if (n.kind == Kind::Symbol || n.kind == Kind::Function) {
            auto m = map.find(x);
            if (m != map.end()) {
                memo.emplace(x.get(), m->second);
                return m->second;
            }
        }
        if (!n.children.empty()) {
            std::vector<Expr> kids;
            kids.reserve(n.children.size() + 1);
            bool changed = false;
            for (const Expr& c : n.children) {
                kids.push_back(rec(c));
                if (kids.back().get() != c.get()) changed = true;
            }
            if (changed) {
                switch (n.kind) {
                case Kind::Function:
                    r = function(n.name, n.orders, std::move(kids));
                    break;
                case Kind::Elementary:
                    r = elementary(n.fn, kids[0]);
                    break;
                case Kind::Power:
                    r = pow(kids[0], n.value);
                    break;
                case Kind::Product:
                    kids.emplace_back(n.value);
                    r = mul(std::move(kids));
                    break;
                case Kind::Sum:
                    r = add(std::move(kids));
                    break;
                default:
                    break;
                }
            }
        }
        memo.emplace(x.get(), r);
        return r;
    };
    return rec(e);
}

Expr instantiate_function(const Expr& e, const std::string& name, const std::vector<Expr>& params,
                          const Expr& body)
{
    const std::uint64_t mask = name_bit(name);
    std::map<std::vector<int>, Expr> derivatives;
    auto derivative_of_body = [&](const std::vector<int>& orders) {
        auto it = derivatives.find(orders);
        if (it != derivatives.end()) return it->second;
        Expr d = body;
        for (std::size_t k = 0; k < orders.size(); ++k) {
            for (int j = 0; j < orders[k]; ++j) d = diff(d, params[k]);
        }
        derivatives.emplace(orders, d);
        return d;
    };
    std::unordered_map<const Node*, Expr> memo;
    std::function<Expr(const Expr&)> rec = [&](const Expr& x) -> Expr {
        if ((x.symbol_mask() & mask) == 0) return x;
        auto it = memo.find(x.get());
        if (it != memo.end()) return it->second;
        const Node& n = x.node();
        std::vector<Expr> kids;
        kids.reserve(n.children.size() + 1);
        for (const Expr& c : n.children) kids.push_back(rec(c));
        Expr r;
        switch (n.kind) {
        case Kind::Function:
            if (n.name == name) {
                if (kids.size() != params.size()) {
                    throw std::invalid_argument("function " + name + ": arity mismatch in instantiation");
                }
                ExprMap<Expr> at;
                for (std::size_t k = 0; k < params.size(); ++k) at.emplace(params[k], kids[k]);
                r = replace(derivative_of_body(n.orders), at);
            } else {
                r = function(n.name, n.orders, std::move(kids));
            }
            break;
        case Kind::Elementary:
            r = elementary(n.fn, kids[0]);
            break;
        case Kind::Power:
            r = pow(kids[0], n.value);
            break;
        case Kind::Product:
            kids.emplace_back(n.value);
            r = mul(std::move(kids));
            break;
        case Kind::Sum:
            r = add(std::move(kids));
            break;
        default:
            r = x;
        }
        memo.emplace(x.get(), r);
        return r;
    };
    return rec(e);
}

namespace {

template <class Visit>
void walk(const Expr& e, Visit&& visit)
{
    std::unordered_set<const Node*> seen;
    std::vector<Expr> stack{e};
    while (!stack.empty()) {
        Expr x = stack.back();
        stack.pop_back();
        if (!seen.insert(x.get()).second) continue;
        visit(x);
        for (const Expr& c : x.children()) stack.push_back(c);
    }
}

}  // namespace

std::vector<Expr> free_symbols(const Expr& e)
{
    std::set<Expr, ExprLess> out;
    walk(e, [&](const Expr& x) {
        if (x.kind() == Kind::Symbol) out.insert(x);
    });
    return {out.begin(), out.end()};
}

std::vector<Expr> function_nodes(const Expr& e)
{
    std::set<Expr, ExprLess> out;
    walk(e, [&](const Expr& x) {
        if (x.kind() == Kind::Function) out.insert(x);
    });
    return {out.begin(), out.end()};
}

bool contains(const Expr& e, const Expr& symbol)
{
    if ((e.symbol_mask() & symbol.symbol_mask()) == 0) return false;
    bool found = false;
    walk(e, [&](const Expr& x) {
        if (!found && x == symbol) found = true;
    });
    return found;
}

int max_jet_order(const Expr& e)
{
    int best = -1;
    walk(e, [&](const Expr& x) {
        if (x.is_jet()) {
            int o = 0;
            for (int j : x.node().orders) o += j;
            best = std::max(best, o);
        }
    });
    return best;
}

std::size_t tree_size(const Expr& e)
{
    std::size_t n = 1;
    for (const Expr& c : e.children()) n += tree_size(c);
    return n;
}

// ---- printing -------------------------------------------------------------

std::string to_string(const Rational& r) { return r.get_str(); }

std::string derivative_suffix(const std::vector<int>& orders, const std::vector<Expr>& args)
{
    std::string s;
    for (std::size_t k = 0; k < orders.size(); ++k) {
        for (int j = 0; j < orders[k]; ++j) s += args[k].name();
    }
    return s;
}

namespace {

const char* elementary_name(ElementaryFn fn)
{
    switch (fn) {
    case ElementaryFn::Exp: return "exp";
    case ElementaryFn::Log: return "log";
    case ElementaryFn::Sin: return "sin";
    case ElementaryFn::Cos: return "cos";
    case ElementaryFn::Tan: return "tan";
    case ElementaryFn::Arctan: return "arctan";
    }
    return "?";
}

bool distinct_symbol_args(const std::vector<Expr>& args)
{
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (!args[i].is_symbol()) return false;
        for (std::size_t j = 0; j < i; ++j) {
            if (args[i] == args[j]) return false;
        }
    }
    return true;
}

class Printer {
public:
    explicit Printer(const PrintOptions& o) : opts_(o) {}

    std::string print(const Expr& e)
    {
        switch (e.kind()) {
        case Kind::Number:
            return to_string(e.number());
        case Kind::Symbol:
            return e.name();
        case Kind::Function:
            return function_text(e);
        case Kind::Elementary:
            return std::string(elementary_name(e.node().fn)) + "(" + print(e.children()[0]) + ")";
        case Kind::Power:
        case Kind::Product:
            return product_text(e);
        case Kind::Sum:
            return sum_text(e);
        }
        return "?";
    }

private:
    std::string function_text(const Expr& e)
    {
        const Node& n = e.node();
        bool any = std::any_of(n.orders.begin(), n.orders.end(), [](int o) { return o != 0; });
        std::string args;
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (i) args += ", ";
            args += print(n.children[i]);
        }
        bool defaults = false;
        auto d = opts_.default_args.find(n.name);
        if (d != opts_.default_args.end() && d->second.size() == n.children.size()) {
            defaults = std::equal(d->second.begin(), d->second.end(), n.children.begin());
        }
        std::string head = n.name;
        if (any) {
            if (distinct_symbol_args(n.children)) {
                head += "_" + derivative_suffix(n.orders, n.children);
            } else {
                head += "[";
                for (std::size_t i = 0; i < n.orders.size(); ++i) {
                    if (i) head += ",";
                    head += std::to_string(n.orders[i]);
                }
                head += "]";
                defaults = false;
            }
        }
        if (defaults) return head;
        return head + "(" + args + ")";
    }

    // Base of a power, parenthesised unless atomic.
    std::string base_text(const Expr& b)
    {
        switch (b.kind()) {
        case Kind::Symbol:
        case Kind::Function:
        case Kind::Elementary:
            return print(b);
        case Kind::Number:
            if (b.number() > 0 && b.number().get_den() == 1) return print(b);
            return "(" + print(b) + ")";
        default:
            return "(" + print(b) + ")";
        }
    }

    std::string power_text(const Expr& base, const Rational& e)
    {
        std::string s = base_text(base);
        if (e == 1) return s;
        if (e.get_den() == 1 && e > 0) return s + "^" + to_string(e);
        return s + "^(" + to_string(e) + ")";
    }

    std::string product_text(const Expr& e)
    {
        Rational coeff(1);
        std::vector<Expr> factors;
        if (e.kind() == Kind::Product) {
            coeff = e.node().value;
            factors = e.children();
        } else {
            factors = {e};
        }
        std::vector<std::string> num;
        std::vector<std::string> den;
        bool den_needs_parens = false;
        for (const Expr& f : factors) {
            auto [b, x] = as_power(f);
            if (x > 0) {
                num.push_back(power_text(b, x));
            } else {
                den.push_back(power_text(b, -x));
            }
        }
        Rational a = abs(coeff);
        std::string sign = coeff < 0 ? "-" : "";
        if (a.get_num() != 1 || num.empty()) num.insert(num.begin(), a.get_num().get_str());
        if (a.get_den() != 1) den.insert(den.begin(), a.get_den().get_str());
        std::string s = sign + join(num, "*");
        if (!den.empty()) {
            den_needs_parens = den.size() > 1;
            s += den_needs_parens ? "/(" + join(den, "*") + ")" : "/" + den.front();
        }
        return s;
    }

    std::string sum_text(const Expr& e)
    {
        std::string s;
        bool first = true;
        for (const Expr& t : e.children()) {
            std::string ts = print(t);
            bool negative = !ts.empty() && ts[0] == '-';
            if (first) {
                s = ts;
            } else if (negative) {
                s += " - " + ts.substr(1);
            } else {
                s += " + " + ts;
            }
            first = false;
        }
        return s;
    }

    static std::string join(const std::vector<std::string>& parts, const char* sep)
    {
        std::string s;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) s += sep;
            s += parts[i];
        }
        return s;
    }

    const PrintOptions& opts_;
};

}  // namespace

std::string to_string(const Expr& e, const PrintOptions& options)
{
    Printer p(options);
    return p.print(e);
}

}  // namespace mujet
