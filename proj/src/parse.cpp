#include "mujet/parse.hpp"

#include <cctype>

namespace mujet {

void SymbolTable::add_parameter(const std::string& name) { parameters_.insert_or_assign(name, parameter(name)); }

void SymbolTable::add_function(const std::string& name, std::vector<Expr> default_args)
{
    functions_.insert_or_assign(name, std::move(default_args));
}

void SymbolTable::add_alias(const std::string& name, Expr value) { aliases_.insert_or_assign(name, std::move(value)); }

const std::vector<Expr>* SymbolTable::function_defaults(const std::string& name) const
{
    auto it = functions_.find(name);
    return it == functions_.end() ? nullptr : &it->second;
}

const Expr* SymbolTable::alias(const std::string& name) const
{
    auto it = aliases_.find(name);
    return it == aliases_.end() ? nullptr : &it->second;
}

std::vector<Expr> SymbolTable::parameters() const
{
    std::vector<Expr> out;
    for (const auto& [n, e] : parameters_) out.push_back(e);
    return out;
}

PrintOptions SymbolTable::print_options() const
{
    PrintOptions o;
    for (const auto& [n, args] : functions_) o.default_args[n] = args;
    return o;
}

namespace {

class Parser {
public:
    Parser(const std::string& text, const SymbolTable& table) : s_(text), table_(table) {}

    Expr run()
    {
        Expr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError("syntax error: " + msg, pos_); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const { throw ParseError(msg, at); }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool peek(char c)
    {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    bool eat(char c)
    {
        if (!peek(c)) return false;
        ++pos_;
        return true;
    }

    void expect(char c)
    {
        if (!eat(c)) {
            if (pos_ >= s_.size()) fail(std::string("expected '") + c + "' before end of input");
            fail(std::string("expected '") + c + "'");
        }
    }

    Expr expr()
    {
        std::vector<Expr> terms{term()};
        for (;;) {
            if (eat('+')) {
                terms.push_back(term());
            } else if (eat('-')) {
                terms.push_back(-term());
            } else {
                break;
            }
        }
        return terms.size() == 1 ? terms[0] : add(std::move(terms));
    }

    Expr term()
    {
        Expr e = unary();
        for (;;) {
            if (eat('*')) {
                e = e * unary();
            } else if (peek('/')) {
                ++pos_;
                std::size_t at = pos_;
                Expr d = unary();
                if (d.is_zero()) fail_at("division by zero", at);
                e = e / d;
            } else {
                break;
            }
        }
        return e;
    }

    Expr unary()
    {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        return power();
    }

    Expr power()
    {
        Expr base = primary();
        if (eat('^')) {
            skip();
            std::size_t at = pos_;
            Expr ex = unary();
            if (!ex.is_number()) fail_at("exponent must be a rational constant", at);
            try {
                return pow(base, ex.number());
            } catch (const SingularError& err) {
                fail_at(err.what(), at);
            }
        }
        return base;
    }

    Expr primary()
    {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            return Expr(Rational(mpz_class(s_.substr(start, pos_ - start))));
        }
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::vector<Expr> arguments()
    {
        std::vector<Expr> args;
        expect('(');
        if (eat(')')) return args;
        args.push_back(expr());
        while (eat(',')) args.push_back(expr());
        expect(')');
        return args;
    }

    Expr identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        std::string base = s_.substr(start, pos_ - start);
        std::string suffix;
        bool has_suffix = false;
        if (pos_ < s_.size() && s_[pos_] == '_') {
            has_suffix = true;
            ++pos_;
            std::size_t ss = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            suffix = s_.substr(ss, pos_ - ss);
            if (suffix.empty()) fail_at("malformed jet-variable suffix in '" + base + "_'", start);
        }
        const std::string full = has_suffix ? base + "_" + suffix : base;

        if (const Expr* a = table_.alias(full)) return *a;
        if (table_.is_parameter(full)) return parameter(full);

        if (!has_suffix && peek('(')) {
            static const std::map<std::string, ElementaryFn> fns{
                {"exp", ElementaryFn::Exp}, {"log", ElementaryFn::Log},       {"sin", ElementaryFn::Sin},
                {"cos", ElementaryFn::Cos}, {"tan", ElementaryFn::Tan},       {"arctan", ElementaryFn::Arctan}};
            auto f = fns.find(base);
            if (f != fns.end() || base == "sqrt") {
                std::size_t at = pos_;
                auto args = arguments();
                if (args.size() != 1) fail_at(base + " takes one argument", at);
                try {
                    if (base == "sqrt") return mujet::sqrt(args[0]);
                    return elementary(f->second, args[0]);
                } catch (const SingularError& err) {
                    fail_at(err.what(), at);
                }
            }
        }

        if (const std::vector<Expr>* defaults = table_.function_defaults(base)) {
            return function_application(base, *defaults, has_suffix, suffix, start);
        }

        if (const auto& bundle = table_.bundle()) {
            if (!has_suffix) {
                int i = bundle->independent_index(base);
                if (i >= 0) return bundle->x(i);
            }
            int a = bundle->dependent_index(base);
            if (a >= 0) {
                if (!has_suffix) return bundle->u(a);
                auto J = bundle->parse_suffix(suffix);
                if (!J) fail_at("malformed jet-variable suffix '" + suffix + "' in '" + full + "'", start);
                return bundle->jet(a, *J);
            }
        }
        fail_at("undeclared symbol '" + full + "'", start);
    }

    Expr function_application(const std::string& name, const std::vector<Expr>& defaults, bool has_suffix,
                              const std::string& suffix, std::size_t start)
    {
        std::vector<int> orders(defaults.size(), 0);
        bool explicit_orders = false;
        if (!has_suffix && peek('[')) {
            ++pos_;
            orders.clear();
            explicit_orders = true;
            do {
                skip();
                std::size_t ds = pos_;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
                if (ds == pos_) fail("expected derivative order");
                orders.push_back(std::stoi(s_.substr(ds, pos_ - ds)));
            } while (eat(','));
            expect(']');
        }
        std::vector<Expr> args = defaults;
        std::size_t args_at = pos_;
        if (peek('(')) {
            args = arguments();
        } else if (explicit_orders) {
            fail("expected argument list after derivative orders");
        }
        if (args.size() != defaults.size()) {
            fail_at("function '" + name + "' expects " + std::to_string(defaults.size()) + " arguments", args_at);
        }
        if (explicit_orders && orders.size() != args.size()) {
            fail_at("derivative orders do not match arity of '" + name + "'", start);
        }
        if (has_suffix) {
            std::size_t p = 0;
            while (p < suffix.size()) {
                int best = -1;
                std::size_t best_len = 0;
                for (std::size_t k = 0; k < args.size(); ++k) {
                    if (!args[k].is_symbol()) continue;
                    const std::string& n = args[k].name();
                    if (n.size() > best_len && suffix.compare(p, n.size(), n) == 0) {
                        best = static_cast<int>(k);
                        best_len = n.size();
                    }
                }
                if (best < 0) {
                    fail_at("malformed derivative suffix '" + suffix + "' for '" + name + "'", start);
                }
                ++orders[static_cast<std::size_t>(best)];
                p += best_len;
            }
        }
        return function(name, std::move(orders), std::move(args));
    }

    const std::string& s_;
    const SymbolTable& table_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse(const std::string& text, const SymbolTable& table)
{
    Parser p(text, table);
    return p.run();
}

}  // namespace mujet
