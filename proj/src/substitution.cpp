#include "mujet/substitution.hpp"

namespace mujet {

namespace {

bool distinct_symbols(const std::vector<Expr>& args)
{
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (!args[i].is_symbol()) return false;
        for (std::size_t j = 0; j < i; ++j) {
            if (args[i] == args[j]) return false;
        }
    }
    return true;
}

bool dominated(const std::vector<int>& small, const std::vector<int>& big)
{
    if (small.size() != big.size()) return false;
    for (std::size_t i = 0; i < small.size(); ++i) {
        if (small[i] > big[i]) return false;
    }
    return true;
}

}  // namespace

SubstitutionSystem::SubstitutionSystem(std::vector<Rule> rules, bool closure, std::optional<JetBundle> bundle)
    : closure_(closure), bundle_(std::move(bundle))
{
    if (closure_ && !bundle_) throw std::invalid_argument("closed substitution system needs a jet bundle");
    for (auto& r : rules) add(std::move(r));
}

void SubstitutionSystem::add(Rule rule)
{
    const Expr& t = rule.target;
    if (t.kind() == Kind::Function) {
        if (!distinct_symbols(t.children())) {
            throw std::invalid_argument("function rule target " + to_string(t) + " must have distinct symbol arguments");
        }
    } else if (t.kind() != Kind::Symbol) {
        throw std::invalid_argument("rule target " + to_string(t) + " is not a symbol or function application");
    }
    rules_.push_back(std::move(rule));
}

std::optional<Expr> SubstitutionSystem::lookup(const Expr& node) const
{
    for (const Rule& r : rules_) {
        if (r.target == node) return r.replacement;
    }
    if (!closure_) return std::nullopt;
    const Node& n = node.node();
    const Rule* best = nullptr;
    int best_order = -1;
    for (const Rule& r : rules_) {
        const Node& t = r.target.node();
        if (n.kind == Kind::Symbol && n.symbol_kind == SymbolKind::Jet) {
            if (t.kind != Kind::Symbol || t.symbol_kind != SymbolKind::Jet || t.index != n.index) continue;
        } else if (n.kind == Kind::Function) {
            if (t.kind != Kind::Function || t.name != n.name || t.children != n.children) continue;
        } else {
            continue;
        }
        if (!dominated(t.orders, n.orders)) continue;
        int o = order_of(t.orders);
        if (o > best_order) {
            best = &r;
            best_order = o;
        }
    }
    if (best == nullptr) return std::nullopt;
    const Node& t = best->target.node();
    Expr e = best->replacement;
    for (std::size_t i = 0; i < n.orders.size(); ++i) {
        for (int k = t.orders[i]; k < n.orders[i]; ++k) {
            if (n.kind == Kind::Function) {
                e = diff(e, n.children[i]);
            } else {
                e = total_derivative_unbounded(e, static_cast<int>(i), *bundle_);
            }
        }
    }
    return e;
}

Expr SubstitutionSystem::apply(const Expr& e) const
{
    if (rules_.empty()) return e;
    std::uint64_t mask = 0;
    for (const Rule& r : rules_) mask |= r.target.symbol_mask();
    // Derived targets carry other names than their rules.
    if (closure_) mask = ~std::uint64_t{0};
    Expr cur = e;
    for (int pass = 0;; ++pass) {
        if ((cur.symbol_mask() & mask) == 0) return cur;
        ExprMap<Expr> map;
        for (const Expr& s : free_symbols(cur)) {
            if (auto r = lookup(s)) map.emplace(s, *r);
        }
        for (const Expr& f : function_nodes(cur)) {
            if (auto r = lookup(f)) map.emplace(f, *r);
        }
        if (map.empty()) return cur;
        if (pass >= pass_limit) {
            throw CyclicRules("substitution did not reach a fixpoint after " + std::to_string(pass_limit) +
                              " passes");
        }
        cur = replace(cur, map);
    }
}

Expr substitute(const Expr& e, const SubstitutionSystem& rules) { return rules.apply(e); }

}  // namespace mujet
