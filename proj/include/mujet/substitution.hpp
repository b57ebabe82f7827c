#ifndef MUJET_SUBSTITUTION_HPP
#define MUJET_SUBSTITUTION_HPP

#include <optional>
#include <vector>

#include "mujet/expr.hpp"
#include "mujet/jet_space.hpp"

namespace mujet {

class CyclicRules : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// target -> replacement. Targets are jet variables, parameters, independent
/// symbols, or function applications over distinct symbols.
struct Rule {
    Expr target;
    Expr replacement;
};

/// Ordered oriented rules, optionally closed under total differentiation.
///
/// With closure, a jet u^a_K with no rule of its own is rewritten through the
/// rule u^a_J -> e with the largest |J| such that J <= K componentwise, as
/// D_{K-J} e. Function targets close under partial derivatives in their
/// argument symbols.
class SubstitutionSystem {
public:
    SubstitutionSystem() = default;
    SubstitutionSystem(std::vector<Rule> rules, bool closure, std::optional<JetBundle> bundle = std::nullopt);

    void add(Rule rule);
    const std::vector<Rule>& rules() const { return rules_; }
    bool closure() const { return closure_; }
    bool empty() const { return rules_.empty(); }
    const std::optional<JetBundle>& bundle() const { return bundle_; }

    /// Rewrites to the fixpoint; throws CyclicRules past pass_limit passes.
    Expr apply(const Expr& e) const;

    int pass_limit = 64;

private:
    std::optional<Expr> lookup(const Expr& node) const;

    std::vector<Rule> rules_;
    bool closure_ = false;
    std::optional<JetBundle> bundle_;
};

Expr substitute(const Expr& e, const SubstitutionSystem& rules);

}  // namespace mujet

#endif
