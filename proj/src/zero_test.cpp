#include "mujet/zero_test.hpp"

#include <boost/multiprecision/mpfr.hpp>

#include <map>
#include <random>
#include <unordered_map>

namespace mujet {

using Real = boost::multiprecision::mpfr_float_50;

void ZeroTestConfig::validate() const
{
    if (trials < 1) throw std::invalid_argument("zero test needs at least one trial");
    if (!(tolerance > 0)) throw std::invalid_argument("zero test tolerance must be positive");
    if (window_high <= window_low) throw std::invalid_argument("empty sampling window");
    if (resample_limit < 0) throw std::invalid_argument("negative resample limit");
}

// ---- exact tier -----------------------------------------------------------

namespace {

constexpr std::size_t kMaxNumeratorTerms = 20000;

std::vector<Expr> factors_of(const Expr& monomial)
{
    if (monomial.kind() == Kind::Product) return monomial.children();
    if (monomial.is_number()) return {};
    return {monomial};
}

}  // namespace

Expr rational_numerator(const Expr& e)
{
    Expr num = e;
    for (int iter = 0; iter < 8 && !num.is_zero(); ++iter) {
        std::vector<Expr> bases;
        ExprMap<long> need;
        for (const Expr& t : terms_of(num)) {
            for (const Expr& f : factors_of(split_coefficient(t).second)) {
                if (f.kind() != Kind::Power) continue;
                const Rational& x = f.node().value;
                if (x >= 0 || x.get_den() != 1) continue;
                long k = -x.get_num().get_si();
                auto [it, inserted] = need.try_emplace(f.children()[0], k);
                if (inserted) {
                    bases.push_back(f.children()[0]);
                } else if (k > it->second) {
                    it->second = k;
                }
            }
        }
        if (bases.empty()) break;
        std::vector<Expr> out;
        for (const Expr& t : terms_of(num)) {
            std::vector<Expr> f{t};
            for (const Expr& b : bases) {
                for (long k = 0; k < need[b]; ++k) f.push_back(b);
            }
            out.push_back(mul(std::move(f)));
        }
        num = add(std::move(out));
        if (terms_of(num).size() > kMaxNumeratorTerms) break;
    }
    return num;
}

bool is_exact_zero(const Expr& e)
{
    if (e.is_zero()) return true;
    return rational_numerator(e).is_zero();
}

// ---- numeric tier ---------------------------------------------------------

namespace {

struct Singular {};

std::string format(const Real& v) { return v.str(17, std::ios_base::scientific); }

Real to_real(const Rational& r)
{
    Real v;
    mpfr_set_q(v.backend().data(), r.get_mpq_t(), MPFR_RNDN);
    return v;
}

class Evaluator {
public:
    Evaluator(const ZeroTestConfig& cfg, std::uint64_t salt, std::uint64_t attempt)
        : cfg_(cfg), salt_(salt), attempt_(attempt)
    {
        Rational width = cfg.window_high - cfg.window_low;
        Rational steps = width * 1000;
        steps_ = static_cast<std::uint64_t>(mpz_class(steps.get_num() / steps.get_den()).get_ui());
        if (steps_ < 2) steps_ = 2;
    }

    // Value and an absolute-value majorant used as the relative scale.
    std::pair<Real, Real> eval(const Expr& e)
    {
        auto it = memo_.find(e.get());
        if (it != memo_.end()) return it->second;
        auto r = compute(e);
        memo_.emplace(e.get(), r);
        return r;
    }

    const std::map<std::string, Real>& assignment() const { return assignment_; }

private:
    Real sample(std::size_t key, const std::string& label)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg_.seed), static_cast<std::uint32_t>(cfg_.seed >> 32),
                          static_cast<std::uint32_t>(salt_), static_cast<std::uint32_t>(salt_ >> 32),
                          static_cast<std::uint32_t>(attempt_), static_cast<std::uint32_t>(key),
                          static_cast<std::uint32_t>(static_cast<std::uint64_t>(key) >> 32)};
        std::mt19937_64 rng(seq);
        std::uint64_t n = 1 + rng() % (steps_ - 1);
        Rational v = cfg_.window_low + Rational(static_cast<unsigned long>(n), 1000UL);
        Real r = to_real(v);
        assignment_.emplace(label, r);
        return r;
    }

    std::pair<Real, Real> compute(const Expr& e)
    {
        const Node& n = e.node();
        switch (n.kind) {
        case Kind::Number: {
            Real v = to_real(n.value);
            return {v, abs(v)};
        }
        case Kind::Symbol: {
            Real v = sample(std::hash<std::string>{}(n.name), n.name);
            return {v, abs(v)};
        }
        case Kind::Function: {
            Real v = sample(e.hash(), to_string(e));
            return {v, abs(v)};
        }
        case Kind::Elementary: {
            Real a = eval(n.children[0]).first;
            Real v;
            switch (n.fn) {
            case ElementaryFn::Exp:
                v = exp(a);
                break;
            case ElementaryFn::Log:
                if (a <= 0) throw Singular{};
                v = log(a);
                break;
            case ElementaryFn::Sin:
                v = sin(a);
                break;
            case ElementaryFn::Cos:
                v = cos(a);
                break;
            case ElementaryFn::Tan:
                if (abs(cos(a)) < Real(1e-30)) throw Singular{};
                v = tan(a);
                break;
            case ElementaryFn::Arctan:
                v = atan(a);
                break;
            }
            if (!boost::multiprecision::isfinite(v)) throw Singular{};
            return {v, abs(v)};
        }
        case Kind::Power: {
            auto [b, bs] = eval(n.children[0]);
            const Rational& x = n.value;
            Real v;
            if (x.get_den() == 1) {
                long k = x.get_num().get_si();
                if (b == 0 && k < 0) throw Singular{};
                v = pow(b, k);
                if (k > 0) {
                    Real s = pow(bs, k);
                    return {v, s};
                }
            } else {
                if (b <= 0) throw Singular{};
                v = exp(to_real(x) * log(b));
            }
            if (!boost::multiprecision::isfinite(v)) throw Singular{};
            return {v, abs(v)};
        }
        case Kind::Product: {
            Real v = to_real(n.value);
            Real s = abs(v);
            for (const Expr& c : n.children) {
                auto [cv, cs] = eval(c);
                v *= cv;
                s *= cs;
            }
            return {v, s};
        }
        case Kind::Sum: {
            Real v = 0;
            Real s = 0;
            for (const Expr& c : n.children) {
                auto [cv, cs] = eval(c);
                v += cv;
                s += cs;
            }
            return {v, s};
        }
        }
        return {Real(0), Real(0)};
    }

    const ZeroTestConfig& cfg_;
    std::uint64_t salt_;
    std::uint64_t attempt_;
    std::uint64_t steps_ = 1000;
    std::unordered_map<const Node*, std::pair<Real, Real>> memo_;
    std::map<std::string, Real> assignment_;
};

}  // namespace

ZeroVerdict is_zero(const Expr& e, const ZeroTestConfig& cfg)
{
    cfg.validate();
    ZeroVerdict verdict;
    if (is_exact_zero(e)) {
        verdict.tier = ZeroTier::ZeroExact;
        return verdict;
    }
    const Real tol = Real(cfg.tolerance);
    int done = 0;
    int failures = 0;
    for (std::uint64_t attempt = 0; done < cfg.trials; ++attempt) {
        Evaluator ev(cfg, e.hash(), attempt);
        std::pair<Real, Real> r;
        try {
            r = ev.eval(e);
        } catch (const Singular&) {
            if (++failures > cfg.resample_limit) {
                throw EvaluationError("evaluation of " + to_string(e).substr(0, 200) +
                                      " kept hitting singular points");
            }
            continue;
        }
        ++done;
        const Real& v = r.first;
        const Real& scale = r.second;
        if (abs(v) > tol * scale) {
            verdict.tier = ZeroTier::NonZero;
            verdict.trials = done;
            for (const auto& [k, x] : ev.assignment()) verdict.witness.assignment.emplace_back(k, format(x));
            verdict.witness.value = format(v);
            verdict.witness.scale = format(scale);
            return verdict;
        }
    }
    verdict.tier = ZeroTier::ZeroNumeric;
    verdict.trials = done;
    return verdict;
}

std::string sample_value(const Expr& e, const ZeroTestConfig& cfg, int trial)
{
    Evaluator ev(cfg, e.hash(), static_cast<std::uint64_t>(trial));
    try {
        return format(ev.eval(e).first);
    } catch (const Singular&) {
        return "singular";
    }
}

}  // namespace mujet
