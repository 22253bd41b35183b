#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "uext/structure.hpp"

namespace uext::modal {
struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;
}  // namespace uext::modal

namespace uext::fo {

/// Terms are variables or hub constants; constants are spelled d_<hub>.
struct Term {
    enum class Kind { Var, Const } kind;
    std::string name;  // variable name, or the full d_<hub> spelling

    static Term var(std::string n) { return {Kind::Var, std::move(n)}; }
    static Term constant(std::string n) { return {Kind::Const, std::move(n)}; }
    bool operator==(const Term&) const = default;
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// First-order formulas over one binary relation R, or its hub
/// decomposition {S, P}, with equality and hub constants. Member is an
/// internal atom kind produced by the standard translation: it tests a
/// term against a named node set supplied at evaluation time.
struct Formula {
    enum class Kind { Rel, Eq, Member, Not, And, Or, Implies, Exists, Forall };

    Kind kind;
    RelKind rel = RelKind::R;       // Rel
    Term lhs, rhs;                  // Rel, Eq; Member uses lhs only
    std::string name;               // Member: set name; Exists/Forall: bound variable
    FormulaPtr a, b;                // children
};

FormulaPtr rel(RelKind r, Term t1, Term t2);
FormulaPtr eq(Term t1, Term t2);
FormulaPtr member(std::string set_name, Term t);
FormulaPtr neg(FormulaPtr f);
FormulaPtr conj(FormulaPtr a, FormulaPtr b);
FormulaPtr disj(FormulaPtr a, FormulaPtr b);
FormulaPtr implies(FormulaPtr a, FormulaPtr b);
FormulaPtr exists(std::string v, FormulaPtr body);
FormulaPtr forall(std::string v, FormulaPtr body);
/// Left-folds a conjunction / disjunction; empty input yields the neutral
/// sentence (forall x. x = x) resp. its negation.
FormulaPtr conj_all(const std::vector<FormulaPtr>& fs);
FormulaPtr disj_all(const std::vector<FormulaPtr>& fs);

std::set<std::string> free_vars(const FormulaPtr& f);
int quantifier_rank(const FormulaPtr& f);
/// True iff the formula mentions S or P (as opposed to R only).
bool uses_sp(const FormulaPtr& f);
std::string to_string(const FormulaPtr& f);

FormulaPtr parse_fo(const std::string& text);

struct EvalOptions {
    long long max_steps = 10'000'000;
};

/// Tarskian truth by exhaustive quantifier expansion. The valuation is
/// consulted only by Member atoms. Throws LimitError past max_steps.
bool eval(const Structure& a, const FormulaPtr& f,
          const std::map<std::string, int>& assignment = {},
          const Valuation* valuation = nullptr, const EvalOptions& opt = {});

namespace detail {
struct CompiledEval;
}

/// Compiles a formula against one structure for repeated evaluation under
/// varying assignments of its free variables. The step cap applies per
/// call. eval() is a one-shot wrapper around this.
class Evaluator {
public:
    Evaluator(const Structure& a, const FormulaPtr& f, std::vector<std::string> free_var_order,
              const Valuation* valuation = nullptr, const EvalOptions& opt = {});
    ~Evaluator();
    Evaluator(Evaluator&&) noexcept;

    /// Truth under the assignment free_var_order[i] := values[i].
    bool at(const std::vector<int>& values);

private:
    std::unique_ptr<detail::CompiledEval> impl_;
    int root_ = -1;
    size_t free_count_ = 0;
};

/// Rewrites an R-formula into the {S, P} signature: R(t1,t2) becomes
/// S(t1,t2) | P(t1,t2), everything else is carried through homomorphically.
FormulaPtr sharp_translate(const FormulaPtr& f);

/// Standard translation of a modal formula with free variable x; variables
/// of the modal formula become Member atoms against the valuation.
FormulaPtr standard_translation(const modal::FormulaPtr& f, const std::string& x);

struct EfOptions {
    int max_rounds = 4;
};

/// Duplicator wins the q-round Ehrenfeucht-Fraissé game between a and b,
/// i.e. a and b agree on all sentences of quantifier rank <= q. Constants
/// (hub names) must match between the two structures.
bool ef_equivalent(const Structure& a, const Structure& b, int rounds, const EfOptions& opt = {});

}  // namespace uext::fo
