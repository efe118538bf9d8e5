#include "fjq/weak.hpp"

#include <optional>

#include "fjq/error.hpp"

namespace fjq {

namespace {

bool covers(const Symbol& lead, const Symbol& s) {
  if (!lead.same_base(s)) return false;
  for (int k = 0; k < 3; ++k)
    if (s.tags[k] < lead.tags[k]) return false;
  return true;
}

int count_occurrences(const Expr& e, const Symbol& s) {
  int n = 0;
  for (const auto& [m, c] : e.terms())
    for (const auto& f : m.fields)
      if (f == s) ++n;
  return n;
}

}  // namespace

bool WeakReducer::add(const Expr& constraint) {
  Expr c = reduce(constraint);
  if (c.is_zero()) return false;
  std::optional<Symbol> best;
  Expr best_coef;
  for (const auto& [m, q] : c.terms()) {
    if (m.fields.size() != 1) continue;
    const Symbol& s = m.fields[0];
    if (count_occurrences(c, s) != 1) continue;
    if (!best || s.order() > best->order() || (s.order() == best->order() && *best < s)) {
      best = s;
      Monomial pm;
      pm.params = m.params;
      best_coef = Expr::term(pm, q);
    }
  }
  if (!best) return false;
  Expr rest = c - best_coef * Expr::symbol(*best);
  rules_.push_back({*best, -(best_coef.inverse_monomial() * rest)});
  return true;
}

Expr WeakReducer::reduce(const Expr& e) const {
  Expr cur = e;
  for (int iter = 0; iter < 400; ++iter) {
    bool changed = false;
    Expr next;
    for (const auto& [m, q] : cur.terms()) {
      std::size_t hit = m.fields.size();
      const Rule* rule = nullptr;
      for (std::size_t p = 0; p < m.fields.size() && !rule; ++p)
        for (const auto& r : rules_)
          if (covers(r.lead, m.fields[p])) {
            hit = p;
            rule = &r;
            break;
          }
      if (!rule) {
        next += Expr::term(m, q);
        continue;
      }
      changed = true;
      const Symbol& s = m.fields[hit];
      Monomial rest;
      rest.params = m.params;
      rest.fields = m.fields;
      rest.fields.erase(rest.fields.begin() + static_cast<long>(hit));
      std::array<int, 3> extra{s.tags[0] - rule->lead.tags[0], s.tags[1] - rule->lead.tags[1], s.tags[2] - rule->lead.tags[2]};
      next += Expr::term(rest, q) * apply_partials(extra, rule->rhs);
    }
    cur = std::move(next);
    if (!changed) return cur;
  }
  throw Error(ErrorKind::IterationBound, "weak reduction did not reach a fixpoint");
}

}  // namespace fjq
