#include "rewrite.hpp"

namespace heb::detail {

ExprPtr rename_all(const ExprPtr& e, const std::function<std::string(const std::string&)>& f) {
  if (!e) return e;
  auto n = std::make_shared<Expr>(*e);
  if (e->kind == ExprKind::Ident || e->kind == ExprKind::Call || e->kind == ExprKind::QUnion)
    n->text = f(e->text);
  for (auto& a : n->args) a = rename_all(a, f);
  return n;
}

ExprPtr resolve_free(const ExprPtr& e,
                     const std::function<std::string(const std::string&, const SourceLoc&, bool)>& f,
                     std::set<std::string> bound) {
  if (!e) return e;
  auto n = std::make_shared<Expr>(*e);
  if (e->kind == ExprKind::QUnion) {
    // The range's left-hand variable and the body see the binder.
    bound.insert(e->text);
    for (auto& a : n->args) a = resolve_free(a, f, bound);
    return n;
  }
  if (e->kind == ExprKind::Ident && !bound.count(e->text)) n->text = f(e->text, e->loc, false);
  if (e->kind == ExprKind::Call && !bound.count(e->text)) n->text = f(e->text, e->loc, true);
  for (auto& a : n->args) a = resolve_free(a, f, bound);
  return n;
}

}  // namespace heb::detail
