#pragma once

#include <functional>
#include <set>
#include <string>

#include "heb/ast.hpp"

namespace heb::detail {

// Rebuilds `e` with every identifier, call name and bound variable passed
// through `f`.  Used for renaming instantiation, where binding is irrelevant.
ExprPtr rename_all(const ExprPtr& e, const std::function<std::string(const std::string&)>& f);

// Scope-aware rewrite: `f(name, loc, isCall)` maps free identifiers and
// call names; names bound by an enclosing quantified union (or listed in
// `bound`) are left alone.
ExprPtr resolve_free(const ExprPtr& e,
                     const std::function<std::string(const std::string&, const SourceLoc&, bool)>& f,
                     std::set<std::string> bound = {});

}  // namespace heb::detail
