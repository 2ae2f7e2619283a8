#include "heb/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace heb {

bool mentions_any(const ExprPtr& e, const std::vector<std::string>& names) {
  if (!e) return false;
  if ((e->kind == ExprKind::Ident) && std::find(names.begin(), names.end(), e->text) != names.end())
    return true;
  for (const auto& a : e->args)
    if (mentions_any(a, names)) return true;
  return false;
}

double locate_crossing(const std::function<bool(double)>& g, double lo, double hi, double epsT) {
  if (g(lo)) throw std::logic_error("locate_crossing: guard already holds at the lower bound");
  if (!g(hi)) throw std::logic_error("locate_crossing: guard does not hold at the upper bound");
  while (hi - lo > epsT) {
    const double mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    if (g(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Time-only guards

namespace {

bool is_relational(BinOp op) {
  return op == BinOp::Eq || op == BinOp::Neq || op == BinOp::Lt || op == BinOp::Le || op == BinOp::Gt ||
         op == BinOp::Ge;
}

bool mentions(const ExprPtr& e, const std::string& name) { return mentions_any(e, {name}); }

// Solves `lhs = rhs` for the time variable when it sits inside a chain of
// additions, subtractions and negations.  Returns the expression for t.
ExprPtr isolate(const ExprPtr& lhs, const ExprPtr& rhs, const std::string& tv) {
  const bool inL = mentions(lhs, tv), inR = mentions(rhs, tv);
  if (inL && inR) return nullptr;
  if (!inL) return inR ? isolate(rhs, lhs, tv) : nullptr;
  if (lhs->kind == ExprKind::Ident) return rhs;
  if (lhs->kind == ExprKind::Unary && lhs->unop == UnOp::Neg)
    return isolate(lhs->args[0], make_unary(UnOp::Neg, rhs), tv);
  if (lhs->kind != ExprKind::Binary) return nullptr;
  const ExprPtr& a = lhs->args[0];
  const ExprPtr& b = lhs->args[1];
  if (lhs->binop == BinOp::Add) {
    if (mentions(a, tv)) return isolate(a, make_binary(BinOp::Sub, rhs, b), tv);
    return isolate(b, make_binary(BinOp::Sub, rhs, a), tv);
  }
  if (lhs->binop == BinOp::Sub) {
    if (mentions(a, tv)) return isolate(a, make_binary(BinOp::Add, rhs, b), tv);
    return isolate(b, make_binary(BinOp::Sub, a, rhs), tv);
  }
  return nullptr;
}

std::optional<double> eval_at(const Expr& e, const Scope& state, const std::string& tv, double t) {
  OverlayScope s(&state);
  s.bind(tv, Value::real(t));
  auto v = try_eval(e, s, {});
  if (!v || !v->is_numeric()) return std::nullopt;
  return v->as_real();
}

void collect_breakpoints(const ExprPtr& e, const Scope& state, const std::string& tv, std::vector<double>& out) {
  if (!e || !mentions(e, tv)) return;
  if (e->kind == ExprKind::Binary && is_relational(e->binop)) {
    if (ExprPtr root = isolate(e->args[0], e->args[1], tv)) {
      if (auto r = eval_at(*root, state, tv, 0.0)) out.push_back(*r);
      return;
    }
    // Affine fallback from two evaluations of the residual.
    auto f0 = eval_at(*e->args[0], state, tv, 0.0), g0 = eval_at(*e->args[1], state, tv, 0.0);
    auto f1 = eval_at(*e->args[0], state, tv, 1.0), g1 = eval_at(*e->args[1], state, tv, 1.0);
    if (f0 && g0 && f1 && g1) {
      const double r0 = *f0 - *g0, slope = (*f1 - *g1) - r0;
      if (slope != 0.0) out.push_back(-r0 / slope);
    }
    return;
  }
  if (e->kind == ExprKind::Binary && (e->binop == BinOp::In || e->binop == BinOp::NotIn) &&
      e->args[1]->kind == ExprKind::Interval) {
    for (const auto& bound : e->args[1]->args)
      if (!mentions(bound, tv))
        if (auto r = eval_at(*bound, state, tv, 0.0)) out.push_back(*r);
    return;
  }
  for (const auto& a : e->args) collect_breakpoints(a, state, tv, out);
}

}  // namespace

std::vector<double> time_breakpoints(const Expr& g, const Scope& state, const std::string& timeVar) {
  std::vector<double> out;
  collect_breakpoints(std::make_shared<Expr>(g), state, timeVar, out);
  out.erase(std::remove_if(out.begin(), out.end(), [](double x) { return !std::isfinite(x); }), out.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<TimeWindow> next_true_window(const Expr& g, const Scope& state, const std::string& timeVar,
                                           double from, bool includeFrom, const EvalOptions& opt) {
  std::vector<double> bps;
  for (double b : time_breakpoints(g, state, timeVar))
    if (b > from) bps.push_back(b);

  struct Piece {
    double lo, hi;  // point when lo == hi
    bool point;
  };
  std::vector<Piece> pieces;
  if (includeFrom) pieces.push_back({from, from, true});
  double prev = from;
  for (double b : bps) {
    pieces.push_back({prev, b, false});
    pieces.push_back({b, b, true});
    prev = b;
  }
  pieces.push_back({prev, std::numeric_limits<double>::infinity(), false});

  auto holds = [&](const Piece& p) {
    double at = p.point ? p.lo : (std::isinf(p.hi) ? p.lo + 1.0 : p.lo + (p.hi - p.lo) / 2);
    OverlayScope s(&state);
    s.bind(timeVar, Value::real(at));
    auto v = try_eval(g, s, opt);
    return v && v->kind() == ValueKind::Bool && v->as_bool();
  };

  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (!holds(pieces[i])) continue;
    TimeWindow w;
    w.start = pieces[i].lo;
    w.startClosed = pieces[i].point;
    std::size_t j = i;
    while (j + 1 < pieces.size() && holds(pieces[j + 1])) ++j;
    if (j + 1 == pieces.size()) {
      w.end = std::numeric_limits<double>::infinity();
      w.endClosed = false;
    } else if (pieces[j].point) {
      w.end = pieces[j].lo;
      w.endClosed = true;
    } else {
      w.end = pieces[j].hi;
      w.endClosed = false;
    }
    return w;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Integration

namespace {

void collect_eq_atoms(const ExprPtr& e, std::vector<const Expr*>& out) {
  if (!e) return;
  if (e->kind == ExprKind::Binary && e->binop == BinOp::Eq) out.push_back(e.get());
  for (const auto& a : e->args) collect_eq_atoms(a, out);
}

class Integrator {
 public:
  Integrator(const OdeSystem& sys, const Valuation& start, const NumericConfig& cfg)
      : sys_(sys), cfg_(cfg), work_(start) {
    for (const auto& v : sys.stateVars) {
      if (!work_.lookup(v)) work_.set(v, Value::real(0.0));
    }
    for (const auto& [v, _] : sys.directAssigns)
      if (!work_.lookup(v)) work_.set(v, Value::real(0.0));
    if (!work_.lookup(sys.timeVar)) work_.set(sys.timeVar, Value::real(start.time));
    // Pointers are taken only after every insertion, so they stay valid.
    for (const auto& v : sys.stateVars) statePtr_.push_back(&work_.values[v]);
    for (const auto& [v, _] : sys.directAssigns) directPtr_.push_back(&work_.values[v]);
    timePtr_ = &work_.values[sys.timeVar];
    y_.resize(sys.stateVars.size());
    for (std::size_t i = 0; i < y_.size(); ++i) {
      if (!statePtr_[i]->is_numeric()) throw EvalError("type-mismatch", sys.stateVars[i] + " is not numeric");
      y_[i] = statePtr_[i]->as_real();
    }
  }

  // Places the state (t, y) in the working valuation, including algebraic
  // variables.
  void load(double t, const std::vector<double>& y) {
    *timePtr_ = Value::real(t);
    work_.time = t;
    for (std::size_t i = 0; i < y.size(); ++i) *statePtr_[i] = Value::real(y[i]);
    for (std::size_t i = 0; i < sys_.directAssigns.size(); ++i)
      *directPtr_[i] = eval(*sys_.directAssigns[i].second, work_);
  }

  std::vector<double> deriv(double t, const std::vector<double>& y) {
    load(t, y);
    std::vector<double> d(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      Value v = eval(*sys_.rhs[i], work_);
      if (!v.is_numeric()) throw EvalError("type-mismatch", "derivative of " + sys_.stateVars[i] + " is not numeric");
      d[i] = v.as_real();
      if (!std::isfinite(d[i]))
        throw EvalError("not-finite", "derivative of " + sys_.stateVars[i] + " is not finite");
    }
    return d;
  }

  std::vector<double> rk4(double t, const std::vector<double>& y, double h) {
    if (y.empty() || h == 0.0) return y;
    auto axpy = [](const std::vector<double>& a, const std::vector<double>& k, double s) {
      std::vector<double> r(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * k[i];
      return r;
    };
    auto k1 = deriv(t, y);
    auto k2 = deriv(t + h / 2, axpy(y, k1, h / 2));
    auto k3 = deriv(t + h / 2, axpy(y, k2, h / 2));
    auto k4 = deriv(t + h, axpy(y, k3, h));
    std::vector<double> r(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      r[i] = y[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      if (!std::isfinite(r[i])) throw EvalError("not-finite", sys_.stateVars[i] + " left the reals");
    }
    return r;
  }

  Valuation snapshot(double t, const std::vector<double>& y) {
    load(t, y);
    return work_;
  }

  Valuation& work() { return work_; }
  std::vector<double>& y() { return y_; }

 private:
  const OdeSystem& sys_;
  const NumericConfig& cfg_;
  Valuation work_;
  std::vector<Value*> statePtr_;
  std::vector<Value*> directPtr_;
  Value* timePtr_ = nullptr;
  std::vector<double> y_;
};

struct Watched {
  const WatchGuard* w;
  std::vector<const Expr*> atoms;
  std::vector<std::optional<double>> ref;  // residual of each atom at the step start
  bool armed = true;                        // false while stale-true from the start
};

}  // namespace

EpisodeResult integrate_episode(const OdeSystem& sys, const Valuation& start, double t0,
                                const std::vector<WatchGuard>& watch, double tMax, const NumericConfig& cfg,
                                bool keepSamples) {
  EpisodeResult res;
  std::vector<std::string> continuous = sys.stateVars;
  for (const auto& [v, _] : sys.directAssigns) continuous.push_back(v);

  Integrator in(sys, start, cfg);
  try {
    in.load(t0, in.y());
  } catch (const EvalError& e) {
    res.cause = Termination::Infeasible;
    res.error = e.what();
    res.endTime = t0;
    res.endValuation = in.work();
    return res;
  }

  // Time-only watches are resolved exactly against the frozen state.
  double tEnd = tMax;
  std::vector<std::string> timeHits;
  std::vector<Watched> watched;
  for (const auto& w : watch) {
    if (!mentions_any(w.guard, continuous)) {
      auto win = next_true_window(*w.guard, in.work(), sys.timeVar, t0, false);
      if (!win) continue;
      const double at = win->startClosed ? win->start : win->start + cfg.epsT;
      if (at < tEnd) {
        tEnd = at;
        timeHits = {w.id};
      } else if (at == tEnd && at < tMax) {
        timeHits.push_back(w.id);
      }
      continue;
    }
    Watched x{&w, {}, {}, true};
    collect_eq_atoms(w.guard, x.atoms);
    x.ref.resize(x.atoms.size());
    watched.push_back(std::move(x));
  }

  auto refresh_refs = [&](Valuation& at) {
    for (auto& x : watched)
      for (std::size_t i = 0; i < x.atoms.size(); ++i) {
        auto l = try_eval(*x.atoms[i]->args[0], at, {});
        auto r = try_eval(*x.atoms[i]->args[1], at, {});
        x.ref[i] = (l && r && l->is_numeric() && r->is_numeric()) ? std::optional<double>(l->as_real() - r->as_real())
                                                                  : std::nullopt;
      }
  };
  auto guard_true = [&](Watched& x, Valuation& at) {
    EvalOptions opt;
    opt.eqHook = [&](const Expr& atom, double l, double r) -> std::optional<bool> {
      const double now = l - r;
      if (std::fabs(now) <= cfg.epsGuard) return true;
      for (std::size_t i = 0; i < x.atoms.size(); ++i)
        if (x.atoms[i] == &atom) return x.ref[i] && (*x.ref[i]) * now < 0;
      return false;
    };
    auto v = try_eval(*x.w->guard, at, opt);
    return v && v->kind() == ValueKind::Bool && v->as_bool();
  };

  refresh_refs(in.work());
  for (auto& x : watched) x.armed = !guard_true(x, in.work());

  // Samples on the global grid, in [t0, tEnd).
  auto sample_index = [&](double t) {
    auto k = static_cast<long long>(std::floor(t / cfg.sampleStep));
    while (static_cast<double>(k) * cfg.sampleStep < t) ++k;
    while (k > 0 && static_cast<double>(k - 1) * cfg.sampleStep >= t) --k;
    return k;
  };
  long long nextSample = sample_index(t0);
  auto take_samples_upto = [&](double a, const std::vector<double>& ya, double b, bool inclusive) {
    while (true) {
      const double s = static_cast<double>(nextSample) * cfg.sampleStep;
      if (s > b || (!inclusive && s == b) || s >= tEnd) break;
      if (keepSamples) res.samples.emplace_back(s, in.snapshot(s, in.rk4(a, ya, s - a)));
      ++nextSample;
    }
  };

  try {
    if (watched.empty() && sys.stateVars.empty()) {
      // Nothing moves: jump straight to the end.
      const std::vector<double> y0 = in.y();
      take_samples_upto(t0, y0, tEnd, false);
      res.endTime = tEnd;
      res.endValuation = in.snapshot(tEnd, y0);
    } else {
      double a = t0;
      std::vector<double> ya = in.y();
      long long k = 0;
      bool done = false;
      while (!done) {
        ++k;
        double b = t0 + static_cast<double>(k) * cfg.dtMax;
        if (b >= tEnd) b = tEnd;
        std::vector<double> yb = in.rk4(a, ya, b - a);

        in.load(b, yb);
        bool any = false;
        for (auto& x : watched)
          if (x.armed && guard_true(x, in.work())) any = true;
        if (any) {
          auto g = [&](double tau) {
            in.load(tau, in.rk4(a, ya, tau - a));
            for (auto& x : watched)
              if (x.armed && guard_true(x, in.work())) return true;
            return false;
          };
          const double tc = locate_crossing(g, a, b, cfg.epsT);
          const std::vector<double> yc = in.rk4(a, ya, tc - a);
          take_samples_upto(a, ya, tc, false);
          in.load(tc, yc);
          for (auto& x : watched) {
            if (!(x.armed && guard_true(x, in.work()))) continue;
            res.crossed.push_back(x.w->id);
            for (const Expr* atom : x.atoms) {
              auto l = try_eval(*atom->args[0], in.work(), {});
              auto r = try_eval(*atom->args[1], in.work(), {});
              if (l && r && l->is_numeric() && r->is_numeric())
                res.crossedAtoms[atom] = {l->as_real(), r->as_real()};
            }
          }
          res.cause = Termination::GuardCrossing;
          res.endTime = tc;
          res.endValuation = in.work();
          return res;
        }
        take_samples_upto(a, ya, b, false);
        in.load(b, yb);
        // Guards that were stale-true at the start become live once false.
        for (auto& x : watched)
          if (!x.armed && !guard_true(x, in.work())) x.armed = true;
        refresh_refs(in.work());
        a = b;
        ya = std::move(yb);
        done = (b >= tEnd);
      }
      res.endTime = tEnd;
      res.endValuation = in.snapshot(tEnd, ya);
    }
  } catch (const EvalError& e) {
    res.cause = Termination::Infeasible;
    res.error = e.what();
    res.endTime = in.work().time;
    res.endValuation = in.work();
    return res;
  }

  if (!timeHits.empty()) {
    res.cause = Termination::GuardCrossing;
    res.crossed = timeHits;
  } else {
    res.cause = Termination::HorizonReached;
  }
  return res;
}

}  // namespace heb
