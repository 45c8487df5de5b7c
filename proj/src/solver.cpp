// Copyright 2026 The tcfuzz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tcfuzz/solver/solver.hpp"

#include <algorithm>
#include <atomic>
#include <random>

namespace tcfuzz::solver {

const char* solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Sat: return "Sat";
    case SolveStatus::Unsat: return "Unsat";
    case SolveStatus::Unknown: return "Unknown";
  }
  return "?";
}

namespace {

using i128 = __int128;

i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

i128 ceil_div(i128 a, i128 b) { return -floor_div(-a, b); }

struct Dom {
  int64_t lo = 0, hi = 0;
  std::vector<int64_t> holes;  // sorted, strictly inside (lo, hi)

  bool fixed() const { return lo == hi; }
  bool contains(int64_t v) const {
    return v >= lo && v <= hi && !std::binary_search(holes.begin(), holes.end(), v);
  }
  uint64_t size() const {
    return static_cast<uint64_t>(static_cast<i128>(hi) - lo + 1) - holes.size();
  }
};

enum class St { Violated, Entailed, Open };

struct State {
  std::vector<Dom> d;
  std::vector<char> done;  // per constraint: top-level list, then `added`
  std::vector<Formula> added;
};

struct Abort {};

class Search {
 public:
  Search(const SymbolicLayout& layout, const std::vector<Formula>& extras, const SolveOptions& opts)
      : layout_(layout), extras_(extras), rng_(opts.seed), opts_(opts) {
    deadline_ = std::chrono::steady_clock::now() + opts.timeout;
    auto push = [&](const Formula& f) {
      if (f.kind() == Formula::Kind::And) {
        for (const auto& k : f.kids()) top_.push_back(k);
      } else if (!f.is_true()) {
        top_.push_back(f);
      }
    };
    push(layout.base());
    for (const auto& e : extras) push(e);
    for (const auto& f : top_) collect(f, top_facts_);
  }

  SolveResult run() {
    SolveResult r;
    State s;
    for (const auto& v : layout_.vars()) s.d.push_back(Dom{v.lo, v.hi, {}});
    s.done.assign(top_.size(), 0);
    try {
      bool ok = dfs(std::move(s));
      r.status = ok ? SolveStatus::Sat : SolveStatus::Unsat;
      if (ok) r.model = model_;
    } catch (const Abort&) {
      r.status = SolveStatus::Unknown;
    }
    r.nodes = nodes_;
    return r;
  }

 private:
  // Domain updates; return false when the domain becomes empty.
  static bool normalize(Dom& d) {
    while (d.lo <= d.hi && !d.holes.empty() && d.holes.front() <= d.lo) {
      if (d.holes.front() == d.lo) ++d.lo;
      d.holes.erase(d.holes.begin());
    }
    while (d.lo <= d.hi && !d.holes.empty() && d.holes.back() >= d.hi) {
      if (d.holes.back() == d.hi) --d.hi;
      d.holes.pop_back();
    }
    return d.lo <= d.hi;
  }

  static bool set_le(State& s, VarId v, i128 ub, bool& changed) {
    Dom& d = s.d[static_cast<size_t>(v)];
    if (ub >= d.hi) return true;
    if (ub < d.lo) return false;
    d.hi = static_cast<int64_t>(ub);
    changed = true;
    return normalize(d);
  }

  static bool set_ge(State& s, VarId v, i128 lb, bool& changed) {
    Dom& d = s.d[static_cast<size_t>(v)];
    if (lb <= d.lo) return true;
    if (lb > d.hi) return false;
    d.lo = static_cast<int64_t>(lb);
    changed = true;
    return normalize(d);
  }

  static bool remove(State& s, VarId v, int64_t x, bool& changed) {
    Dom& d = s.d[static_cast<size_t>(v)];
    if (!d.contains(x)) return true;
    changed = true;
    if (x == d.lo) {
      ++d.lo;
      return normalize(d);
    }
    if (x == d.hi) {
      --d.hi;
      return normalize(d);
    }
    d.holes.insert(std::lower_bound(d.holes.begin(), d.holes.end(), x), x);
    return true;
  }

  static std::pair<i128, i128> bounds(const State& s, const LinExpr& e) {
    i128 mn = e.constant, mx = e.constant;
    for (const auto& [v, a] : e.terms) {
      const Dom& d = s.d[static_cast<size_t>(v)];
      i128 x = static_cast<i128>(a) * d.lo, y = static_cast<i128>(a) * d.hi;
      mn += std::min(x, y);
      mx += std::max(x, y);
    }
    return {mn, mx};
  }

  // The single unfixed variable of `e`, or -1; `rest` receives the fixed part.
  static VarId single_open(const State& s, const LinExpr& e, int64_t& coeff, i128& rest) {
    VarId open = -1;
    rest = e.constant;
    for (const auto& [v, a] : e.terms) {
      const Dom& d = s.d[static_cast<size_t>(v)];
      if (d.fixed()) {
        rest += static_cast<i128>(a) * d.lo;
      } else {
        if (open >= 0) return -2;
        open = v;
        coeff = a;
      }
    }
    return open;
  }

  static St atom_status(const State& s, const Atom& a) {
    auto [mn, mx] = bounds(s, a.lhs);
    switch (a.rel) {
      case Rel::Le:
        if (mx <= 0) return St::Entailed;
        if (mn > 0) return St::Violated;
        return St::Open;
      case Rel::Eq: {
        if (mn > 0 || mx < 0) return St::Violated;
        if (mn == mx) return St::Entailed;
        int64_t k = 0;
        i128 rest = 0;
        VarId v = single_open(s, a.lhs, k, rest);
        if (v >= 0) {
          if (rest % k != 0) return St::Violated;
          i128 x = -rest / k;
          if (x < INT64_MIN || x > INT64_MAX || !s.d[static_cast<size_t>(v)].contains(static_cast<int64_t>(x)))
            return St::Violated;
        }
        return St::Open;
      }
      case Rel::Ne: {
        if (mn > 0 || mx < 0) return St::Entailed;
        if (mn == mx) return St::Violated;
        int64_t k = 0;
        i128 rest = 0;
        VarId v = single_open(s, a.lhs, k, rest);
        if (v >= 0) {
          if (rest % k != 0) return St::Entailed;
          i128 x = -rest / k;
          if (x < INT64_MIN || x > INT64_MAX || !s.d[static_cast<size_t>(v)].contains(static_cast<int64_t>(x)))
            return St::Entailed;
        }
        return St::Open;
      }
    }
    return St::Open;
  }

  static St status(const State& s, const Formula& f) {
    switch (f.kind()) {
      case Formula::Kind::True: return St::Entailed;
      case Formula::Kind::False: return St::Violated;
      case Formula::Kind::Atom: return atom_status(s, f.get_atom());
      case Formula::Kind::And: {
        bool all = true;
        for (const auto& k : f.kids()) {
          St x = status(s, k);
          if (x == St::Violated) return St::Violated;
          if (x != St::Entailed) all = false;
        }
        return all ? St::Entailed : St::Open;
      }
      case Formula::Kind::Or: {
        bool none = true;
        for (const auto& k : f.kids()) {
          St x = status(s, k);
          if (x == St::Entailed) return St::Entailed;
          if (x != St::Violated) none = false;
        }
        return none ? St::Violated : St::Open;
      }
    }
    return St::Open;
  }

  static bool prop_le(State& s, const LinExpr& e, bool& changed) {
    auto [mn, mx] = bounds(s, e);
    if (mn > 0) return false;
    if (mx <= 0) return true;
    for (const auto& [v, a] : e.terms) {
      const Dom& d = s.d[static_cast<size_t>(v)];
      i128 own = std::min(static_cast<i128>(a) * d.lo, static_cast<i128>(a) * d.hi);
      i128 room = -(mn - own);  // a*x <= room
      bool ok = a > 0 ? set_le(s, v, floor_div(room, a), changed) : set_ge(s, v, ceil_div(room, a), changed);
      if (!ok) return false;
    }
    return true;
  }

  static bool assert_atom(State& s, const Atom& a, bool& changed) {
    switch (a.rel) {
      case Rel::Le: return prop_le(s, a.lhs, changed);
      case Rel::Eq: {
        if (!prop_le(s, a.lhs, changed)) return false;
        LinExpr n = a.lhs;
        for (auto& t : n.terms) t.second = -t.second;
        n.constant = -n.constant;
        if (!prop_le(s, n, changed)) return false;
        return atom_status(s, a) != St::Violated;
      }
      case Rel::Ne: {
        int64_t k = 0;
        i128 rest = 0;
        VarId v = single_open(s, a.lhs, k, rest);
        if (v == -1) return rest != 0;
        if (v >= 0 && rest % k == 0) {
          i128 x = -rest / k;
          if (x >= INT64_MIN && x <= INT64_MAX) return remove(s, v, static_cast<int64_t>(x), changed);
        }
        return true;
      }
    }
    return true;
  }

  // Asserts `f`; returns false on conflict and sets `entailed` when `f` is
  // already implied by the domains.
  static bool assert_f(State& s, const Formula& f, bool& changed, bool& entailed) {
    entailed = false;
    switch (f.kind()) {
      case Formula::Kind::True: entailed = true; return true;
      case Formula::Kind::False: return false;
      case Formula::Kind::Atom: {
        if (!assert_atom(s, f.get_atom(), changed)) return false;
        St x = atom_status(s, f.get_atom());
        entailed = x == St::Entailed;
        return x != St::Violated;
      }
      case Formula::Kind::And: {
        bool all = true;
        for (const auto& k : f.kids()) {
          bool e = false;
          if (!assert_f(s, k, changed, e)) return false;
          all = all && e;
        }
        entailed = all;
        return true;
      }
      case Formula::Kind::Or: {
        const Formula* live = nullptr;
        int n_live = 0;
        for (const auto& k : f.kids()) {
          St x = status(s, k);
          if (x == St::Entailed) {
            entailed = true;
            return true;
          }
          if (x == St::Open) {
            live = &k;
            ++n_live;
          }
        }
        if (n_live == 0) return false;
        if (n_live == 1) return assert_f(s, *live, changed, entailed);
        return true;
      }
    }
    return true;
  }

  // Unconditional atoms of a formula, with equalities also split into two `<= 0` facts.
  struct Facts {
    std::vector<LinExpr> le, eq, ne;
  };

  static LinExpr negated(LinExpr e) {
    for (auto& t : e.terms) t.second = -t.second;
    e.constant = -e.constant;
    return e;
  }

  static void collect(const Formula& f, Facts& out) {
    if (f.kind() == Formula::Kind::And) {
      for (const auto& k : f.kids()) collect(k, out);
      return;
    }
    if (f.kind() != Formula::Kind::Atom) return;
    const Atom& a = f.get_atom();
    switch (a.rel) {
      case Rel::Le: out.le.push_back(a.lhs); break;
      case Rel::Eq:
        out.le.push_back(a.lhs);
        out.le.push_back(negated(a.lhs));
        out.eq.push_back(a.lhs);
        break;
      case Rel::Ne: out.ne.push_back(a.lhs); break;
    }
  }

  // Multipliers (ka, kb) with ka * a and kb * b agreeing on the first variable's
  // coefficient up to sign; false when the variable lists differ.
  static bool aligned(const LinExpr& a, const LinExpr& b, i128& ka, i128& kb) {
    if (a.terms.empty() || a.terms.size() != b.terms.size()) return false;
    ka = b.terms[0].second;
    kb = a.terms[0].second;
    for (size_t i = 0; i < a.terms.size(); ++i)
      if (a.terms[i].first != b.terms[i].first) return false;
    return true;
  }

  // A positive combination of `a <= 0` and `b <= 0` cancels every variable and
  // leaves a positive constant. Bounds propagation alone needs a step per unit
  // of domain width to find such cycles.
  static bool opposed(const LinExpr& a, const LinExpr& b) {
    i128 ka, kb;
    if (!aligned(a, b, ka, kb) || (ka < 0) == (kb < 0)) return false;
    ka = ka < 0 ? -ka : ka;
    kb = kb < 0 ? -kb : kb;
    for (size_t i = 0; i < a.terms.size(); ++i)
      if (ka * a.terms[i].second + kb * b.terms[i].second != 0) return false;
    return ka * a.constant + kb * b.constant > 0;
  }

  // `a = 0` and `b != 0` for proportional expressions.
  static bool contradicts(const LinExpr& eq, const LinExpr& ne) {
    i128 ka, kb;
    if (!aligned(eq, ne, ka, kb)) return false;
    for (size_t i = 0; i < eq.terms.size(); ++i)
      if (ka * eq.terms[i].second != kb * ne.terms[i].second) return false;
    return ka * eq.constant == kb * ne.constant;
  }

  static bool conflict(const Facts& x, const Facts& y) {
    for (const auto& a : x.le)
      for (const auto& b : y.le)
        if (opposed(a, b)) return true;
    for (const auto& a : x.eq)
      for (const auto& b : y.ne)
        if (contradicts(a, b)) return true;
    for (const auto& a : y.eq)
      for (const auto& b : x.ne)
        if (contradicts(a, b)) return true;
    return false;
  }

  bool refuted(const State& s, const Formula& kid) const {
    Facts mine, added;
    collect(kid, mine);
    if (mine.le.empty() && mine.ne.empty()) return false;
    for (const auto& f : s.added) collect(f, added);
    return conflict(mine, top_facts_) || conflict(mine, added) || conflict(mine, mine);
  }

  bool budgets(State& s, bool& changed) const {
    for (const auto& b : layout_.budgets()) {
      const Dom& dt = s.d[static_cast<size_t>(b.slots.dtype)];
      int64_t wmin = INT64_MAX;
      for (int64_t c = dt.lo; c <= dt.hi; ++c)
        if (dt.contains(c) && c >= 0 && c < static_cast<int64_t>(b.widths.size()))
          wmin = std::min(wmin, b.widths[static_cast<size_t>(c)]);
      if (wmin == INT64_MAX || wmin <= 0) continue;
      const i128 cap = static_cast<i128>(b.budget) + 1;
      auto prod_lo = [&](size_t skip) {
        i128 p = 1;
        for (size_t i = 0; i < b.slots.dims.size(); ++i) {
          if (i == skip) continue;
          p *= s.d[static_cast<size_t>(b.slots.dims[i])].lo;
          if (p > cap) p = cap;
        }
        return p;
      };
      i128 all = prod_lo(SIZE_MAX);
      if (all * wmin > b.budget) return false;
      for (size_t i = 0; i < b.slots.dims.size(); ++i) {
        i128 others = prod_lo(i);
        if (others <= 0) continue;
        if (!set_le(s, b.slots.dims[i], b.budget / (others * wmin), changed)) return false;
      }
      bool dims_fixed = std::all_of(b.slots.dims.begin(), b.slots.dims.end(),
                                    [&](VarId v) { return s.d[static_cast<size_t>(v)].fixed(); });
      if (dims_fixed && !dt.fixed()) {
        Dom copy = dt;
        for (int64_t c = copy.lo; c <= copy.hi; ++c) {
          if (!copy.contains(c) || c < 0 || c >= static_cast<int64_t>(b.widths.size())) continue;
          if (all * b.widths[static_cast<size_t>(c)] > b.budget && !remove(s, b.slots.dtype, c, changed)) return false;
        }
      }
    }
    return true;
  }

  const Formula& constraint(const State& s, size_t i) const {
    return i < top_.size() ? top_[i] : s.added[i - top_.size()];
  }

  bool propagate(State& s) const {
    for (int round = 0; round < 64; ++round) {
      bool changed = false;
      for (size_t i = 0; i < s.done.size(); ++i) {
        if (s.done[i]) continue;
        bool ent = false;
        if (!assert_f(s, constraint(s, i), changed, ent)) return false;
        if (ent) s.done[i] = 1;
      }
      if (!budgets(s, changed)) return false;
      if (!changed) break;
    }
    return true;
  }

  uint64_t below(uint64_t n) { return n == 0 ? 0 : rng_() % n; }

  int64_t pick(const Dom& d, VarRole role) {
    uint64_t span = static_cast<uint64_t>(static_cast<i128>(d.hi) - d.lo) + 1;
    int64_t v;
    auto uniform = [&](int64_t lo, int64_t hi) {
      uint64_t n = static_cast<uint64_t>(static_cast<i128>(hi) - lo) + 1;
      return static_cast<int64_t>(static_cast<i128>(lo) + (n == 0 ? rng_() : below(n)));
    };
    if (span <= 64 && span != 0) {
      v = uniform(d.lo, d.hi);
    } else {
      int64_t wlo, whi;
      switch (role) {
        case VarRole::Dim: wlo = d.lo; whi = d.lo + 8; break;
        case VarRole::Float:
        case VarRole::RangeLo:
        case VarRole::RangeHi: wlo = -16 * kScale; whi = 16 * kScale; break;
        default: wlo = -16; whi = 16; break;
      }
      wlo = std::max(wlo, d.lo);
      whi = std::min(whi, d.hi);
      uint64_t r = below(100);
      if (r < 55 && wlo <= whi) {
        v = uniform(wlo, whi);
      } else if (r < 70) {
        v = below(2) ? d.lo : d.hi;
      } else {
        v = uniform(d.lo, d.hi);
      }
    }
    if (d.contains(v)) return v;
    for (int64_t x = v; x <= d.hi; ++x)
      if (d.contains(x)) return x;
    for (int64_t x = v; x >= d.lo; --x)
      if (d.contains(x)) return x;
    return d.lo;
  }

  static int label_rank(VarRole r) {
    switch (r) {
      case VarRole::Dim: return 0;
      case VarRole::Int:
      case VarRole::Float: return 1;
      case VarRole::RangeLoInt:
      case VarRole::RangeHiInt: return 2;
      default: return 3;
    }
  }

  void tick() {
    ++nodes_;
    if (nodes_ > opts_.node_limit) throw Abort{};
    if ((nodes_ & 63) == 0 && std::chrono::steady_clock::now() > deadline_) throw Abort{};
  }

  bool dfs(State s) {
    while (true) {
      tick();
      if (!propagate(s)) return false;

      VarId var = -1;
      uint64_t best = UINT64_MAX;
      for (size_t i = 0; i < s.d.size(); ++i) {
        if (s.d[i].fixed() || !is_structural(layout_.vars()[i].role)) continue;
        uint64_t sz = s.d[i].size();
        if (sz < best) {
          best = sz;
          var = static_cast<VarId>(i);
        }
      }
      if (var < 0) {
        for (size_t i = 0; i < s.done.size(); ++i) {
          if (s.done[i]) continue;
          const Formula& f = constraint(s, i);
          if (status(s, f) != St::Open) continue;
          if (f.kind() != Formula::Kind::Or) continue;
          std::vector<size_t> order(f.kids().size());
          for (size_t k = 0; k < order.size(); ++k) order[k] = k;
          for (size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[below(k)]);
          for (size_t k : order) {
            const Formula& kid = f.kids()[k];
            if (status(s, kid) == St::Violated || refuted(s, kid)) continue;
            State c = s;
            c.done[i] = 1;
            c.added.push_back(kid);
            c.done.push_back(0);
            if (dfs(std::move(c))) return true;
          }
          return false;
        }
        int rank = INT32_MAX;
        for (size_t i = 0; i < s.d.size(); ++i) {
          if (s.d[i].fixed()) continue;
          int r = label_rank(layout_.vars()[i].role);
          if (r < rank) {
            rank = r;
            var = static_cast<VarId>(i);
          }
        }
      }
      if (var < 0) return finish(s);

      int64_t v = pick(s.d[static_cast<size_t>(var)], layout_.vars()[static_cast<size_t>(var)].role);
      State c = s;
      c.d[static_cast<size_t>(var)] = Dom{v, v, {}};
      if (dfs(std::move(c))) return true;
      bool changed = false;
      if (!remove(s, var, v, changed)) return false;
    }
  }

  bool finish(const State& s) {
    std::vector<int64_t> m(s.d.size());
    for (size_t i = 0; i < s.d.size(); ++i) m[i] = s.d[i].lo;
    if (!model_satisfies(layout_, extras_, m)) return false;
    model_ = std::move(m);
    return true;
  }

  const SymbolicLayout& layout_;
  const std::vector<Formula>& extras_;
  std::vector<Formula> top_;
  Facts top_facts_;
  std::mt19937_64 rng_;
  SolveOptions opts_;
  std::chrono::steady_clock::time_point deadline_;
  int64_t nodes_ = 0;
  std::vector<int64_t> model_;
};

}  // namespace

bool model_satisfies(const SymbolicLayout& layout, const std::vector<Formula>& extras, const std::vector<int64_t>& model) {
  if (!layout.satisfies_base(model)) return false;
  for (const auto& f : extras)
    if (!f.eval(model)) return false;
  return true;
}

namespace {
std::atomic<uint64_t> g_solve_calls{0};
}  // namespace

uint64_t solve_calls() { return g_solve_calls.load(); }

SolveResult solve(const SymbolicLayout& layout, const std::vector<Formula>& extras, const SolveOptions& opts) {
  g_solve_calls.fetch_add(1);
  Search s(layout, extras, opts);
  return s.run();
}

std::vector<size_t> unsat_core(const SymbolicLayout& layout, const std::vector<Formula>& extras,
                               const SolveOptions& opts) {
  if (solve(layout, extras, opts).status != SolveStatus::Unsat) return {};
  if (solve(layout, {}, opts).status == SolveStatus::Unsat) return {};
  std::vector<size_t> core(extras.size());
  for (size_t i = 0; i < core.size(); ++i) core[i] = i;
  for (size_t i = 0; i < core.size();) {
    std::vector<Formula> trial;
    for (size_t j = 0; j < core.size(); ++j)
      if (j != i) trial.push_back(extras[core[j]]);
    if (solve(layout, trial, opts).status == SolveStatus::Unsat) {
      core.erase(core.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  return core;
}

std::map<std::string, int64_t> named_model(const SymbolicLayout& layout, const std::vector<int64_t>& model) {
  std::map<std::string, int64_t> out;
  for (size_t i = 0; i < layout.vars().size() && i < model.size(); ++i)
    if (!layout.vars()[i].internal) out[layout.vars()[i].name] = model[i];
  return out;
}

}  // namespace tcfuzz::solver
