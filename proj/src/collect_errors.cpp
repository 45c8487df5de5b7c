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

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tcfuzz/rules/errors.hpp"

namespace tcfuzz::rules {

namespace {

bool integral_dtype(int code) {
  const auto* d = DtypeTable::standard().by_code(code);
  return d && (d->kind == DtypeKind::Int || d->kind == DtypeKind::Bool);
}

void refresh_range(TensorV& t) {
  if (!t.elements || t.elements->empty()) return;
  auto [lo, hi] = std::minmax_element(t.elements->begin(), t.elements->end());
  t.lo = std::min(t.lo, *lo);
  t.hi = std::max(t.hi, *hi);
}

std::optional<ConcreteValue> mutate_value(Mutator m, const ConcreteValue& v) {
  if (const TensorV* t0 = v.as<TensorV>()) {
    TensorV t = *t0;
    switch (m) {
      case Mutator::EmptyTensor:
        if (t.ndim == 0) {
          t.ndim = 1;
          t.shape = {0};
        } else {
          t.shape[0] = 0;
        }
        if (t.elements) t.elements->clear();
        return ConcreteValue(t);
      case Mutator::AllZero:
        if (t.elements) std::fill(t.elements->begin(), t.elements->end(), 0.0);
        t.lo = std::min(t.lo, 0.0);
        t.hi = std::max(t.hi, 0.0);
        return ConcreteValue(t);
      case Mutator::DtypeSwap: {
        t.dtype = (t.dtype + 1) % DtypeTable::standard().size();
        if (t.elements && integral_dtype(t.dtype)) {
          bool boolean = DtypeTable::standard().by_code(t.dtype)->kind == DtypeKind::Bool;
          for (auto& x : *t.elements) x = boolean ? (x != 0 ? 1.0 : 0.0) : std::trunc(x);
          t.lo = boolean ? 0.0 : std::trunc(t.lo);
          t.hi = boolean ? 1.0 : std::trunc(t.hi);
          if (t.lo > t.hi) std::swap(t.lo, t.hi);
          refresh_range(t);
        }
        return ConcreteValue(t);
      }
      case Mutator::RankUp:
        t.ndim += 1;
        t.shape.push_back(2);
        if (t.elements) {
          std::vector<double> e;
          e.reserve(t.elements->size() * 2);
          for (double x : *t.elements) {
            e.push_back(x);
            e.push_back(x);
          }
          t.elements = std::move(e);
        }
        return ConcreteValue(t);
      case Mutator::RankDown: {
        if (t.ndim == 0) return std::nullopt;
        t.ndim -= 1;
        t.shape.pop_back();
        if (t.elements) {
          size_t n = static_cast<size_t>(t.numel());
          std::vector<double> e;
          size_t step = n ? t.elements->size() / n : 0;
          for (size_t i = 0; i < n; ++i) e.push_back(step ? (*t.elements)[i * step] : t.lo);
          t.elements = std::move(e);
        }
        return ConcreteValue(t);
      }
      case Mutator::KindConfusion: {
        double x = t.elements && !t.elements->empty() ? t.elements->front() : t.lo;
        if (integral_dtype(t.dtype)) return ConcreteValue(static_cast<int64_t>(x));
        return ConcreteValue(x);
      }
      default:
        return std::nullopt;
    }
  }
  if (const int64_t* i = v.as<int64_t>()) {
    switch (m) {
      case Mutator::IntNegate: return ConcreteValue(*i == 0 ? int64_t{-1} : -*i);
      case Mutator::IntExtreme: return ConcreteValue((int64_t{1} << 31) - 1);
      case Mutator::KindConfusion: {
        TensorV t;
        t.dtype = 3;
        t.lo = t.hi = static_cast<double>(*i);
        t.elements = std::vector<double>{static_cast<double>(*i)};
        return ConcreteValue(t);
      }
      default: return std::nullopt;
    }
  }
  if (const double* d = v.as<double>()) {
    switch (m) {
      case Mutator::IntNegate: return ConcreteValue(*d == 0 ? -1.0 : -*d);
      case Mutator::KindConfusion: {
        TensorV t;
        t.lo = t.hi = *d;
        t.elements = std::vector<double>{*d};
        return ConcreteValue(t);
      }
      default: return std::nullopt;
    }
  }
  if (const DtypeV* d = v.as<DtypeV>()) {
    if (m != Mutator::DtypeSwap) return std::nullopt;
    return ConcreteValue(DtypeV{(d->code + 1) % DtypeTable::standard().size()});
  }
  if (const ListV* l = v.as<ListV>()) {
    if (m == Mutator::EmptyTensor) return ConcreteValue(ListV{});
    if (m == Mutator::IntNegate || m == Mutator::IntExtreme || m == Mutator::AllZero) {
      ListV out = *l;
      bool any = false;
      for (auto& item : out.items)
        if (const int64_t* i = item.as<int64_t>()) {
          any = true;
          item = m == Mutator::AllZero ? ConcreteValue(int64_t{0}) : *mutate_value(m, ConcreteValue(*i));
        }
      if (any) return ConcreteValue(out);
    }
  }
  return std::nullopt;
}

}  // namespace

const std::vector<Mutator>& all_mutators() {
  static const std::vector<Mutator> all{Mutator::DropOptional, Mutator::EmptyTensor, Mutator::AllZero,
                                        Mutator::IntNegate,    Mutator::IntExtreme,  Mutator::DtypeSwap,
                                        Mutator::RankUp,       Mutator::RankDown,    Mutator::KindConfusion};
  return all;
}

const char* mutator_name(Mutator m) {
  switch (m) {
    case Mutator::DropOptional: return "drop-optional-param";
    case Mutator::EmptyTensor: return "empty-tensor";
    case Mutator::AllZero: return "all-zero";
    case Mutator::IntNegate: return "int-negate";
    case Mutator::IntExtreme: return "int-extreme";
    case Mutator::DtypeSwap: return "dtype-swap";
    case Mutator::RankUp: return "rank-up";
    case Mutator::RankDown: return "rank-down";
    case Mutator::KindConfusion: return "kind-confusion";
  }
  return "?";
}

std::vector<ApiInput> mutate(Mutator m, const ApiInput& in, const ApiSignature& sig) {
  std::vector<ApiInput> out;
  for (const auto& p : sig.params) {
    const ConcreteValue* v = in.get(p.name);
    if (!v) continue;
    if (m == Mutator::DropOptional) {
      if (p.required || v->is_none()) continue;
      ApiInput mutant = in;
      std::erase_if(mutant.args, [&](const auto& a) { return a.first == p.name; });
      out.push_back(std::move(mutant));
      continue;
    }
    if (auto mv = mutate_value(m, *v)) {
      ApiInput mutant = in;
      mutant.set(p.name, std::move(*mv));
      out.push_back(std::move(mutant));
    }
  }
  return out;
}

std::string normalize_message(const std::string& msg) {
  std::string out;
  bool space = false, digit = false;
  for (unsigned char c : msg) {
    if (std::isspace(c)) {
      space = !out.empty();
      digit = false;
      continue;
    }
    if (space) out += ' ';
    space = false;
    if (std::isdigit(c)) {
      if (!digit) out += '#';
      digit = true;
      continue;
    }
    digit = false;
    out += static_cast<char>(c);
  }
  return out;
}

bool ErrorDb::add(const std::string& api, const std::string& message) {
  std::string key = normalize_message(message);
  auto& keys = keys_[api];
  auto& msgs = entries_[api];
  if (std::find(keys.begin(), keys.end(), key) != keys.end()) return false;
  keys.push_back(key);
  msgs.push_back(message);
  return true;
}

const std::vector<std::string>& ErrorDb::messages(const std::string& api) const {
  static const std::vector<std::string> none;
  auto it = entries_.find(api);
  return it == entries_.end() ? none : it->second;
}

json ErrorDb::to_json() const { return json{{"apis", entries_}}; }

ErrorDb ErrorDb::from_json(const json& j) {
  ErrorDb db;
  for (const auto& [api, msgs] : j.at("apis").items())
    for (const auto& m : msgs) db.add(api, m.get<std::string>());
  return db;
}

void ErrorDb::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  out << to_json().dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write error database '" + path + "'");
}

ErrorDb ErrorDb::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read error database '" + path + "'");
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed error database '" + path + "': " + e.what());
  }
}

ConcreteValue random_value(const dsl::TypePtr& t, std::mt19937_64& rng) {
  auto uni = [&](int64_t lo, int64_t hi) { return std::uniform_int_distribution<int64_t>(lo, hi)(rng); };
  switch (t->kind()) {
    case dsl::TypeKind::Int: {
      static const int64_t extremes[] = {(int64_t{1} << 31) - 1, -(int64_t{1} << 31), 64, -64};
      return uni(0, 9) == 0 ? ConcreteValue(extremes[uni(0, 3)]) : ConcreteValue(uni(-5, 10));
    }
    case dsl::TypeKind::Float: return ConcreteValue(std::uniform_real_distribution<double>(-5, 5)(rng));
    case dsl::TypeKind::Bool: return ConcreteValue(uni(0, 1) == 1);
    case dsl::TypeKind::Dtype: return ConcreteValue(DtypeV{static_cast<int>(uni(0, DtypeTable::standard().size() - 1))});
    case dsl::TypeKind::Str: {
      static const char* words[] = {"mean", "sum", "none", "linear", "x"};
      return ConcreteValue(std::string(words[uni(0, 4)]));
    }
    case dsl::TypeKind::Tensor: {
      TensorV x;
      x.ndim = uni(0, 4);
      for (int64_t i = 0; i < x.ndim; ++i) x.shape.push_back(uni(0, 6));
      x.dtype = static_cast<int>(uni(0, DtypeTable::standard().size() - 1));
      bool integral = integral_dtype(x.dtype);
      bool boolean = DtypeTable::standard().by_code(x.dtype)->kind == DtypeKind::Bool;
      x.lo = boolean ? 0 : static_cast<double>(uni(-10, 0));
      x.hi = boolean ? 1 : static_cast<double>(uni(0, 10));
      std::vector<double> e(static_cast<size_t>(x.numel()));
      for (auto& v : e) {
        double r = std::uniform_real_distribution<double>(x.lo, x.hi)(rng);
        v = integral ? std::round(r) : r;
      }
      x.elements = std::move(e);
      return ConcreteValue(x);
    }
    case dsl::TypeKind::List:
    case dsl::TypeKind::Tuple: {
      std::vector<ConcreteValue> items;
      int64_t n = uni(0, 4);
      for (int64_t i = 0; i < n; ++i) items.push_back(random_value(t->elem(), rng));
      if (t->kind() == dsl::TypeKind::List) return ConcreteValue(ListV{std::move(items)});
      return ConcreteValue(TupleV{std::move(items)});
    }
    case dsl::TypeKind::Union:
      return random_value(t->arms()[static_cast<size_t>(uni(0, static_cast<int64_t>(t->arms().size()) - 1))], rng);
  }
  return ConcreteValue();
}

CollectReport collect_errors(const std::string& api, const std::vector<ApiInput>& seeds, exec::Executor& executor,
                             ErrorDb& db, const CollectConfig& cfg) {
  const exec::ApiInfo* info = executor.find(api);
  if (!info) throw exec::UnknownApi(api);
  CollectReport rep;
  auto run = [&](const ApiInput& in) {
    exec::ExecRequest req;
    req.api = api;
    req.input = in;
    auto r = executor.run(req);
    ++rep.executed;
    if (r.status == exec::ExecStatus::Error && r.error_message) {
      if (db.add(api, *r.error_message)) ++rep.added;
    } else if (r.status == exec::ExecStatus::Crash || r.status == exec::ExecStatus::Timeout) {
      rep.crashes.push_back(in);
    }
  };
  for (const auto& seed : seeds)
    for (Mutator m : all_mutators())
      for (const auto& mutant : mutate(m, seed, info->signature)) {
        ++rep.mutants;
        run(mutant);
      }
  std::mt19937_64 rng(cfg.seed);
  auto start = std::chrono::steady_clock::now();
  while (std::chrono::steady_clock::now() - start < cfg.random_budget) {
    if (cfg.max_random && rep.random_inputs >= cfg.max_random) break;
    ApiInput in;
    in.api = api;
    for (const auto& p : info->signature.params) {
      if (!p.required && std::uniform_int_distribution<int>(0, 4)(rng) == 0) continue;
      in.args.emplace_back(p.name, random_value(p.type, rng));
    }
    ++rep.random_inputs;
    run(in);
  }
  return rep;
}

}  // namespace tcfuzz::rules
