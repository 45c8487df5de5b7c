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

#include "tcfuzz/gen/abstract_gen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "tcfuzz/fuzz/concretize.hpp"

namespace tcfuzz::gen {

using solver::VarRole;

uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

BucketTable BucketTable::standard() {
  BucketTable t;
  const int64_t i32min = -(int64_t{1} << 31), i32max = (int64_t{1} << 31) - 1;
  t.ints_ = {{i32min, -65}, {-64, -2}, {-1, -1}, {0, 0}, {1, 1}, {2, 8}, {9, 64}, {65, i32max}};
  t.dims_ = {{0, 0}, {1, 1}, {2, 4}, {5, 16}, {17, 64}};
  // Magnitude decades of scaled floats: (0,1), [1,10), ..., [1e6, inf).
  std::vector<Bucket> mags = {{1, solver::kScale - 1}};
  int64_t d = solver::kScale;
  for (int k = 0; k < 6; ++k) {
    mags.push_back({d, d * 10 - 1});
    d *= 10;
  }
  mags.push_back({d, int64_t{1} << 62});
  for (auto it = mags.rbegin(); it != mags.rend(); ++it) t.floats_.push_back({-it->hi, -it->lo});
  t.floats_.push_back({0, 0});
  t.floats_.insert(t.floats_.end(), mags.begin(), mags.end());
  t.bools_ = {{0, 0}, {1, 1}};
  return t;
}

std::vector<Bucket> BucketTable::for_var(const solver::VarInfo& v) const {
  const std::vector<Bucket>* src = &ints_;
  switch (v.role) {
    case VarRole::Dim: src = &dims_; break;
    case VarRole::Float:
    case VarRole::RangeLo:
    case VarRole::RangeHi: src = &floats_; break;
    case VarRole::Bool:
    case VarRole::Present: src = &bools_; break;
    default: break;
  }
  std::vector<Bucket> out;
  for (const auto& b : *src) {
    int64_t lo = std::max(b.lo, v.lo), hi = std::min(b.hi, v.hi);
    if (lo <= hi) out.push_back({lo, hi});
  }
  return out;
}

void BlockingStore::add(VarId v, int64_t value) {
  auto& vals = values_[v];
  if (std::find(vals.begin(), vals.end(), value) == vals.end()) vals.push_back(value);
}

bool BlockingStore::empty(VarId v) const {
  auto it = values_.find(v);
  return it == values_.end() || it->second.empty();
}

const std::vector<int64_t>& BlockingStore::values(VarId v) const {
  static const std::vector<int64_t> none;
  auto it = values_.find(v);
  return it == values_.end() ? none : it->second;
}

std::map<std::string, int64_t> model_to_map(const SymbolicLayout& layout, const std::vector<int64_t>& model) {
  std::map<std::string, int64_t> out;
  for (size_t i = 0; i < layout.vars().size(); ++i) out[layout.vars()[i].name] = model[i];
  return out;
}

std::vector<int64_t> model_from_map(const SymbolicLayout& layout, const std::map<std::string, int64_t>& model) {
  std::vector<int64_t> out(layout.vars().size());
  for (size_t i = 0; i < out.size(); ++i) {
    auto it = model.find(layout.vars()[i].name);
    if (it == model.end()) throw std::invalid_argument("model lacks layout variable '" + layout.vars()[i].name + "'");
    out[i] = it->second;
  }
  return out;
}

std::vector<Formula> LoweredSet::formulas(const std::vector<bool>& active) const {
  std::vector<Formula> out;
  for (const auto& l : lowered)
    if (active.empty() || active[l.index]) out.push_back(l.formula);
  return out;
}

std::vector<const learn::Invariant*> LoweredSet::approximate(const std::vector<learn::Invariant>& invs,
                                                             const std::vector<bool>& active) const {
  std::vector<const learn::Invariant*> out;
  for (const auto& l : lowered)
    if (l.approximate && (active.empty() || active[l.index])) out.push_back(&invs[l.index]);
  return out;
}

LoweredSet lower_invariants(const std::vector<learn::Invariant>& invs, const SymbolicLayout& layout) {
  LoweredSet out;
  for (size_t i = 0; i < invs.size(); ++i) {
    try {
      auto l = solver::lower_rule(invs[i].rule, invs[i].params, layout);
      out.lowered.push_back({i, std::move(l.formula), l.approximate});
    } catch (const solver::LoweringUnsupported& e) {
      out.unsupported.emplace_back(i, std::string(solver::lowering_kind_name(e.kind())) + ": " + e.what());
    }
  }
  return out;
}

Generator::Generator(const SymbolicLayout& layout, std::vector<Formula> constraints, BucketTable buckets,
                     GenConfig cfg)
    : layout_(layout), constraints_(std::move(constraints)), buckets_(std::move(buckets)), cfg_(cfg) {
  if (!(cfg_.p > 0 && cfg_.p <= 1)) throw std::invalid_argument("sampling ratio must be in (0, 1]");
  for (size_t i = 0; i < layout.vars().size(); ++i)
    if (!layout.vars()[i].internal) candidates_.push_back(static_cast<VarId>(i));
}

std::optional<std::vector<int64_t>> Generator::propose(int64_t iteration, Provenance& prov) {
  std::mt19937_64 rng(mix_seed(cfg_.seed, static_cast<uint64_t>(iteration)));
  prov = Provenance{};
  prov.iteration = iteration;
  size_t k = static_cast<size_t>(std::ceil(cfg_.p * static_cast<double>(candidates_.size())));
  std::vector<VarId> sampled;
  std::sample(candidates_.begin(), candidates_.end(), std::back_inserter(sampled), k, rng);

  std::vector<Formula> blocking, bucketing;
  for (VarId v : sampled) {
    const auto& info = layout_.var(v);
    if (!store_.empty(v)) {
      int64_t value;
      if (auto it = last_.find(v); it != last_.end()) {
        value = it->second;
      } else {
        const auto& vals = store_.values(v);
        value = vals[std::uniform_int_distribution<size_t>(0, vals.size() - 1)(rng)];
      }
      blocking.push_back(Formula::var_ne(v, value));
      prov.blocked.emplace_back(info.name, value);
    }
    auto bs = buckets_.for_var(info);
    if (!bs.empty()) {
      const Bucket& b = bs[std::uniform_int_distribution<size_t>(0, bs.size() - 1)(rng)];
      bucketing.push_back(Formula::in_range(v, b.lo, b.hi));
      prov.buckets.emplace_back(info.name, b);
    } else {
      prov.buckets.emplace_back(info.name, Bucket{info.lo, info.hi});
    }
  }
  solver::SolveOptions opts = cfg_.solve;
  opts.seed = rng();
  std::vector<Formula> all = constraints_;
  all.insert(all.end(), blocking.begin(), blocking.end());
  size_t without_buckets = all.size();
  all.insert(all.end(), bucketing.begin(), bucketing.end());
  auto r = solver::solve(layout_, all, opts);
  if (r.status != solver::SolveStatus::Sat && !bucketing.empty()) {
    ++retries_;
    prov.buckets_dropped = true;
    all.resize(without_buckets);
    r = solver::solve(layout_, all, opts);
  }
  if (r.status == solver::SolveStatus::Sat) return std::move(r.model);
  if (r.status == solver::SolveStatus::Unsat) ++unsat_;
  else ++unknown_;
  return std::nullopt;
}

void Generator::record(const std::vector<int64_t>& model, const Provenance& prov) {
  last_.clear();
  for (const auto& [name, bucket] : prov.buckets) {
    VarId v = layout_.find(name);
    if (v < 0) continue;
    store_.add(v, model[static_cast<size_t>(v)]);
    last_[v] = model[static_cast<size_t>(v)];
  }
}

GenResult generate_abstract_inputs(const std::vector<learn::Invariant>& invs, const SymbolicLayout& layout,
                                   const BucketTable& buckets, exec::Executor& executor, const GenConfig& cfg) {
  if (cfg.target_size < 1) throw std::invalid_argument("target corpus size must be at least 1");
  GenResult res;
  LoweredSet lowered = lower_invariants(invs, layout);
  for (const auto& [i, why] : lowered.unsupported) res.stats.unsupported.push_back(invs[i].key());
  auto formulas = lowered.formulas();
  auto rechecks = lowered.approximate(invs);

  solver::SolveOptions first = cfg.solve;
  first.seed = cfg.seed;
  if (solver::solve(layout, formulas, first).status == solver::SolveStatus::Unsat) {
    std::vector<std::string> core;
    for (size_t i : solver::unsat_core(layout, formulas, first)) core.push_back(invs[lowered.lowered[i].index].key());
    throw BaseUnsat(core);
  }

  Generator g(layout, formulas, buckets, cfg);
  auto start = std::chrono::steady_clock::now();
  for (int64_t iter = 0;; ++iter) {
    if (res.corpus.inputs.size() >= cfg.target_size) break;
    if (cfg.max_iterations && static_cast<size_t>(iter) >= cfg.max_iterations) break;
    if (std::chrono::steady_clock::now() - start >= cfg.timeout) break;
    ++res.stats.iterations;
    Provenance prov;
    auto model = g.propose(iter, prov);
    if (!model) continue;
    std::mt19937_64 rng(mix_seed(cfg.seed ^ 0x5bd1e995ULL, static_cast<uint64_t>(iter)));
    ApiInput input;
    try {
      input = fuzz::concretize(*model, layout, rechecks, rng);
    } catch (const fuzz::ConcretizeFailure&) {
      ++res.stats.concretize_failures;
      continue;
    }
    exec::ExecRequest req;
    req.api = layout.signature().api;
    req.input = std::move(input);
    exec::ExecResult r = executor.run(req);
    if (!exec::is_valid(r.status)) {
      ++res.stats.invalid;
      continue;
    }
    g.record(*model, prov);
    res.corpus.inputs.push_back(AbstractInput{model_to_map(layout, *model), std::move(prov)});
  }
  res.stats.recorded = res.corpus.inputs.size();
  res.stats.unsat = g.unsat();
  res.stats.unknown = g.unknown();
  res.stats.bucket_retries = g.retries();
  return res;
}

learn::ValidityProbe make_validity_probe(const std::vector<learn::Invariant>& invs, const SymbolicLayout& layout,
                                         const LoweredSet& lowered, exec::Executor& executor, double p) {
  return [&invs, &layout, &lowered, &executor, p](const std::vector<bool>& active, uint64_t seed, int trials) {
    learn::Probe out;
    auto formulas = lowered.formulas(active);
    auto rechecks = lowered.approximate(invs, active);
    GenConfig cfg;
    cfg.p = p;
    cfg.seed = seed;
    solver::SolveOptions first = cfg.solve;
    first.seed = seed;
    if (solver::solve(layout, formulas, first).status == solver::SolveStatus::Unsat) {
      out.sat = false;
      std::vector<size_t> idx;
      for (const auto& l : lowered.lowered)
        if (active.empty() || active[l.index]) idx.push_back(l.index);
      for (size_t i : solver::unsat_core(layout, formulas, first)) out.core.push_back(invs[idx[i]].key());
      return out;
    }
    Generator g(layout, formulas, BucketTable::standard(), cfg);
    for (int64_t iter = 0; out.trials < static_cast<size_t>(trials) && iter < 2 * trials; ++iter) {
      Provenance prov;
      auto model = g.propose(iter, prov);
      if (!model) continue;
      g.record(*model, prov);
      std::mt19937_64 rng(mix_seed(seed ^ 0x5bd1e995ULL, static_cast<uint64_t>(iter)));
      exec::ExecRequest req;
      req.api = layout.signature().api;
      try {
        req.input = fuzz::concretize(*model, layout, rechecks, rng);
      } catch (const fuzz::ConcretizeFailure&) {
        continue;  // no input was produced
      }
      ++out.trials;
      if (exec::is_valid(executor.run(req).status)) ++out.valid;
    }
    return out;
  };
}

json abstract_to_json(const AbstractInput& a) {
  json buckets = json::array(), blocked = json::array();
  for (const auto& [n, b] : a.provenance.buckets) buckets.push_back({n, b.lo, b.hi});
  for (const auto& [n, v] : a.provenance.blocked) blocked.push_back({n, v});
  return json{{"model", a.model},
              {"provenance",
               {{"iteration", a.provenance.iteration},
                {"buckets", buckets},
                {"blocked", blocked},
                {"buckets_dropped", a.provenance.buckets_dropped}}}};
}

AbstractInput abstract_from_json(const json& j) {
  AbstractInput a;
  a.model = j.at("model").get<std::map<std::string, int64_t>>();
  const json& p = j.at("provenance");
  a.provenance.iteration = p.at("iteration").get<int64_t>();
  for (const auto& b : p.at("buckets"))
    a.provenance.buckets.emplace_back(b.at(0).get<std::string>(), Bucket{b.at(1).get<int64_t>(), b.at(2).get<int64_t>()});
  for (const auto& b : p.at("blocked")) a.provenance.blocked.emplace_back(b.at(0).get<std::string>(), b.at(1).get<int64_t>());
  a.provenance.buckets_dropped = p.value("buckets_dropped", false);
  return a;
}

void corpus_save(const Corpus& c, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write corpus file '" + path + "'");
  for (const auto& a : c.inputs) out << abstract_to_json(a).dump() << "\n";
  if (!out) throw std::runtime_error("failed writing corpus file '" + path + "'");
}

Corpus corpus_load(const std::string& path) {
  Corpus c;
  std::ifstream in(path);
  if (!in) return c;
  std::string line;
  size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      c.inputs.push_back(abstract_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw CorruptCorpus(no, std::move(c), e.what());
    }
  }
  return c;
}

}  // namespace tcfuzz::gen
