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

#include "tcfuzz/fuzz/fuzzer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace tcfuzz::fuzz {

namespace {

using exec::ExecRequest;
using exec::ExecResult;
using exec::ExecStatus;

std::string fnv_hex(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Numeric view of one output: elements, or probe values for summaries.
struct NumView {
  std::vector<int64_t> shape;
  std::vector<double> values;
  bool numeric = false;
};

NumView view(const ExecResult& r, size_t i) {
  NumView v;
  const ConcreteValue& o = (*r.outputs)[i];
  if (const TensorV* t = o.as<TensorV>()) {
    v.numeric = true;
    v.shape = t->shape;
    if (i < r.output_probes.size() && !r.output_probes[i].empty()) v.values = r.output_probes[i];
    else if (t->elements) v.values = *t->elements;
  } else if (const double* d = o.as<double>()) {
    v.numeric = true;
    v.values = {*d};
  } else if (const int64_t* n = o.as<int64_t>()) {
    v.numeric = true;
    v.values = {static_cast<double>(*n)};
  }
  return v;
}

bool has_nan(const ExecResult& r) {
  if (!r.outputs) return false;
  for (size_t i = 0; i < r.outputs->size(); ++i)
    for (double x : view(r, i).values)
      if (std::isnan(x)) return true;
  return false;
}

bool has_overflow(const ExecResult& r) {
  for (const auto& w : r.warnings)
    if (w == "overflow") return true;
  return false;
}

ExecResult run_on(exec::Executor& ex, const std::string& api, const ApiInput& in, const std::string& backend) {
  ExecRequest req;
  req.api = api;
  req.backend = backend;
  req.input = in;
  req.want_outputs = true;
  return ex.run(req);
}

void check_backends(exec::Executor& ex, const std::string& api, const std::vector<std::string>& backends) {
  const exec::ApiInfo* info = ex.find(api);
  if (!info) throw exec::UnknownApi(api);
  for (const auto& b : backends)
    if (std::find(info->backends.begin(), info->backends.end(), b) == info->backends.end())
      throw BackendUnavailable("backend '" + b + "' is not offered for " + api);
}

struct Iteration {
  ExecStatus status = ExecStatus::Ok;
  std::optional<Finding> finding;
  std::vector<std::string> branches;
};

Iteration run_iteration(const FuzzTarget& t, exec::Executor& ex, const ApiInput& input, uint64_t seed,
                        const FuzzConfig& cfg) {
  Iteration it;
  const std::string& api = t.layout->signature().api;
  std::vector<ExecResult> results;
  for (size_t b = 0; b < cfg.backends.size(); ++b) {
    ExecResult r = run_on(ex, api, input, cfg.backends[b]);
    if (b == 0) {
      it.status = r.status;
      it.branches = r.covered_branches;
    }
    if (r.status == ExecStatus::Crash || r.status == ExecStatus::Timeout) {
      if (b == 0 || it.status == ExecStatus::Ok) {
        Finding f;
        f.kind = FindingKind::Crash;
        f.api = api;
        f.input = input;
        f.backends = {cfg.backends[b]};
        f.evidence = std::string(exec::exec_status_name(r.status)) + ": " + r.error_message.value_or("");
        f.seed = seed;
        f.dedup_hash = fnv_hex(std::string("crash|") + api + "|" + f.evidence);
        it.finding = std::move(f);
      }
      return it;
    }
    if (r.status != ExecStatus::Ok) return it;
    results.push_back(std::move(r));
  }
  for (size_t b = 1; b < results.size(); ++b) {
    DiffVerdict d = compare_results(results[0], cfg.backends[0], results[b], cfg.backends[b], cfg.tolerance);
    if (d.agree) continue;
    Finding f;
    f.kind = d.kind;
    f.api = api;
    f.input = input;
    f.backends = {cfg.backends[0], cfg.backends[b]};
    f.evidence = d.evidence;
    f.max_abs_diff = d.max_abs_diff;
    f.seed = seed;
    f.dedup_hash = fnv_hex(std::string(finding_kind_name(d.kind)) + "|" + api + "|" + d.evidence);
    it.finding = std::move(f);
    break;
  }
  return it;
}

}  // namespace

const char* finding_kind_name(FindingKind k) {
  switch (k) {
    case FindingKind::Crash: return "crash";
    case FindingKind::NaN: return "nan";
    case FindingKind::Overflow: return "overflow";
    case FindingKind::Inconsistent: return "inconsistent";
  }
  return "?";
}

std::optional<FindingKind> parse_finding_kind(const std::string& s) {
  for (auto k : {FindingKind::Crash, FindingKind::NaN, FindingKind::Overflow, FindingKind::Inconsistent})
    if (s == finding_kind_name(k)) return k;
  return std::nullopt;
}

DiffVerdict compare_results(const ExecResult& a, const std::string& backend_a, const ExecResult& b,
                            const std::string& backend_b, double tolerance) {
  DiffVerdict d;
  bool na = has_nan(a), nb = has_nan(b);
  if (na != nb) {
    d.agree = false;
    d.kind = FindingKind::NaN;
    d.evidence = "NaN only on " + (na ? backend_a : backend_b);
    return d;
  }
  bool oa = has_overflow(a), ob = has_overflow(b);
  if (oa != ob) {
    d.agree = false;
    d.kind = FindingKind::Overflow;
    d.evidence = "overflow reported only on " + (oa ? backend_a : backend_b);
    return d;
  }
  size_t n = a.outputs ? a.outputs->size() : 0;
  size_t m = b.outputs ? b.outputs->size() : 0;
  auto inconsistent = [&](const std::string& why, double diff) {
    d.agree = false;
    d.kind = FindingKind::Inconsistent;
    d.evidence = why + " between " + backend_a + " and " + backend_b;
    d.max_abs_diff = diff;
    return d;
  };
  if (n != m) return inconsistent("output count differs", 0);
  double worst = 0;
  for (size_t i = 0; i < n; ++i) {
    NumView va = view(a, i), vb = view(b, i);
    if (!va.numeric || !vb.numeric) {
      if (!((*a.outputs)[i] == (*b.outputs)[i])) return inconsistent("non-numeric output differs", 0);
      continue;
    }
    if (va.shape != vb.shape || va.values.size() != vb.values.size()) return inconsistent("output shape differs", 0);
    for (size_t k = 0; k < va.values.size(); ++k) {
      double x = va.values[k], y = vb.values[k];
      if (std::isnan(x) && std::isnan(y)) continue;
      if (std::isinf(x) || std::isinf(y)) {
        if (x != y) return inconsistent("infinite value differs", INFINITY);
        continue;
      }
      worst = std::max(worst, std::abs(x - y));
    }
  }
  d.max_abs_diff = worst;
  if (worst > tolerance) return inconsistent("values differ beyond tolerance", worst);
  return d;
}

DiffVerdict run_differential(exec::Executor& executor, const std::string& api, const ApiInput& input,
                             const std::vector<std::string>& backends, double tolerance) {
  if (backends.size() < 2) throw BackendUnavailable("differential testing needs at least two backends");
  check_backends(executor, api, backends);
  std::vector<ExecResult> rs;
  for (const auto& b : backends) rs.push_back(run_on(executor, api, input, b));
  for (size_t i = 1; i < rs.size(); ++i) {
    if (rs[0].status != ExecStatus::Ok || rs[i].status != ExecStatus::Ok) continue;
    DiffVerdict d = compare_results(rs[0], backends[0], rs[i], backends[i], tolerance);
    if (!d.agree) return d;
  }
  return DiffVerdict{};
}

FuzzTarget make_fuzz_target(const solver::SymbolicLayout& layout, const gen::Corpus& corpus,
                            const std::vector<learn::Invariant>& invariants) {
  FuzzTarget t;
  t.layout = &layout;
  for (const auto& a : corpus.inputs) t.models.push_back(gen::model_from_map(layout, a.model));
  auto lowered = gen::lower_invariants(invariants, layout);
  for (const auto* inv : lowered.approximate(invariants)) t.rechecks.push_back(*inv);
  return t;
}

uint64_t iteration_seed(uint64_t seed, uint64_t iteration) { return gen::mix_seed(seed ^ 0xf0221e5ULL, iteration); }

ApiInput input_for_seed(const FuzzTarget& t, uint64_t seed) {
  if (t.models.empty()) throw EmptyCorpus();
  std::mt19937_64 rng(seed);
  size_t idx = std::uniform_int_distribution<size_t>(0, t.models.size() - 1)(rng);
  std::vector<const learn::Invariant*> rc;
  for (const auto& inv : t.rechecks) rc.push_back(&inv);
  return concretize(t.models[idx], *t.layout, rc, rng);
}

FuzzReport fuzz_api(const FuzzTarget& target, exec::Executor& executor, const FuzzConfig& cfg) {
  if (target.models.empty()) throw EmptyCorpus();
  if (cfg.budget.count() <= 0) throw std::invalid_argument("fuzz budget must be positive");
  if (cfg.tolerance < 0) throw std::invalid_argument("tolerance must be non-negative");
  const std::string& api = target.layout->signature().api;
  check_backends(executor, api, cfg.backends);
  FuzzReport rep;
  rep.api = api;
  std::set<std::string> seen;
  double conc_s = 0;
  size_t conc_n = 0;
  auto start = std::chrono::steady_clock::now();
  for (uint64_t i = 0;; ++i) {
    auto now = std::chrono::steady_clock::now();
    if (now - start >= cfg.budget) break;
    if (cfg.max_inputs && rep.generated >= cfg.max_inputs) break;
    uint64_t seed = iteration_seed(cfg.seed, i);
    ApiInput input;
    try {
      auto c0 = std::chrono::steady_clock::now();
      input = input_for_seed(target, seed);
      conc_s += std::chrono::duration<double>(std::chrono::steady_clock::now() - c0).count();
      ++conc_n;
    } catch (const ConcretizeFailure&) {
      ++rep.concretize_failures;
      continue;
    }
    Iteration it = run_iteration(target, executor, input, seed, cfg);
    ++rep.generated;
    switch (it.status) {
      case ExecStatus::Ok: ++rep.ok; break;
      case ExecStatus::Error: ++rep.invalid; break;
      case ExecStatus::Crash:
      case ExecStatus::Timeout: ++rep.crashed; break;
    }
    rep.branches.insert(it.branches.begin(), it.branches.end());
    if (it.finding) {
      if (it.finding->kind == FindingKind::Crash && rep.first_crash_s < 0)
        rep.first_crash_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::string key = std::string(finding_kind_name(it.finding->kind)) + "|" + it.finding->dedup_hash;
      if (seen.insert(key).second) {
        if (!cfg.findings_dir.empty()) write_finding(*it.finding, cfg.findings_dir + "/" + cfg.library + "/" + api);
        rep.findings.push_back(std::move(*it.finding));
        if (cfg.stop_at_first_finding) break;
      }
    }
  }
  rep.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.valid = rep.ok + rep.crashed;
  rep.validity_ratio = rep.generated ? static_cast<double>(rep.valid) / static_cast<double>(rep.generated) : 0;
  rep.throughput = rep.elapsed_s > 0 ? static_cast<double>(rep.generated) / rep.elapsed_s : 0;
  rep.concretize_ms_mean = conc_n ? 1000.0 * conc_s / static_cast<double>(conc_n) : 0;
  return rep;
}

std::optional<Finding> replay(const FuzzTarget& target, exec::Executor& executor, uint64_t seed,
                              const FuzzConfig& cfg) {
  ApiInput input = input_for_seed(target, seed);
  return run_iteration(target, executor, input, seed, cfg).finding;
}

json finding_to_json(const Finding& f) {
  return json{{"kind", finding_kind_name(f.kind)},
              {"api", f.api},
              {"input", encode_input(f.input)},
              {"backends", f.backends},
              {"evidence", f.evidence},
              {"max_abs_diff", std::isfinite(f.max_abs_diff) ? json(f.max_abs_diff) : json("inf")},
              {"seed", f.seed},
              {"hash", f.dedup_hash}};
}

Finding finding_from_json(const json& j) {
  Finding f;
  auto k = parse_finding_kind(j.at("kind").get<std::string>());
  if (!k) throw std::invalid_argument("unknown finding kind");
  f.kind = *k;
  f.api = j.at("api").get<std::string>();
  f.input = decode_input(j.at("input"));
  f.backends = j.at("backends").get<std::vector<std::string>>();
  f.evidence = j.at("evidence").get<std::string>();
  f.max_abs_diff = j.at("max_abs_diff").is_string() ? INFINITY : j.at("max_abs_diff").get<double>();
  f.seed = j.at("seed").get<uint64_t>();
  f.dedup_hash = j.value("hash", std::string());
  return f;
}

json fuzz_report_to_json(const FuzzReport& r) {
  json findings = json::array();
  for (const auto& f : r.findings) findings.push_back(finding_to_json(f));
  return json{{"api", r.api},
              {"generated", r.generated},
              {"valid", r.valid},
              {"ok", r.ok},
              {"invalid", r.invalid},
              {"crashed", r.crashed},
              {"concretize_failures", r.concretize_failures},
              {"validity_ratio", r.validity_ratio},
              {"throughput", r.throughput},
              {"concretize_ms_mean", r.concretize_ms_mean},
              {"branches", r.branches},
              {"findings", findings}};
}

std::string write_finding(const Finding& f, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::string path = dir + "/" + finding_kind_name(f.kind) + "-" + f.dedup_hash + ".json";
  std::ofstream out(path, std::ios::trunc);
  out << finding_to_json(f).dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write finding '" + path + "'");
  return path;
}

}  // namespace tcfuzz::fuzz
