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

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "tcfuzz/dsl/parser.hpp"
#include "tcfuzz/executor/executor.hpp"
#include "tcfuzz/executor/targets.hpp"

namespace tcfuzz::exec {

const char* exec_status_name(ExecStatus s) {
  switch (s) {
    case ExecStatus::Ok: return "ok";
    case ExecStatus::Error: return "error";
    case ExecStatus::Crash: return "crash";
    case ExecStatus::Timeout: return "timeout";
  }
  return "?";
}

std::optional<ExecStatus> parse_exec_status(const std::string& s) {
  for (auto st : {ExecStatus::Ok, ExecStatus::Error, ExecStatus::Crash, ExecStatus::Timeout})
    if (s == exec_status_name(st)) return st;
  return std::nullopt;
}

const ApiInfo* Executor::find(const std::string& api) const {
  for (const auto& a : catalog())
    if (a.api == api) return &a;
  return nullptr;
}

json request_to_json(const ExecRequest& r) {
  json in = encode_input(r.input);
  return json{{"id", r.id},         {"api", r.api},     {"backend", r.backend},
              {"args", in["args"]}, {"order", in["order"]}, {"want_outputs", r.want_outputs}};
}

ExecRequest request_from_json(const json& j) {
  try {
    ExecRequest r;
    r.id = j.at("id").get<int64_t>();
    r.api = j.at("api").get<std::string>();
    r.backend = j.value("backend", std::string("cpu"));
    json order = j.contains("order") ? j["order"] : json::array();
    if (!j.contains("order"))
      for (const auto& [k, v] : j.at("args").items()) order.push_back(k);
    r.input = decode_input(json{{"api", r.api}, {"args", j.at("args")}, {"order", order}});
    r.want_outputs = j.value("want_outputs", false);
    return r;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("bad request: ") + e.what());
  } catch (const DecodeError& e) {
    throw ProtocolError(std::string("bad request input: ") + e.what());
  }
}

json result_to_json(const ExecResult& r) {
  json j{{"id", r.id},
         {"status", exec_status_name(r.status)},
         {"covered_branches", r.covered_branches},
         {"warnings", r.warnings},
         {"wall_time_us", r.wall_time_us}};
  j["error_message"] = r.error_message ? json(*r.error_message) : json(nullptr);
  if (r.outputs) {
    json outs = json::array();
    for (const auto& v : *r.outputs) outs.push_back(encode_value(v));
    j["outputs"] = outs;
    if (!r.output_probes.empty()) {
      json probes = json::array();
      for (const auto& p : r.output_probes) {
        json arr = json::array();
        for (double v : p) arr.push_back(encode_value(v));
        probes.push_back(arr);
      }
      j["output_probes"] = probes;
    }
  } else {
    j["outputs"] = nullptr;
  }
  return j;
}

ExecResult result_from_json(const json& j) {
  try {
    ExecResult r;
    r.id = j.at("id").get<int64_t>();
    auto st = parse_exec_status(j.at("status").get<std::string>());
    if (!st) throw ProtocolError("bad result status");
    r.status = *st;
    if (j.contains("error_message") && !j["error_message"].is_null())
      r.error_message = j["error_message"].get<std::string>();
    if (j.contains("outputs") && !j["outputs"].is_null()) {
      std::vector<ConcreteValue> outs;
      for (const auto& o : j["outputs"]) outs.push_back(decode_value(o));
      r.outputs = std::move(outs);
    }
    if (j.contains("output_probes"))
      for (const auto& p : j["output_probes"]) {
        std::vector<double> vals;
        for (const auto& v : p) {
          ConcreteValue cv = decode_value(v);
          if (const double* d = cv.as<double>()) vals.push_back(*d);
          else if (const int64_t* i = cv.as<int64_t>()) vals.push_back(static_cast<double>(*i));
          else throw ProtocolError("bad probe value");
        }
        r.output_probes.push_back(std::move(vals));
      }
    r.covered_branches = j.value("covered_branches", std::vector<std::string>{});
    r.warnings = j.value("warnings", std::vector<std::string>{});
    r.wall_time_us = j.value("wall_time_us", int64_t{0});
    return r;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("bad result: ") + e.what());
  } catch (const DecodeError& e) {
    throw ProtocolError(std::string("bad result outputs: ") + e.what());
  }
}

json handshake_json(const std::vector<ApiInfo>& catalog) {
  json apis = json::array();
  for (const auto& a : catalog) {
    json params = json::array();
    for (const auto& p : a.signature.params)
      params.push_back({{"name", p.name}, {"type", p.type->to_string()}, {"required", p.required}});
    apis.push_back({{"api", a.api}, {"params", params}, {"doc", a.doc}, {"backends", a.backends}});
  }
  return json{{"protocol", kProtocolVersion}, {"apis", apis}};
}

std::vector<ApiInfo> handshake_from_json(const json& j) {
  try {
    if (j.at("protocol").get<std::string>() != kProtocolVersion) throw ProtocolError("protocol version mismatch");
    std::vector<ApiInfo> out;
    for (const auto& a : j.at("apis")) {
      ApiInfo info;
      info.api = a.at("api").get<std::string>();
      info.signature.api = info.api;
      for (const auto& p : a.at("params"))
        info.signature.params.push_back(
            Param{p.at("name").get<std::string>(), dsl::parse_type(p.at("type").get<std::string>()), p.value("required", true)});
      info.doc = a.value("doc", std::string());
      info.backends = a.value("backends", std::vector<std::string>{"cpu"});
      out.push_back(std::move(info));
    }
    return out;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("bad handshake: ") + e.what());
  } catch (const dsl::ParseError& e) {
    throw ProtocolError(std::string("bad handshake type: ") + e.what());
  }
}

ExecResult run_reference(const ExecRequest& req) {
  const ReferenceTarget* t = find_target(req.api);
  if (!t) throw UnknownApi(req.api);
  auto start = std::chrono::steady_clock::now();
  ExecResult r;
  r.id = req.id;
  try {
    TargetCall c = t->call(req.input, req.backend);
    r.status = c.status;
    if (c.status != ExecStatus::Ok) r.error_message = c.message;
    if (c.status == ExecStatus::Ok && req.want_outputs) {
      r.outputs = std::move(c.outputs);
      bool any = false;
      for (const auto& p : c.probes) any = any || !p.empty();
      if (any) r.output_probes = std::move(c.probes);
    }
    r.covered_branches = std::move(c.branches);
    r.warnings = std::move(c.warnings);
  } catch (const SimulatedCrash& crash) {
    r.status = ExecStatus::Crash;
    r.error_message = crash.detail;
  }
  r.wall_time_us =
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void serve(std::istream& in, std::ostream& out, bool abort_on_crash) {
  out << handshake_json(reference_catalog()).dump() << "\n" << std::flush;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json reply;
    try {
      ExecRequest req = request_from_json(json::parse(line));
      ExecResult r = run_reference(req);
      if (r.status == ExecStatus::Crash && abort_on_crash) std::abort();
      reply = result_to_json(r);
    } catch (const UnknownApi& e) {
      reply = json{{"error", "unknown_api"}, {"api", e.api()}};
    } catch (const std::exception& e) {
      reply = json{{"error", "protocol"}, {"message", e.what()}};
    }
    out << reply.dump() << "\n" << std::flush;
  }
}

}  // namespace tcfuzz::exec
