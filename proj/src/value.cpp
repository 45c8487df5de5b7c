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

#include "tcfuzz/value.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tcfuzz {

DtypeTable::DtypeTable(std::vector<DtypeInfo> entries) : entries_(std::move(entries)) {
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].code != static_cast<int>(i)) throw std::invalid_argument("dtype codes must be dense");
    if (entries_[i].byte_width < 1) throw std::invalid_argument("dtype byte width must be positive");
    for (size_t j = 0; j < i; ++j)
      if (entries_[j].name == entries_[i].name) throw std::invalid_argument("duplicate dtype name");
  }
}

const DtypeTable& DtypeTable::standard() {
  static const DtypeTable table({{0, "float32", 4, DtypeKind::Float},
                                 {1, "float64", 8, DtypeKind::Float},
                                 {2, "int32", 4, DtypeKind::Int},
                                 {3, "int64", 8, DtypeKind::Int},
                                 {4, "bool", 1, DtypeKind::Bool},
                                 {5, "complex64", 8, DtypeKind::Complex}});
  return table;
}

const DtypeInfo* DtypeTable::by_code(int code) const {
  if (code < 0 || code >= size()) return nullptr;
  return &entries_[code];
}

const DtypeInfo* DtypeTable::by_name(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return &e;
  return nullptr;
}

int64_t TensorV::numel() const {
  int64_t n = 1;
  for (int64_t s : shape) {
    if (s == 0) return 0;
    if (n > std::numeric_limits<int64_t>::max() / std::max<int64_t>(s, 1)) return std::numeric_limits<int64_t>::max();
    n *= s;
  }
  return n;
}

const char* ConcreteValue::kind_name() const {
  static const char* kNames[] = {"none", "int", "float", "bool", "str", "dtype", "tensor", "list", "tuple"};
  return kNames[v.index()];
}

namespace {
bool same_double(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return a == b && std::signbit(a) == std::signbit(b);
}
}  // namespace

bool operator==(const TensorV& a, const TensorV& b) {
  if (a.ndim != b.ndim || a.shape != b.shape || a.dtype != b.dtype) return false;
  if (!same_double(a.lo, b.lo) || !same_double(a.hi, b.hi)) return false;
  if (a.elements.has_value() != b.elements.has_value()) return false;
  if (!a.elements) return true;
  if (a.elements->size() != b.elements->size()) return false;
  for (size_t i = 0; i < a.elements->size(); ++i)
    if (!same_double((*a.elements)[i], (*b.elements)[i])) return false;
  return true;
}

bool operator==(const ConcreteValue& a, const ConcreteValue& b) {
  if (a.v.index() != b.v.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b.v);
        if constexpr (std::is_same_v<T, double>) {
          return same_double(x, y);
        } else if constexpr (std::is_same_v<T, ListV> || std::is_same_v<T, TupleV>) {
          return x.items == y.items;
        } else {
          return x == y;
        }
      },
      a.v);
}

const Param* ApiSignature::find(const std::string& name) const {
  for (const auto& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

const ConcreteValue* ApiInput::get(const std::string& name) const {
  for (const auto& [k, v] : args)
    if (k == name) return &v;
  return nullptr;
}

void ApiInput::set(const std::string& name, ConcreteValue v) {
  for (auto& [k, old] : args) {
    if (k == name) {
      old = std::move(v);
      return;
    }
  }
  args.emplace_back(name, std::move(v));
}

bool operator==(const ApiInput& a, const ApiInput& b) { return a.api == b.api && a.args == b.args; }

Number tensor_prop(const ConcreteValue& v, dsl::TensorFn fn, std::optional<int64_t> index) {
  const TensorV* t = v.as<TensorV>();
  if (!t) throw ValueError(ValueError::Kind::WrongKind, std::string("expected tensor, found ") + v.kind_name());
  switch (fn) {
    case dsl::TensorFn::Ndim:
      return Number(t->ndim);
    case dsl::TensorFn::Shape: {
      if (!index) throw ValueError(ValueError::Kind::IndexOutOfRange, "shape requires an index");
      int64_t i = *index;
      if (i < 0) i += t->ndim;
      if (i < 0 || i >= t->ndim)
        throw ValueError(ValueError::Kind::IndexOutOfRange,
                         "shape index " + std::to_string(*index) + " out of range for ndim " + std::to_string(t->ndim));
      return Number(t->shape[static_cast<size_t>(i)]);
    }
    case dsl::TensorFn::Dtype:
      return Number(static_cast<int64_t>(t->dtype));
    case dsl::TensorFn::Min:
    case dsl::TensorFn::Max: {
      bool want_min = fn == dsl::TensorFn::Min;
      if (t->elements && !t->elements->empty()) {
        auto [mn, mx] = std::minmax_element(t->elements->begin(), t->elements->end());
        return Number::from_double(want_min ? *mn : *mx);
      }
      return Number::from_double(want_min ? t->lo : t->hi);
    }
  }
  throw ValueError(ValueError::Kind::WrongKind, "unknown tensor function");
}

int64_t byte_size(const TensorV& t, const DtypeTable& table) {
  const DtypeInfo* d = table.by_code(t.dtype);
  if (!d) throw ValueError(ValueError::Kind::UnknownDtype, "unknown dtype code " + std::to_string(t.dtype));
  __int128 n = d->byte_width;
  for (int64_t s : t.shape) {
    n *= s;
    if (n > std::numeric_limits<int64_t>::max()) return std::numeric_limits<int64_t>::max();
  }
  return static_cast<int64_t>(n);
}

std::string validate_tensor(const TensorV& t, const DtypeTable& table) {
  if (t.ndim < 0) return "negative ndim";
  if (t.ndim != static_cast<int64_t>(t.shape.size())) return "ndim does not match shape length";
  for (int64_t s : t.shape)
    if (s < 0) return "negative shape entry";
  if (!table.by_code(t.dtype)) return "unknown dtype code";
  if (!(t.lo <= t.hi)) return "lo exceeds hi";
  if (t.elements) {
    if (static_cast<int64_t>(t.elements->size()) != t.numel()) return "element count does not match shape";
    for (double e : *t.elements)
      if (!(e >= t.lo && e <= t.hi)) return "element outside [lo, hi]";
  }
  return {};
}

bool conforms(const ConcreteValue& v, const dsl::TypePtr& t) {
  using dsl::TypeKind;
  switch (t->kind()) {
    case TypeKind::Int: return v.as<int64_t>() != nullptr;
    case TypeKind::Float: return v.as<double>() != nullptr || v.as<int64_t>() != nullptr;
    case TypeKind::Bool: return v.as<bool>() != nullptr;
    case TypeKind::Str: return v.as<std::string>() != nullptr;
    case TypeKind::Dtype: return v.as<DtypeV>() != nullptr;
    case TypeKind::Tensor: return v.as<TensorV>() != nullptr;
    case TypeKind::List:
    case TypeKind::Tuple: {
      const std::vector<ConcreteValue>* items = nullptr;
      if (auto* l = v.as<ListV>()) items = &l->items;
      if (auto* tp = v.as<TupleV>()) items = &tp->items;
      if (!items) return false;
      for (const auto& it : *items)
        if (!conforms(it, t->elem())) return false;
      return true;
    }
    case TypeKind::Union:
      for (const auto& a : t->arms())
        if (conforms(v, a)) return true;
      return false;
  }
  return false;
}

// ============================================================================
// Documents
// ============================================================================

namespace {

json encode_double(double d) {
  if (std::isnan(d)) return "nan";
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  return d;
}

double decode_double(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw DecodeError(path, "expected a number");
}

void check_fields(const json& doc, const std::string& path, std::initializer_list<const char*> allowed) {
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw DecodeError(path + "." + it.key(), "unknown field");
  }
}

const json& field(const json& doc, const std::string& path, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) throw DecodeError(path + "." + name, "missing field");
  return *it;
}

int64_t decode_int(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<int64_t>();
  if (j.is_number_float()) {
    double d = j.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9.2e18) return static_cast<int64_t>(d);
  }
  throw DecodeError(path, "expected an integer");
}

}  // namespace

json encode_value(const ConcreteValue& v) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, NoneV>) {
          return {{"kind", "none"}};
        } else if constexpr (std::is_same_v<T, int64_t>) {
          return {{"kind", "int"}, {"value", x}};
        } else if constexpr (std::is_same_v<T, double>) {
          return {{"kind", "float"}, {"value", encode_double(x)}};
        } else if constexpr (std::is_same_v<T, bool>) {
          return {{"kind", "bool"}, {"value", x}};
        } else if constexpr (std::is_same_v<T, std::string>) {
          return {{"kind", "str"}, {"value", x}};
        } else if constexpr (std::is_same_v<T, DtypeV>) {
          const DtypeInfo* d = DtypeTable::standard().by_code(x.code);
          return {{"kind", "dtype"}, {"value", d ? json(d->name) : json(x.code)}};
        } else if constexpr (std::is_same_v<T, TensorV>) {
          const DtypeInfo* d = DtypeTable::standard().by_code(x.dtype);
          json j = {{"kind", "tensor"},
                    {"ndim", x.ndim},
                    {"shape", x.shape},
                    {"dtype", d ? json(d->name) : json(x.dtype)},
                    {"lo", encode_double(x.lo)},
                    {"hi", encode_double(x.hi)}};
          if (x.elements) {
            json arr = json::array();
            for (double e : *x.elements) arr.push_back(encode_double(e));
            j["elements"] = std::move(arr);
          }
          return j;
        } else {
          json arr = json::array();
          for (const auto& it : x.items) arr.push_back(encode_value(it));
          return {{"kind", std::is_same_v<T, ListV> ? "list" : "tuple"}, {"items", std::move(arr)}};
        }
      },
      v.v);
}

namespace {
int decode_dtype(const json& j, const std::string& path) {
  if (j.is_string()) {
    const DtypeInfo* d = DtypeTable::standard().by_name(j.get<std::string>());
    if (!d) throw DecodeError(path, "unknown dtype name");
    return d->code;
  }
  int64_t code = decode_int(j, path);
  if (!DtypeTable::standard().by_code(static_cast<int>(code))) throw DecodeError(path, "unknown dtype code");
  return static_cast<int>(code);
}
}  // namespace

ConcreteValue decode_value(const json& doc, const std::string& path) {
  if (!doc.is_object()) throw DecodeError(path, "expected an object");
  const json& kind_j = field(doc, path, "kind");
  if (!kind_j.is_string()) throw DecodeError(path + ".kind", "expected a string");
  const std::string kind = kind_j.get<std::string>();
  if (kind == "none") {
    check_fields(doc, path, {"kind"});
    return NoneV{};
  }
  if (kind == "int") {
    check_fields(doc, path, {"kind", "value"});
    return decode_int(field(doc, path, "value"), path + ".value");
  }
  if (kind == "float") {
    check_fields(doc, path, {"kind", "value"});
    return decode_double(field(doc, path, "value"), path + ".value");
  }
  if (kind == "bool") {
    check_fields(doc, path, {"kind", "value"});
    const json& b = field(doc, path, "value");
    if (!b.is_boolean()) throw DecodeError(path + ".value", "expected a boolean");
    return b.get<bool>();
  }
  if (kind == "str") {
    check_fields(doc, path, {"kind", "value"});
    const json& s = field(doc, path, "value");
    if (!s.is_string()) throw DecodeError(path + ".value", "expected a string");
    return s.get<std::string>();
  }
  if (kind == "dtype") {
    check_fields(doc, path, {"kind", "value"});
    return DtypeV{decode_dtype(field(doc, path, "value"), path + ".value")};
  }
  if (kind == "tensor") {
    check_fields(doc, path, {"kind", "ndim", "shape", "dtype", "lo", "hi", "elements"});
    TensorV t;
    const json& shape = field(doc, path, "shape");
    if (!shape.is_array()) throw DecodeError(path + ".shape", "expected an array");
    for (size_t i = 0; i < shape.size(); ++i) {
      int64_t s = decode_int(shape[i], path + ".shape[" + std::to_string(i) + "]");
      if (s < 0) throw DecodeError(path + ".shape[" + std::to_string(i) + "]", "negative dimension");
      t.shape.push_back(s);
    }
    auto nd = doc.find("ndim");
    t.ndim = nd == doc.end() ? static_cast<int64_t>(t.shape.size()) : decode_int(*nd, path + ".ndim");
    if (t.ndim != static_cast<int64_t>(t.shape.size()))
      throw DecodeError(path + ".shape", "length " + std::to_string(t.shape.size()) + " does not match ndim " +
                                             std::to_string(t.ndim));
    t.dtype = decode_dtype(field(doc, path, "dtype"), path + ".dtype");
    t.lo = decode_double(field(doc, path, "lo"), path + ".lo");
    t.hi = decode_double(field(doc, path, "hi"), path + ".hi");
    if (!(t.lo <= t.hi)) throw DecodeError(path + ".hi", "lo exceeds hi");
    if (auto el = doc.find("elements"); el != doc.end()) {
      if (!el->is_array()) throw DecodeError(path + ".elements", "expected an array");
      std::vector<double> elems;
      elems.reserve(el->size());
      for (size_t i = 0; i < el->size(); ++i) elems.push_back(decode_double((*el)[i], path + ".elements[" + std::to_string(i) + "]"));
      t.elements = std::move(elems);
    }
    std::string err = validate_tensor(t);
    if (!err.empty()) throw DecodeError(path + ".elements", err);
    return t;
  }
  if (kind == "list" || kind == "tuple") {
    check_fields(doc, path, {"kind", "items"});
    const json& items = field(doc, path, "items");
    if (!items.is_array()) throw DecodeError(path + ".items", "expected an array");
    std::vector<ConcreteValue> out;
    for (size_t i = 0; i < items.size(); ++i) out.push_back(decode_value(items[i], path + ".items[" + std::to_string(i) + "]"));
    if (kind == "list") return ListV{std::move(out)};
    return TupleV{std::move(out)};
  }
  throw DecodeError(path + ".kind", "unknown kind '" + kind + "'");
}

json encode_input(const ApiInput& in) {
  json args = json::object();
  json order = json::array();
  for (const auto& [k, v] : in.args) {
    args[k] = encode_value(v);
    order.push_back(k);
  }
  return {{"api", in.api}, {"args", args}, {"order", order}};
}

ApiInput decode_input(const json& doc) {
  if (!doc.is_object()) throw DecodeError("$", "expected an object");
  check_fields(doc, "$", {"api", "args", "order"});
  ApiInput in;
  const json& api = field(doc, "$", "api");
  if (!api.is_string()) throw DecodeError("$.api", "expected a string");
  in.api = api.get<std::string>();
  const json& args = field(doc, "$", "args");
  if (!args.is_object()) throw DecodeError("$.args", "expected an object");
  std::vector<std::string> order;
  if (auto o = doc.find("order"); o != doc.end()) {
    for (const auto& k : *o) order.push_back(k.get<std::string>());
  } else {
    for (auto it = args.begin(); it != args.end(); ++it) order.push_back(it.key());
  }
  for (const auto& k : order) {
    auto it = args.find(k);
    if (it == args.end()) throw DecodeError("$.order", "names missing argument '" + k + "'");
    in.args.emplace_back(k, decode_value(*it, "$.args." + k));
  }
  return in;
}

std::string input_bytes(const ApiInput& in) { return encode_input(in).dump(); }

}  // namespace tcfuzz
