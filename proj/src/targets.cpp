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

#include "tcfuzz/executor/targets.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "tcfuzz/dsl/parser.hpp"

namespace tcfuzz::exec {

namespace {

constexpr int kF32 = 0, kF64 = 1, kI32 = 2, kI64 = 3, kBool = 4, kC64 = 5;

const char* kBroadcast =
    "{v_1: tensor, v_2: tensor} |= if ndim(v_1) = ndim(v_2) then forall i in [0, ndim(v_1) - 1] : "
    "shape(v_1, i) = shape(v_2, i) or shape(v_1, i) = 1 or shape(v_2, i) = 1 "
    "else if ndim(v_1) > ndim(v_2) then forall i in [0, ndim(v_2) - 1] : "
    "shape(v_1, ndim(v_1) - ndim(v_2) + i) = shape(v_2, i) or shape(v_1, ndim(v_1) - ndim(v_2) + i) = 1 or "
    "shape(v_2, i) = 1 "
    "else forall i in [0, ndim(v_1) - 1] : "
    "shape(v_2, ndim(v_2) - ndim(v_1) + i) = shape(v_1, i) or shape(v_2, ndim(v_2) - ndim(v_1) + i) = 1 or "
    "shape(v_1, i) = 1";
const char* kSameDtype = "{v_1: tensor, v_2: tensor} |= dtype_(v_1) = dtype_(v_2)";
const char* kDimValid = "{v_1: tensor, v_2: int} |= (-1 * ndim(v_1) <= v_2) and (v_2 <= ndim(v_1) - 1)";
const char* kNonNegative = "{v_1: int} |= v_1 >= 0";

std::string shape_text(const std::vector<int64_t>& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) out += (i ? ", " : "") + std::to_string(s[i]);
  return out + "]";
}

std::string dtype_name(int code) {
  const DtypeInfo* d = DtypeTable::standard().by_code(code);
  return d ? d->name : "dtype" + std::to_string(code);
}

bool is_integral(int code) { return code == kI32 || code == kI64 || code == kBool; }

// Argument access; a missing or mistyped argument is an API error.
struct Args {
  const ApiInput& in;
  std::string error;

  const TensorV* tensor(const std::string& name) {
    if (!error.empty()) return nullptr;
    const ConcreteValue* v = in.get(name);
    if (!v) {
      error = "missing required argument '" + name + "'";
      return nullptr;
    }
    const TensorV* t = v->as<TensorV>();
    if (!t) {
      error = "argument '" + name + "' must be a tensor, not " + v->kind_name();
      return nullptr;
    }
    std::string bad = validate_tensor(*t);
    if (!bad.empty()) {
      error = "argument '" + name + "' is malformed: " + bad;
      return nullptr;
    }
    return t;
  }

  std::optional<int64_t> integer(const std::string& name) {
    if (!error.empty()) return std::nullopt;
    const ConcreteValue* v = in.get(name);
    if (!v) {
      error = "missing required argument '" + name + "'";
      return std::nullopt;
    }
    if (auto* i = v->as<int64_t>()) return *i;
    error = "argument '" + name + "' must be int, not " + v->kind_name();
    return std::nullopt;
  }

  std::optional<double> real(const std::string& name, double fallback) {
    if (!error.empty()) return std::nullopt;
    const ConcreteValue* v = in.get(name);
    if (!v || v->is_none()) return fallback;
    if (auto* d = v->as<double>()) return *d;
    if (auto* i = v->as<int64_t>()) return static_cast<double>(*i);
    error = "argument '" + name + "' must be a number, not " + v->kind_name();
    return std::nullopt;
  }
};

TargetCall fail(std::string msg, std::vector<std::string> branches) {
  TargetCall c;
  c.status = ExecStatus::Error;
  c.message = std::move(msg);
  c.branches = std::move(branches);
  return c;
}

TensorV make_tensor(std::vector<int64_t> shape, int dtype, std::vector<double> elems) {
  TensorV t;
  t.ndim = static_cast<int64_t>(shape.size());
  t.shape = std::move(shape);
  t.dtype = dtype;
  if (!elems.empty()) {
    auto [mn, mx] = std::minmax_element(elems.begin(), elems.end(), [](double a, double b) {
      if (std::isnan(a)) return false;
      if (std::isnan(b)) return true;
      return a < b;
    });
    t.lo = std::isnan(*mn) ? 0 : *mn;
    t.hi = std::isnan(*mx) ? 0 : *mx;
  }
  t.elements = std::move(elems);
  return t;
}

std::optional<std::vector<int64_t>> broadcast_shape(const std::vector<int64_t>& a, const std::vector<int64_t>& b) {
  size_t n = std::max(a.size(), b.size());
  std::vector<int64_t> out(n);
  for (size_t k = 0; k < n; ++k) {
    int64_t x = k < a.size() ? a[a.size() - 1 - k] : 1;
    int64_t y = k < b.size() ? b[b.size() - 1 - k] : 1;
    if (x != y && x != 1 && y != 1) return std::nullopt;
    out[n - 1 - k] = x == 1 ? y : x;
  }
  return out;
}

// Applies f elementwise over the broadcast of a and b; with `only`, just at
// those flat output indices.
template <typename F>
std::vector<double> broadcast_apply(const TensorV& a, const std::vector<double>& ea, const TensorV& b,
                                    const std::vector<double>& eb, const std::vector<int64_t>& out_shape, F f,
                                    const std::vector<int64_t>* only = nullptr) {
  size_t n = out_shape.size();
  auto strides = [&](const std::vector<int64_t>& s) {
    std::vector<int64_t> st(n, 0);
    int64_t acc = 1;
    for (size_t k = 0; k < s.size(); ++k) {
      size_t axis = s.size() - 1 - k;
      size_t oaxis = n - 1 - k;
      st[oaxis] = s[axis] == 1 ? 0 : acc;
      acc *= s[axis];
    }
    return st;
  };
  auto sa = strides(a.shape), sb = strides(b.shape);
  if (only) {
    std::vector<double> out;
    out.reserve(only->size());
    for (int64_t flat : *only) {
      int64_t ia = 0, ib = 0, rest = flat;
      for (size_t k = n; k-- > 0;) {
        int64_t i = rest % out_shape[k];
        rest /= out_shape[k];
        ia += i * sa[k];
        ib += i * sb[k];
      }
      out.push_back(f(ea[static_cast<size_t>(ia)], eb[static_cast<size_t>(ib)]));
    }
    return out;
  }
  int64_t total = 1;
  for (auto d : out_shape) total *= d;
  std::vector<double> out(static_cast<size_t>(total));
  std::vector<int64_t> idx(n, 0);
  int64_t ia = 0, ib = 0;
  for (int64_t flat = 0; flat < total; ++flat) {
    out[static_cast<size_t>(flat)] = f(ea[static_cast<size_t>(ia)], eb[static_cast<size_t>(ib)]);
    for (size_t k = n; k-- > 0;) {
      ++idx[k];
      ia += sa[k];
      ib += sb[k];
      if (idx[k] < out_shape[k]) break;
      ia -= sa[k] * idx[k];
      ib -= sb[k] * idx[k];
      idx[k] = 0;
    }
  }
  return out;
}

// Output of a broadcasting op: full when small, else a summary plus probes.
template <typename F>
void emit_broadcast(TargetCall& c, const TensorV& a, const TensorV& b, const std::vector<int64_t>& shape, int dtype,
                    F f, const std::function<void(std::vector<double>&)>& post) {
  auto ea = tensor_elements(a), eb = tensor_elements(b);
  int64_t total = 1;
  for (auto d : shape) total *= d;
  if (total <= kOutputElementCap) {
    auto out = broadcast_apply(a, ea, b, eb, shape, f);
    post(out);
    c.outputs.push_back(make_tensor(shape, dtype, std::move(out)));
    c.probes.emplace_back();
    return;
  }
  auto idx = probe_indices(total);
  auto vals = broadcast_apply(a, ea, b, eb, shape, f, &idx);
  post(vals);
  TensorV t = make_tensor(shape, dtype, vals);
  t.elements.reset();
  c.outputs.push_back(std::move(t));
  c.probes.push_back(std::move(vals));
}

// Random valid-input helpers.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}
int64_t randint(std::mt19937_64& rng, int64_t lo, int64_t hi) {
  return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
}

TensorV random_tensor(std::mt19937_64& rng, std::vector<int64_t> shape, int dtype, double lo_min = -50,
                      double lo_max = 50) {
  double lo = std::round(uniform(rng, lo_min, lo_max));
  double hi = lo + std::round(uniform(rng, 0, 100));
  if (dtype == kBool) {
    lo = 0;
    hi = 1;
  }
  int64_t n = 1;
  for (auto d : shape) n *= d;
  std::vector<double> el(static_cast<size_t>(n));
  for (auto& x : el) {
    x = uniform(rng, lo, hi);
    if (is_integral(dtype)) x = std::min(hi, std::floor(x + 0.5));
  }
  TensorV t;
  t.ndim = static_cast<int64_t>(shape.size());
  t.shape = std::move(shape);
  t.dtype = dtype;
  t.lo = lo;
  t.hi = hi;
  t.elements = std::move(el);
  return t;
}

std::vector<int64_t> random_shape(std::mt19937_64& rng, int64_t nd, int64_t dmin, int64_t dmax) {
  std::vector<int64_t> s(static_cast<size_t>(nd));
  for (auto& d : s) d = randint(rng, dmin, dmax);
  return s;
}

int pick(std::mt19937_64& rng, std::initializer_list<int> xs) {
  auto v = std::vector<int>(xs);
  return v[static_cast<size_t>(randint(rng, 0, static_cast<int64_t>(v.size()) - 1))];
}

Param tensor_param(const std::string& n) { return Param{n, dsl::TypeExpr::prim(dsl::TypeKind::Tensor), true}; }
Param int_param(const std::string& n) { return Param{n, dsl::TypeExpr::prim(dsl::TypeKind::Int), true}; }
Param float_param(const std::string& n) { return Param{n, dsl::TypeExpr::prim(dsl::TypeKind::Float), true}; }

class Base : public ReferenceTarget {
 public:
  const std::string& name() const override { return name_; }
  const ApiSignature& signature() const override { return sig_; }
  const std::string& doc() const override { return doc_; }
  const std::vector<std::string>& error_vocabulary() const override { return vocab_; }
  const std::vector<GroundTruthRule>& ground_truth() const override { return gt_; }

 protected:
  std::string name_;
  ApiSignature sig_;
  std::string doc_;
  std::vector<std::string> vocab_;
  std::vector<GroundTruthRule> gt_;
};

class AddBroadcast : public Base {
 public:
  AddBroadcast() {
    name_ = "ref.add_broadcast";
    sig_ = ApiSignature{name_, {tensor_param("input"), tensor_param("other"), float_param("alpha")}};
    doc_ =
        "ref.add_broadcast(input, other, alpha) -> Tensor\n"
        "Adds other, scaled by alpha, to input. input and other must have the same dtype and their shapes "
        "must be broadcastable: aligned from the trailing dimension, each pair of sizes is equal or one of "
        "them is 1; missing leading dimensions count as 1. alpha is a float multiplier for other.";
    vocab_ = {"expected both tensors to have the same dtype", "sizes must be equal or 1 at each trailing dimension"};
    gt_ = {{kSameDtype, {"input", "other"}}, {kBroadcast, {"input", "other"}}};
  }

  TargetCall call(const ApiInput& in, const std::string& backend) const override {
    Args a{in, {}};
    const TensorV* x = a.tensor("input");
    const TensorV* y = a.tensor("other");
    auto alpha = a.real("alpha", 1.0);
    if (!a.error.empty()) return fail(a.error, {"add.b0"});
    if (x->dtype != y->dtype)
      return fail("expected both tensors to have the same dtype, but got " + dtype_name(x->dtype) + " and " +
                      dtype_name(y->dtype),
                  {"add.b1"});
    auto shape = broadcast_shape(x->shape, y->shape);
    if (!shape)
      return fail("sizes must be equal or 1 at each trailing dimension, got " + shape_text(x->shape) + " and " +
                      shape_text(y->shape),
                  {"add.b1", "add.b2"});
    TargetCall c;
    c.branches = {"add.b1", "add.b2"};
    c.branches.push_back(x->ndim == y->ndim ? "add.b3" : x->ndim > y->ndim ? "add.b4" : "add.b5");
    if (*alpha < 0) c.branches.push_back("add.b6");
    if (*alpha == 0) c.branches.push_back("add.b7");
    double al = *alpha;
    bool integral = is_integral(x->dtype);
    bool gpu = backend == "gpu";
    emit_broadcast(
        c, *x, *y, *shape, x->dtype,
        [al, integral](double p, double q) {
          double r = p + al * q;
          return integral ? std::trunc(r) : r;
        },
        [&](std::vector<double>& out) {
          if (out.empty()) c.branches.push_back("add.b8");
          if (!gpu) return;
          for (auto& v : out) v += 1e-6;
          if (al < 0 && !out.empty()) out[0] = std::numeric_limits<double>::quiet_NaN();
        });
    return c;
  }

  ApiInput sample_valid(std::mt19937_64& rng) const override {
    int64_t nd = randint(rng, 0, 4);
    auto out = random_shape(rng, nd, 1, 5);
    auto derive = [&]() {
      int64_t k = randint(rng, 0, nd);
      std::vector<int64_t> s(out.end() - k, out.end());
      for (auto& d : s)
        if (randint(rng, 0, 3) == 0) d = 1;
      return s;
    };
    auto sa = derive();
    auto sb = derive();
    if (randint(rng, 0, 1)) sa = out;
    int dt = pick(rng, {kF32, kF64, kI32, kI64});
    ApiInput in;
    in.api = name_;
    in.set("input", random_tensor(rng, sa, dt));
    in.set("other", random_tensor(rng, sb, dt));
    in.set("alpha", std::round(uniform(rng, -2, 2) * 8) / 8);
    return in;
  }
};

class Narrow : public Base {
 public:
  Narrow() {
    name_ = "ref.narrow";
    sig_ = ApiSignature{name_, {tensor_param("input"), int_param("dim"), int_param("start"), int_param("length")}};
    doc_ =
        "ref.narrow(input, dim, start, length) -> Tensor\n"
        "Returns the slice of input along dimension dim covering indices start to start + length - 1. "
        "dim must be a valid dimension of input (negative values count from the end), start must be "
        "non-negative, length must be non-negative and start + length must not exceed the size of input "
        "along dim.";
    vocab_ = {"Dimension out of range", "start must be non-negative", "length must be non-negative",
              "exceeds dimension size"};
    gt_ = {{kDimValid, {"input", "dim"}},
           {kNonNegative, {"start"}},
           {kNonNegative, {"length"}},
           {"{v_1: tensor, v_2: int, v_3: int, v_4: int} |= v_3 + v_4 <= shape(v_1, v_2)",
            {"input", "dim", "start", "length"}}};
  }

  TargetCall call(const ApiInput& in, const std::string&) const override {
    Args a{in, {}};
    const TensorV* x = a.tensor("input");
    auto dim = a.integer("dim");
    auto start = a.integer("start");
    auto length = a.integer("length");
    if (!a.error.empty()) return fail(a.error, {"narrow.b0"});
    int64_t n = x->ndim;
    if (*dim < -n || *dim > n - 1)
      return fail("Dimension out of range (expected to be in range of [" + std::to_string(-n) + ", " +
                      std::to_string(n - 1) + "], but got " + std::to_string(*dim) + ")",
                  {"narrow.b1"});
    int64_t d = *dim < 0 ? *dim + n : *dim;
    if (*start < 0) return fail("start must be non-negative, got " + std::to_string(*start), {"narrow.b1", "narrow.b2"});
    if (*length < 0)
      return fail("length must be non-negative, got " + std::to_string(*length), {"narrow.b1", "narrow.b2", "narrow.b3"});
    int64_t size = x->shape[static_cast<size_t>(d)];
    if (*start + *length > size)
      return fail("start (" + std::to_string(*start) + ") + length (" + std::to_string(*length) +
                      ") exceeds dimension size (" + std::to_string(size) + ")",
                  {"narrow.b1", "narrow.b2", "narrow.b3", "narrow.b4"});
    TargetCall c;
    c.branches = {"narrow.b1", "narrow.b2", "narrow.b3", "narrow.b4"};
    if (*dim < 0) c.branches.push_back("narrow.b5");
    if (*length == 0) c.branches.push_back("narrow.b6");
    if (*length == size) c.branches.push_back("narrow.b7");
    auto ex = tensor_elements(*x);
    std::vector<int64_t> shape = x->shape;
    shape[static_cast<size_t>(d)] = *length;
    int64_t outer = 1, inner = 1;
    for (int64_t i = 0; i < d; ++i) outer *= x->shape[static_cast<size_t>(i)];
    for (int64_t i = d + 1; i < n; ++i) inner *= x->shape[static_cast<size_t>(i)];
    std::vector<double> out;
    out.reserve(static_cast<size_t>(outer * *length * inner));
    for (int64_t o = 0; o < outer; ++o)
      for (int64_t k = *start; k < *start + *length; ++k)
        for (int64_t i = 0; i < inner; ++i) out.push_back(ex[static_cast<size_t>((o * size + k) * inner + i)]);
    c.outputs.push_back(make_tensor(shape, x->dtype, std::move(out)));
    return c;
  }

  ApiInput sample_valid(std::mt19937_64& rng) const override {
    int64_t nd = randint(rng, 1, 4);
    auto shape = random_shape(rng, nd, 1, 6);
    int64_t dim = randint(rng, -nd, nd - 1);
    int64_t size = shape[static_cast<size_t>(dim < 0 ? dim + nd : dim)];
    int64_t start = randint(rng, 0, size);
    int64_t length = randint(rng, 0, size - start);
    ApiInput in;
    in.api = name_;
    in.set("input", random_tensor(rng, shape, pick(rng, {kF32, kF64, kI32, kI64, kBool})));
    in.set("dim", dim);
    in.set("start", start);
    in.set("length", length);
    return in;
  }
};

class Argmax : public Base {
 public:
  Argmax() {
    name_ = "ref.argmax";
    sig_ = ApiSignature{name_, {tensor_param("input"), int_param("dim")}};
    doc_ =
        "ref.argmax(input, dim) -> Tensor\n"
        "Returns the indices of the maximum values of input along dimension dim, which is removed from the "
        "result. dim must be a valid dimension of input; the size of input along dim must be at least 1. "
        "Complex input is not supported.";
    vocab_ = {"Dimension out of range", "argmax is not supported for complex tensors",
              "cannot perform reduction over an empty dimension"};
    gt_ = {{kDimValid, {"input", "dim"}},
           {"{v_1: tensor, v_2: int} |= shape(v_1, v_2) >= 1", {"input", "dim"}},
           {"{v_1: tensor} |= dtype_(v_1) != 5", {"input"}}};
  }

  TargetCall call(const ApiInput& in, const std::string&) const override {
    Args a{in, {}};
    const TensorV* x = a.tensor("input");
    auto dim = a.integer("dim");
    if (!a.error.empty()) return fail(a.error, {"argmax.b0"});
    int64_t n = x->ndim;
    if (*dim < -n || *dim > n - 1)
      return fail("Dimension out of range (expected to be in range of [" + std::to_string(-n) + ", " +
                      std::to_string(n - 1) + "], but got " + std::to_string(*dim) + ")",
                  {"argmax.b1"});
    if (x->dtype == kC64) return fail("argmax is not supported for complex tensors", {"argmax.b1", "argmax.b2"});
    int64_t d = *dim < 0 ? *dim + n : *dim;
    int64_t size = x->shape[static_cast<size_t>(d)];
    if (size == 0)
      return fail("cannot perform reduction over an empty dimension (dim " + std::to_string(*dim) + ")",
                  {"argmax.b1", "argmax.b2", "argmax.b3"});
    TargetCall c;
    c.branches = {"argmax.b1", "argmax.b2", "argmax.b3"};
    if (size == 1) c.branches.push_back("argmax.b4");
    if (n == 1) c.branches.push_back("argmax.b5");
    auto ex = tensor_elements(*x);
    int64_t outer = 1, inner = 1;
    for (int64_t i = 0; i < d; ++i) outer *= x->shape[static_cast<size_t>(i)];
    for (int64_t i = d + 1; i < n; ++i) inner *= x->shape[static_cast<size_t>(i)];
    std::vector<double> out;
    out.reserve(static_cast<size_t>(outer * inner));
    for (int64_t o = 0; o < outer; ++o) {
      for (int64_t i = 0; i < inner; ++i) {
        int64_t best = 0;
        for (int64_t k = 1; k < size; ++k)
          if (ex[static_cast<size_t>((o * size + k) * inner + i)] > ex[static_cast<size_t>((o * size + best) * inner + i)])
            best = k;
        out.push_back(static_cast<double>(best));
      }
    }
    std::vector<int64_t> shape = x->shape;
    shape.erase(shape.begin() + d);
    c.outputs.push_back(make_tensor(shape, kI64, std::move(out)));
    return c;
  }

  ApiInput sample_valid(std::mt19937_64& rng) const override {
    int64_t nd = randint(rng, 1, 4);
    auto shape = random_shape(rng, nd, 1, 5);
    ApiInput in;
    in.api = name_;
    in.set("input", random_tensor(rng, shape, pick(rng, {kF32, kF64, kI32, kI64, kBool})));
    in.set("dim", randint(rng, -nd, nd - 1));
    return in;
  }
};

class ChannelShuffle : public Base {
 public:
  ChannelShuffle() {
    name_ = "ref.channel_shuffle";
    sig_ = ApiSignature{name_, {tensor_param("input"), int_param("groups")}};
    doc_ =
        "ref.channel_shuffle(input, groups) -> Tensor\n"
        "Divides the channels of input (dimension 1) into groups groups and interleaves them. input must "
        "have more than 2 dimensions, groups must be positive and the number of channels must be "
        "divisible by groups.";
    vocab_ = {"channel_shuffle expects input with > 2 dims", "number of groups to divide channels in must be positive",
              "number of channels must be divisible by groups"};
    gt_ = {{"{v_1: tensor} |= ndim(v_1) >= 3", {"input"}},
           {"{v_1: int} |= v_1 >= 1", {"groups"}},
           {"{v_1: tensor, v_2: int} |= exists k in [0, shape(v_1, 1)] : v_2 * k = shape(v_1, 1)", {"input", "groups"}}};
  }

  TargetCall call(const ApiInput& in, const std::string&) const override {
    Args a{in, {}};
    const TensorV* x = a.tensor("input");
    auto groups = a.integer("groups");
    if (!a.error.empty()) return fail(a.error, {"shuffle.b0"});
    if (x->ndim <= 2)
      return fail("channel_shuffle expects input with > 2 dims, but got input with sizes " + shape_text(x->shape),
                  {"shuffle.b1"});
    if (*groups <= 0)
      return fail("number of groups to divide channels in must be positive, but got " + std::to_string(*groups),
                  {"shuffle.b1", "shuffle.b2"});
    int64_t channels = x->shape[1];
    if (*groups > channels) throw SimulatedCrash{"floating point exception in channel_shuffle"};
    if (channels % *groups != 0)
      return fail("number of channels must be divisible by groups, got " + std::to_string(channels) + " channels and " +
                      std::to_string(*groups) + " groups",
                  {"shuffle.b1", "shuffle.b2", "shuffle.b3"});
    TargetCall c;
    c.branches = {"shuffle.b1", "shuffle.b2", "shuffle.b3", "shuffle.b4"};
    if (*groups == 1) c.branches.push_back("shuffle.b5");
    if (*groups == channels) c.branches.push_back("shuffle.b6");
    auto ex = tensor_elements(*x);
    int64_t batch = x->shape[0], inner = 1;
    for (int64_t i = 2; i < x->ndim; ++i) inner *= x->shape[static_cast<size_t>(i)];
    int64_t per = channels / *groups;
    std::vector<double> out(ex.size());
    for (int64_t b = 0; b < batch; ++b)
      for (int64_t ch = 0; ch < channels; ++ch) {
        int64_t src = (ch % *groups) * per + ch / *groups;
        for (int64_t i = 0; i < inner; ++i)
          out[static_cast<size_t>((b * channels + ch) * inner + i)] = ex[static_cast<size_t>((b * channels + src) * inner + i)];
      }
    c.outputs.push_back(make_tensor(x->shape, x->dtype, std::move(out)));
    return c;
  }

  ApiInput sample_valid(std::mt19937_64& rng) const override {
    int64_t nd = randint(rng, 3, 5);
    auto shape = random_shape(rng, nd, 1, 4);
    int64_t groups = randint(rng, 1, 4);
    shape[1] = groups * randint(rng, 1, 3);
    ApiInput in;
    in.api = name_;
    in.set("input", random_tensor(rng, shape, pick(rng, {kF32, kF64, kI32, kI64})));
    in.set("groups", groups);
    return in;
  }
};

class Matmul2d : public Base {
 public:
  Matmul2d() {
    name_ = "ref.matmul2d";
    sig_ = ApiSignature{name_, {tensor_param("input"), tensor_param("other")}};
    doc_ =
        "ref.matmul2d(input, other) -> Tensor\n"
        "Matrix product of input (n x k) and other (k x m). Both input and other must be 2-D tensors of "
        "the same dtype, and the number of columns of input must equal the number of rows of other.";
    vocab_ = {"matmul2d expects 2-D tensors", "expected both tensors to have the same dtype", "size mismatch"};
    gt_ = {{"{v_1: tensor} |= ndim(v_1) = 2", {"input"}},
           {"{v_1: tensor} |= ndim(v_1) = 2", {"other"}},
           {kSameDtype, {"input", "other"}},
           {"{v_1: tensor, v_2: tensor} |= shape(v_1, 1) = shape(v_2, 0)", {"input", "other"}}};
  }

  TargetCall call(const ApiInput& in, const std::string& backend) const override {
    Args a{in, {}};
    const TensorV* x = a.tensor("input");
    const TensorV* y = a.tensor("other");
    if (!a.error.empty()) return fail(a.error, {"matmul.b0"});
    if (x->ndim != 2 || y->ndim != 2)
      return fail("matmul2d expects 2-D tensors, but got " + std::to_string(x->ndim) + "-D and " +
                      std::to_string(y->ndim) + "-D",
                  {"matmul.b1"});
    if (x->dtype != y->dtype)
      return fail("expected both tensors to have the same dtype, but got " + dtype_name(x->dtype) + " and " +
                      dtype_name(y->dtype),
                  {"matmul.b1", "matmul.b2"});
    int64_t n = x->shape[0], k = x->shape[1], m = y->shape[1];
    if (k != y->shape[0])
      return fail("size mismatch, got input (" + std::to_string(n) + "x" + std::to_string(k) + ") and other (" +
                      std::to_string(y->shape[0]) + "x" + std::to_string(m) + ")",
                  {"matmul.b1", "matmul.b2", "matmul.b3"});
    TargetCall c;
    c.branches = {"matmul.b1", "matmul.b2", "matmul.b3", "matmul.b4"};
    if (k == 0) c.branches.push_back("matmul.b5");
    if (k >= 8) c.branches.push_back("matmul.b6");
    auto ex = tensor_elements(*x), ey = tensor_elements(*y);
    std::vector<double> out(static_cast<size_t>(n * m), 0.0);
    for (int64_t i = 0; i < n; ++i)
      for (int64_t p = 0; p < k; ++p) {
        double xv = ex[static_cast<size_t>(i * k + p)];
        for (int64_t j = 0; j < m; ++j) out[static_cast<size_t>(i * m + j)] += xv * ey[static_cast<size_t>(p * m + j)];
      }
    if (backend == "gpu" && k >= 8)
      for (auto& v : out) v += 0.5;
    c.outputs.push_back(make_tensor({n, m}, x->dtype, std::move(out)));
    return c;
  }

  ApiInput sample_valid(std::mt19937_64& rng) const override {
    int64_t n = randint(rng, 1, 10), k = randint(rng, 1, 10), m = randint(rng, 1, 10);
    int dt = pick(rng, {kF32, kF64, kI32, kI64});
    ApiInput in;
    in.api = name_;
    in.set("input", random_tensor(rng, {n, k}, dt, -5, 5));
    in.set("other", random_tensor(rng, {k, m}, dt, -5, 5));
    return in;
  }
};

class Lcm : public Base {
 public:
  Lcm() {
    name_ = "ref.lcm";
    sig_ = ApiSignature{name_, {tensor_param("input"), tensor_param("other")}};
    doc_ =
        "ref.lcm(input, other) -> Tensor\n"
        "Elementwise least common multiple of input and other. input and other must be integer tensors "
        "(int32 or int64) of the same dtype with broadcastable shapes.";
    vocab_ = {"expected both tensors to have the same dtype", "lcm is only supported for integer tensors",
              "sizes must be equal or 1 at each trailing dimension"};
    gt_ = {{kSameDtype, {"input", "other"}},
           {"{v_1: tensor} |= dtype_(v_1) = 2 or dtype_(v_1) = 3", {"input"}},
           {kBroadcast, {"input", "other"}}};
  }

  TargetCall call(const ApiInput& in, const std::string& backend) const override {
    Args a{in, {}};
    const TensorV* x = a.tensor("input");
    const TensorV* y = a.tensor("other");
    if (!a.error.empty()) return fail(a.error, {"lcm.b0"});
    if (x->dtype != y->dtype)
      return fail("expected both tensors to have the same dtype, but got " + dtype_name(x->dtype) + " and " +
                      dtype_name(y->dtype),
                  {"lcm.b1"});
    if (x->dtype != kI32 && x->dtype != kI64)
      return fail("lcm is only supported for integer tensors, got " + dtype_name(x->dtype), {"lcm.b1", "lcm.b2"});
    auto shape = broadcast_shape(x->shape, y->shape);
    if (!shape)
      return fail("sizes must be equal or 1 at each trailing dimension, got " + shape_text(x->shape) + " and " +
                      shape_text(y->shape),
                  {"lcm.b1", "lcm.b2", "lcm.b3"});
    TargetCall c;
    c.branches = {"lcm.b1", "lcm.b2", "lcm.b3", "lcm.b4"};
    bool narrow = x->dtype == kI32;
    bool overflow = false;
    emit_broadcast(c, *x, *y, *shape, x->dtype, [&](double p, double q) {
      auto u = static_cast<int64_t>(std::llabs(static_cast<long long>(p)));
      auto v = static_cast<int64_t>(std::llabs(static_cast<long long>(q)));
      if (u == 0 || v == 0) return 0.0;
      __int128 l = static_cast<__int128>(u / std::gcd(u, v)) * v;
      if (narrow && l > INT32_MAX) {
        overflow = true;
        return static_cast<double>(static_cast<int32_t>(static_cast<uint32_t>(static_cast<uint64_t>(l))));
      }
      return static_cast<double>(l);
    }, [](std::vector<double>&) {});
    if (overflow) {
      c.branches.push_back("lcm.b5");
      if (backend == "gpu") c.warnings.push_back("overflow");
    }
    return c;
  }

  ApiInput sample_valid(std::mt19937_64& rng) const override {
    int64_t nd = randint(rng, 0, 4);
    auto out = random_shape(rng, nd, 1, 5);
    auto derive = [&]() {
      int64_t k = randint(rng, 0, nd);
      std::vector<int64_t> s(out.end() - k, out.end());
      for (auto& d : s)
        if (randint(rng, 0, 3) == 0) d = 1;
      return s;
    };
    int dt = pick(rng, {kI32, kI64});
    ApiInput in;
    in.api = name_;
    auto sa = derive();
    if (randint(rng, 0, 1)) sa = out;
    in.set("input", random_tensor(rng, sa, dt, -20, 20));
    in.set("other", random_tensor(rng, derive(), dt, -20, 20));
    return in;
  }
};

}  // namespace

std::vector<int64_t> probe_indices(int64_t numel) {
  std::vector<int64_t> out;
  if (numel <= 0) return out;
  int64_t k = std::min<int64_t>(numel, kProbeCount);
  for (int64_t i = 0; i < k; ++i) out.push_back(k == 1 ? 0 : i * (numel - 1) / (k - 1));
  return out;
}

std::vector<double> tensor_elements(const TensorV& t) {
  if (t.elements) return *t.elements;
  return std::vector<double>(static_cast<size_t>(std::max<int64_t>(t.numel(), 0)), t.lo);
}

const std::vector<const ReferenceTarget*>& reference_targets() {
  static const std::vector<const ReferenceTarget*> all = [] {
    std::vector<const ReferenceTarget*> v = {new AddBroadcast, new Argmax,   new ChannelShuffle,
                                             new Lcm,          new Matmul2d, new Narrow};
    std::sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->name() < b->name(); });
    return v;
  }();
  return all;
}

const ReferenceTarget* find_target(const std::string& api) {
  for (const auto* t : reference_targets())
    if (t->name() == api) return t;
  return nullptr;
}

std::vector<ApiInfo> reference_catalog() {
  std::vector<ApiInfo> out;
  for (const auto* t : reference_targets()) out.push_back(ApiInfo{t->name(), t->signature(), t->doc(), t->backends()});
  return out;
}

const std::vector<GroundTruthRule>& ground_truth(const std::string& api) {
  const ReferenceTarget* t = find_target(api);
  if (!t) throw UnknownApi(api);
  return t->ground_truth();
}

std::vector<ApiInput> seed_inputs(const std::string& api, size_t count, uint64_t seed) {
  const ReferenceTarget* t = find_target(api);
  if (!t) throw UnknownApi(api);
  std::mt19937_64 rng(seed);
  std::vector<ApiInput> out;
  out.reserve(count);
  while (out.size() < count) {
    ApiInput in = t->sample_valid(rng);
    try {
      if (t->call(in, "cpu").status == ExecStatus::Ok) out.push_back(std::move(in));
    } catch (const SimulatedCrash&) {
    }
  }
  return out;
}

}  // namespace tcfuzz::exec
