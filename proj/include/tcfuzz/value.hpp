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

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tcfuzz/dsl/ast.hpp"
#include "tcfuzz/number.hpp"

namespace tcfuzz {

using json = nlohmann::json;

enum class DtypeKind { Float, Int, Bool, Complex };

struct DtypeInfo {
  int code;
  std::string name;
  int byte_width;
  DtypeKind kind;
};

class DtypeTable {
 public:
  explicit DtypeTable(std::vector<DtypeInfo> entries);
  // float32, float64, int32, int64, bool, complex64 with codes 0..5.
  static const DtypeTable& standard();

  const DtypeInfo* by_code(int code) const;
  const DtypeInfo* by_name(const std::string& name) const;
  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<DtypeInfo>& entries() const { return entries_; }

 private:
  std::vector<DtypeInfo> entries_;
};

struct ConcreteValue;

struct NoneV {
  friend bool operator==(const NoneV&, const NoneV&) = default;
};

struct DtypeV {
  int code = 0;
  friend bool operator==(const DtypeV&, const DtypeV&) = default;
};

struct TensorV {
  int64_t ndim = 0;
  std::vector<int64_t> shape;
  int dtype = 0;
  double lo = 0;
  double hi = 0;
  std::optional<std::vector<double>> elements;

  int64_t numel() const;
};

struct ListV {
  std::vector<ConcreteValue> items;
};

struct TupleV {
  std::vector<ConcreteValue> items;
};

struct ConcreteValue {
  std::variant<NoneV, int64_t, double, bool, std::string, DtypeV, TensorV, ListV, TupleV> v;

  ConcreteValue() : v(NoneV{}) {}
  template <typename T>
    requires(!std::is_same_v<std::decay_t<T>, ConcreteValue>)
  ConcreteValue(T x) : v(std::move(x)) {}  // NOLINT

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&v);
  }
  bool is_none() const { return std::holds_alternative<NoneV>(v); }
  const char* kind_name() const;
};

// NaN equals NaN here so that document round trips compare equal.
bool operator==(const ConcreteValue& a, const ConcreteValue& b);
bool operator==(const TensorV& a, const TensorV& b);

struct Param {
  std::string name;
  dsl::TypePtr type;
  bool required = true;
};

struct ApiSignature {
  std::string api;
  std::vector<Param> params;

  const Param* find(const std::string& name) const;
};

struct ApiInput {
  std::string api;
  std::vector<std::pair<std::string, ConcreteValue>> args;

  const ConcreteValue* get(const std::string& name) const;
  void set(const std::string& name, ConcreteValue v);
};

bool operator==(const ApiInput& a, const ApiInput& b);

class ValueError : public std::runtime_error {
 public:
  enum class Kind { IndexOutOfRange, WrongKind, UnknownDtype };
  ValueError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::string path, const std::string& msg)
      : std::runtime_error(path + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

Number tensor_prop(const ConcreteValue& v, dsl::TensorFn fn, std::optional<int64_t> index = std::nullopt);
int64_t byte_size(const TensorV& t, const DtypeTable& table = DtypeTable::standard());

// Checks the TensorV invariants; returns an error message or empty.
std::string validate_tensor(const TensorV& t, const DtypeTable& table = DtypeTable::standard());

bool conforms(const ConcreteValue& v, const dsl::TypePtr& t);

json encode_value(const ConcreteValue& v);
ConcreteValue decode_value(const json& doc, const std::string& path = "$");

json encode_input(const ApiInput& in);
ApiInput decode_input(const json& doc);
// Canonical text form; equal inputs give identical bytes.
std::string input_bytes(const ApiInput& in);

}  // namespace tcfuzz
