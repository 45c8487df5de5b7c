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

#include "tcfuzz/dsl/ruleset.hpp"

#include <fstream>
#include <sstream>

#include "tcfuzz/dsl/parser.hpp"

namespace tcfuzz::dsl {

std::string RulesetIssue::to_string() const {
  return file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message;
}

namespace {

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::pair<size_t, size_t> line_col(std::string_view text, size_t offset) {
  size_t line = 1, col = 1;
  for (size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

RulesetLoad parse_ruleset(std::string_view text, const std::string& file) {
  RulesetLoad out;
  std::string name, desc;
  size_t lineno = 0;
  size_t pos = 0;
  auto reset = [&] {
    name.clear();
    desc.clear();
  };
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    std::string line = trim(raw);
    if (line.empty()) {
      reset();
      if (nl == text.size()) break;
      continue;
    }
    if (line[0] == '#') {
      std::string body = trim(std::string_view(line).substr(1));
      if (body.rfind("name:", 0) == 0) name = trim(std::string_view(body).substr(5));
      else if (body.rfind("desc:", 0) == 0) desc = trim(std::string_view(body).substr(5));
      if (nl == text.size()) break;
      continue;
    }
    try {
      Rule r = parse_rule(line);
      r.name = name.empty() ? "rule@" + std::to_string(lineno) : name;
      r.description = desc;
      out.rules.push_back({type_check(r), lineno});
    } catch (const ParseError& e) {
      out.issues.push_back({file, lineno, e.column(), e.what()});
    } catch (const BindingError& e) {
      out.issues.push_back({file, lineno, line_col(line, e.span().begin).second, e.what()});
    } catch (const TypeErrorReport& e) {
      size_t col = e.errors().empty() ? 1 : line_col(line, e.errors().front().span.begin).second;
      out.issues.push_back({file, lineno, col, e.what()});
    }
    reset();
    if (nl == text.size()) break;
  }
  return out;
}

RulesetLoad load_ruleset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read ruleset file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ruleset(ss.str(), path);
}

std::string format_ruleset(const std::vector<Rule>& rules) {
  std::string out;
  for (size_t i = 0; i < rules.size(); ++i) {
    if (i) out += "\n";
    out += "# name: " + rules[i].name + "\n";
    if (!rules[i].description.empty()) out += "# desc: " + rules[i].description + "\n";
    out += render_rule(rules[i]) + "\n";
  }
  return out;
}

}  // namespace tcfuzz::dsl
