#include "bootrl/keyed_config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "bootrl/error.hpp"

namespace bootrl {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::invariant: return "invariant";
    case ErrorKind::out_of_range: return "out_of_range";
    case ErrorKind::io: return "io";
    case ErrorKind::missing_input: return "missing_input";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::transport: return "transport";
    case ErrorKind::http_status: return "http_status";
    case ErrorKind::empty_completion: return "empty_completion";
    case ErrorKind::unsupported: return "unsupported";
  }
  return "unknown";
}

namespace {

using nlohmann::json;

class Parser {
 public:
  Parser(std::string_view text, std::string source)
      : text_(text), source_(std::move(source)) {}

  json run() {
    json root = json::object();
    root["__line"] = 1;
    json* current = &root;
    while (true) {
      skip_blank_and_comments();
      if (eof()) break;
      if (peek() == '[') {
        current = &table_header(root);
      } else {
        key_value(*current);
      }
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::parse,
                source_ + ":" + std::to_string(line_) + ": " + what);
  }

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }
  char get() {
    char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  void skip_inline_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) get();
  }

  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') get();
  }

  void skip_blank_and_comments() {
    while (!eof()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        get();
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  void expect_line_end() {
    skip_inline_space();
    skip_comment();
    if (!eof() && peek() != '\n') fail("unexpected trailing characters");
  }

  std::string bare_or_quoted_key() {
    skip_inline_space();
    if (peek() == '"' || peek() == '\'') return string_value();
    std::string key;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                      peek() == '_' || peek() == '-'))
      key += get();
    if (key.empty()) fail("expected a key");
    return key;
  }

  std::vector<std::string> dotted_key() {
    std::vector<std::string> parts{bare_or_quoted_key()};
    skip_inline_space();
    while (peek() == '.') {
      get();
      parts.push_back(bare_or_quoted_key());
      skip_inline_space();
    }
    return parts;
  }

  json& table_header(json& root) {
    const int header_line = line_;
    get();  // '['
    bool array = false;
    if (peek() == '[') {
      get();
      array = true;
    }
    auto parts = dotted_key();
    if (get() != ']') fail("expected ']' closing table header");
    if (array && get() != ']') fail("expected ']]' closing array-of-tables header");
    expect_line_end();

    json* node = &root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      json& child = (*node)[parts[i]];
      if (child.is_null()) {
        child = json::object();
        child["__line"] = header_line;
      }
      if (child.is_array()) {
        if (child.empty()) fail("empty array-of-tables in dotted header");
        node = &child.back();
      } else if (child.is_object()) {
        node = &child;
      } else {
        fail("key '" + parts[i] + "' is not a table");
      }
    }
    json& leaf = (*node)[parts.back()];
    json fresh = json::object();
    fresh["__line"] = header_line;
    if (array) {
      if (leaf.is_null()) leaf = json::array();
      if (!leaf.is_array()) fail("'" + parts.back() + "' is not an array of tables");
      leaf.push_back(std::move(fresh));
      return leaf.back();
    }
    if (!leaf.is_null()) fail("table '" + parts.back() + "' defined twice");
    leaf = std::move(fresh);
    return leaf;
  }

  void key_value(json& table) {
    auto parts = dotted_key();
    skip_inline_space();
    if (get() != '=') fail("expected '=' after key");
    skip_inline_space();
    json value = parse_value();
    expect_line_end();
    json* node = &table;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      json& child = (*node)[parts[i]];
      if (child.is_null()) child = json::object();
      if (!child.is_object()) fail("key '" + parts[i] + "' is not a table");
      node = &child;
    }
    if (node->contains(parts.back())) fail("duplicate key '" + parts.back() + "'");
    (*node)[parts.back()] = std::move(value);
  }

  json parse_value() {
    char c = peek();
    if (c == '"' || c == '\'') return string_value();
    if (c == '[') return array_value();
    if (c == '{') fail("inline tables are not supported");
    std::string token;
    while (!eof() && peek() != ',' && peek() != ']' && peek() != '#' &&
           peek() != '\n' && peek() != ' ' && peek() != '\t' && peek() != '\r')
      token += get();
    if (token.empty()) fail("expected a value");
    if (token == "true") return true;
    if (token == "false") return false;
    std::string digits;
    for (char ch : token)
      if (ch != '_') digits += ch;
    const bool is_float = digits.find_first_of(".eE") != std::string::npos ||
                          digits == "inf" || digits == "+inf" || digits == "-inf";
    try {
      std::size_t used = 0;
      if (is_float) {
        double d = std::stod(digits, &used);
        if (used == digits.size()) return d;
      } else {
        long long v = std::stoll(digits, &used, 10);
        if (used == digits.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("invalid value '" + token + "'");
  }

  std::string string_value() {
    const char quote = get();
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = get();
      if (c == quote) break;
      if (c == '\\' && quote == '"') {
        if (eof()) fail("unterminated escape");
        char e = get();
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  json array_value() {
    get();  // '['
    json arr = json::array();
    while (true) {
      skip_blank_and_comments();
      if (peek() == ']') {
        get();
        return arr;
      }
      arr.push_back(parse_value());
      skip_blank_and_comments();
      if (peek() == ',') {
        get();
      } else if (peek() == ']') {
        get();
        return arr;
      } else {
        fail("expected ',' or ']' in array");
      }
    }
  }

  std::string_view text_;
  std::string source_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace

nlohmann::json parse_keyed_config(std::string_view text, const std::string& source_name) {
  return Parser(text, source_name).run();
}

nlohmann::json load_keyed_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_keyed_config(ss.str(), path.string());
}

std::string config_location(const nlohmann::json& table, const std::string& source) {
  if (table.is_object() && table.contains("__line"))
    return source + ":" + std::to_string(table["__line"].get<int>());
  return source;
}

}  // namespace bootrl
