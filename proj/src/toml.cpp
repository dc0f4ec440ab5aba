#include "ecosim/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ecosim::toml {

namespace {

using nlohmann::json;

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  int line = 1;

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error("toml parse error (line " + std::to_string(line) + "): " + msg);
  }

  bool eof() const { return pos >= text.size(); }
  char peek() const { return eof() ? '\0' : text[pos]; }

  char get() {
    char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }

  // Skips spaces/tabs and comments; newlines too when `newlines` is set.
  void skip_ws(bool newlines) {
    while (!eof()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        get();
      } else if (c == '#') {
        while (!eof() && peek() != '\n') get();
      } else if (newlines && c == '\n') {
        get();
      } else {
        break;
      }
    }
  }

  bool is_bare_key_char(char c) const {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string parse_key_part() {
    if (peek() == '"') return parse_basic_string();
    std::string out;
    while (!eof() && is_bare_key_char(peek())) out.push_back(get());
    if (out.empty()) fail("expected key");
    return out;
  }

  std::vector<std::string> parse_dotted_key() {
    std::vector<std::string> parts;
    parts.push_back(parse_key_part());
    skip_ws(false);
    while (peek() == '.') {
      get();
      skip_ws(false);
      parts.push_back(parse_key_part());
      skip_ws(false);
    }
    return parts;
  }

  std::string parse_basic_string() {
    if (get() != '"') fail("expected '\"'");
    std::string out;
    while (true) {
      if (eof()) fail("unterminated string");
      char c = get();
      if (c == '"') break;
      if (c == '\n') fail("newline in string");
      if (c == '\\') {
        if (eof()) fail("dangling escape");
        char e = get();
        switch (e) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  json parse_value() {
    skip_ws(false);
    char c = peek();
    if (c == '"') return parse_basic_string();
    if (c == '[') return parse_array();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string word;
      while (!eof() && std::isalpha(static_cast<unsigned char>(peek()))) word.push_back(get());
      if (word == "true") return true;
      if (word == "false") return false;
      fail("unexpected token '" + word + "'");
    }
    return parse_number();
  }

  json parse_array() {
    if (get() != '[') fail("expected '['");
    json arr = json::array();
    skip_ws(true);
    if (peek() == ']') {
      get();
      return arr;
    }
    while (true) {
      arr.push_back(parse_value());
      skip_ws(true);
      char c = peek();
      if (c == ',') {
        get();
        skip_ws(true);
        if (peek() == ']') {  // tolerate trailing comma
          get();
          break;
        }
      } else if (c == ']') {
        get();
        break;
      } else {
        fail("expected ',' or ']' in array");
      }
    }
    return arr;
  }

  json parse_number() {
    std::string tok;
    while (!eof()) {
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
          c == '.' || c == 'e' || c == 'E' || c == '_') {
        if (c != '_') tok.push_back(c);
        get();
      } else {
        break;
      }
    }
    if (tok.empty()) fail("expected value");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    try {
      if (is_float) return std::stod(tok);
      return static_cast<std::int64_t>(std::stoll(tok));
    } catch (const std::exception&) {
      fail("bad number '" + tok + "'");
    }
  }

  void expect_line_end() {
    skip_ws(false);
    if (!eof() && peek() != '\n') fail("trailing characters after value");
  }

  json* descend(json& root, const std::vector<std::string>& parts, std::size_t upto) {
    json* node = &root;
    for (std::size_t i = 0; i < upto; ++i) {
      json& child = (*node)[parts[i]];
      if (child.is_null()) child = json::object();
      if (!child.is_object()) fail("key '" + parts[i] + "' redefined with a different type");
      node = &child;
    }
    return node;
  }

  json parse_document() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_ws(true);
      if (eof()) break;
      if (peek() == '[') {
        get();
        skip_ws(false);
        auto parts = parse_dotted_key();
        skip_ws(false);
        if (peek() != ']') fail("expected ']' after table name");
        get();
        expect_line_end();
        table = descend(root, parts, parts.size());
      } else {
        auto parts = parse_dotted_key();
        skip_ws(false);
        if (peek() != '=') fail("expected '=' after key");
        get();
        json value = parse_value();
        expect_line_end();
        json* node = descend(*table, parts, parts.size() - 1);
        const std::string& leaf = parts.back();
        if (node->contains(leaf)) fail("duplicate key '" + leaf + "'");
        (*node)[leaf] = std::move(value);
      }
    }
    return root;
  }
};

}  // namespace

nlohmann::json parse(std::string_view text) {
  Parser p{text};
  return p.parse_document();
}

nlohmann::json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    return nlohmann::json::parse(content);
  }
  return parse(content);
}

}  // namespace ecosim::toml
