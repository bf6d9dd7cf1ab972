#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "pmsn/config.hpp"
#include "pmsn/error.hpp"

namespace pmsn {

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  TomlDoc run() {
    TomlDoc doc;
    std::string table;
    std::map<std::string, int> tables;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        if (!eof() && peek() == '[') fail("arrays of tables are not supported");
        skip_ws();
        table = join(parse_key_path());
        skip_ws();
        expect(']');
        if (tables.count(table)) fail("table [" + table + "] defined twice");
        for (const auto& kv : doc)
          if (kv.first == table) fail("table [" + table + "] redefines a key");
        tables[table] = line_;
        end_of_line();
        continue;
      }
      auto path = parse_key_path();
      skip_ws();
      expect('=');
      skip_ws();
      TomlValue v = parse_value();
      v.line = line_;
      const std::string key = table.empty() ? join(path) : table + "." + join(path);
      if (doc.count(key)) fail("duplicate key '" + key + "'", key);
      for (const auto& kv : doc)
        if (kv.first.rfind(key + ".", 0) == 0 || key.rfind(kv.first + ".", 0) == 0)
          fail("key '" + key + "' conflicts with '" + kv.first + "'", key);
      doc.emplace(key, std::move(v));
      end_of_line();
    }
    return doc;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
  int line_ = 1;

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  [[noreturn]] void fail(const std::string& what, const std::string& key = {}) const {
    throw ConfigError(what, key, line_);
  }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (!eof() && peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }

  void newline() {
    if (!eof() && peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail("expected end of line");
    ++pos_;
    ++line_;
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (eof()) return;
      if (peek() == '\n' || peek() == '\r') {
        newline();
        continue;
      }
      return;
    }
  }

  void end_of_line() {
    skip_ws();
    skip_comment();
    newline();
  }

  static std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "." : "") + parts[i];
    return out;
  }

  std::vector<std::string> parse_key_path() {
    std::vector<std::string> parts;
    while (true) {
      skip_ws();
      if (eof()) fail("expected a key");
      if (peek() == '"') {
        parts.push_back(parse_basic_string());
      } else if (peek() == '\'') {
        parts.push_back(parse_literal_string());
      } else {
        const std::size_t start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                          peek() == '-'))
          ++pos_;
        if (pos_ == start) fail("expected a key");
        parts.emplace_back(s_.substr(start, pos_ - start));
      }
      skip_ws();
      if (!eof() && peek() == '.') {
        ++pos_;
        continue;
      }
      return parts;
    }
  }

  std::string parse_basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated escape");
      c = s_[pos_++];
      switch (c) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(std::string("unsupported escape '\\") + c + "'");
      }
    }
  }

  std::string parse_literal_string() {
    expect('\'');
    const std::size_t start = pos_;
    while (!eof() && peek() != '\'' && peek() != '\n') ++pos_;
    if (eof() || peek() != '\'') fail("unterminated string");
    return s_.substr(start, pos_++ - start);
  }

  TomlValue parse_value() {
    if (eof()) fail("expected a value");
    const char c = peek();
    if (c == '"') return {parse_basic_string()};
    if (c == '\'') return {parse_literal_string()};
    if (c == '[') return parse_array();
    const std::size_t start = pos_;
    while (!eof() && peek() != ',' && peek() != ']' && peek() != '#' && peek() != '\n' &&
           peek() != '\r' && peek() != ' ' && peek() != '\t')
      ++pos_;
    const std::string tok = s_.substr(start, pos_ - start);
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return {true};
    if (tok == "false") return {false};
    return parse_number(tok);
  }

  TomlValue parse_array() {
    expect('[');
    TomlValue::Array items;
    while (true) {
      skip_array_space();
      if (eof()) fail("unterminated array");
      if (peek() == ']') {
        ++pos_;
        break;
      }
      TomlValue v = parse_value();
      if (v.is_array()) fail("nested arrays are not supported");
      v.line = line_;
      items.push_back(std::move(v));
      skip_array_space();
      if (eof()) fail("unterminated array");
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect(']');
      break;
    }
    return {items};
  }

  void skip_array_space() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (!eof() && (peek() == '\n' || peek() == '\r'))
        newline();
      else
        return;
    }
  }

  TomlValue parse_number(const std::string& raw) {
    std::string tok;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '_') {
        tok += raw[i];
        continue;
      }
      const bool ok = i > 0 && i + 1 < raw.size() && std::isalnum(static_cast<unsigned char>(raw[i - 1])) &&
                      std::isalnum(static_cast<unsigned char>(raw[i + 1]));
      if (!ok) fail("misplaced underscore in '" + raw + "'");
    }
    std::string body = tok;
    bool neg = false;
    if (!body.empty() && (body[0] == '+' || body[0] == '-')) {
      neg = body[0] == '-';
      body.erase(0, 1);
    }
    if (body == "inf") return {neg ? -std::numeric_limits<double>::infinity()
                                   : std::numeric_limits<double>::infinity()};
    if (body == "nan") return {std::numeric_limits<double>::quiet_NaN()};
    if (body.rfind("0x", 0) == 0) {
      std::int64_t v = 0;
      const auto* b = body.data() + 2;
      const auto* e = body.data() + body.size();
      const auto r = std::from_chars(b, e, v, 16);
      if (b == e || r.ec != std::errc() || r.ptr != e) fail("invalid integer '" + raw + "'");
      return {neg ? -v : v};
    }
    const bool is_float = body.find_first_of(".eE") != std::string::npos;
    const auto* b = tok.data() + (tok[0] == '+' ? 1 : 0);
    const auto* e = tok.data() + tok.size();
    if (!is_float) {
      if (body.size() > 1 && body[0] == '0') fail("leading zeros in '" + raw + "'");
      std::int64_t v = 0;
      const auto r = std::from_chars(b, e, v);
      if (r.ec != std::errc() || r.ptr != e) fail("invalid value '" + raw + "'");
      return {v};
    }
    double v = 0;
    const auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e) fail("invalid value '" + raw + "'");
    return {v};
  }
};

}  // namespace

TomlDoc parse_toml(const std::string& text) { return Parser(text).run(); }

}  // namespace pmsn
