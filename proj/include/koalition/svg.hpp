#pragma once

#include <cmath>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>

namespace koalition::svg {

/// Fixed two-decimal coordinates; "-0.00" is folded to "0.00" so output
/// does not depend on the sign of a rounding residue.
inline std::string num(double v) {
  if (!std::isfinite(v)) v = 0.0;
  std::string s = fmt::format("{:.2f}", v);
  if (s == "-0.00") s = "0.00";
  return s;
}

inline std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

using Attr = std::pair<std::string_view, std::string>;

/// Builds path data from absolute coordinates.
class PathData {
 public:
  PathData& move(double x, double y) { return cmd('M', x, y); }
  PathData& line(double x, double y) { return cmd('L', x, y); }
  PathData& close() {
    d_ += d_.empty() ? "Z" : " Z";
    return *this;
  }
  bool empty() const { return d_.empty(); }
  const std::string& str() const { return d_; }

 private:
  PathData& cmd(char c, double x, double y) {
    if (!d_.empty()) d_ += ' ';
    d_ += c;
    d_ += num(x);
    d_ += ',';
    d_ += num(y);
    return *this;
  }
  std::string d_;
};

/// Append-only SVG 1.1 document. Elements are written in call order, so the
/// same sequence of calls always yields the same bytes.
class Writer {
 public:
  Writer(double width, double height) {
    out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out_ += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" "
        "viewBox=\"0 0 {} {}\">\n",
        num(width), num(height), num(width), num(height));
  }

  void comment(std::string_view text) {
    indent();
    out_ += "<!-- ";
    out_ += text;
    out_ += " -->\n";
  }

  void open(std::string_view tag, std::initializer_list<Attr> attrs = {}) {
    indent();
    out_ += '<';
    out_ += tag;
    append_attrs(attrs);
    out_ += ">\n";
    stack_.emplace_back(tag);
  }

  void close() {
    std::string tag = std::move(stack_.back());
    stack_.pop_back();
    indent();
    out_ += "</" + tag + ">\n";
  }

  void element(std::string_view tag, std::initializer_list<Attr> attrs) {
    indent();
    out_ += '<';
    out_ += tag;
    append_attrs(attrs);
    out_ += "/>\n";
  }

  void text(double x, double y, std::string_view content, std::initializer_list<Attr> attrs = {}) {
    indent();
    out_ += fmt::format("<text x=\"{}\" y=\"{}\"", num(x), num(y));
    append_attrs(attrs);
    out_ += '>';
    out_ += escape(content);
    out_ += "</text>\n";
  }

  std::string finish() {
    while (!stack_.empty()) close();
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  void indent() { out_.append(2 * (stack_.size() + 1), ' '); }

  void append_attrs(std::initializer_list<Attr> attrs) {
    for (const auto& [key, value] : attrs) {
      out_ += ' ';
      out_ += key;
      out_ += "=\"";
      out_ += escape(value);
      out_ += '"';
    }
  }

  std::string out_;
  std::vector<std::string> stack_;
};

}  // namespace koalition::svg
