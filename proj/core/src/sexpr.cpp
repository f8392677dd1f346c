#include "mutgen/sexpr.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <utility>

namespace mutgen {

namespace {

char fold(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

}  // namespace

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (fold(a[i]) != fold(b[i])) return false;
  }
  return true;
}

std::string Symbol::key() const {
  std::string out = text_;
  std::transform(out.begin(), out.end(), out.begin(), fold);
  return out;
}

struct SExpr::Node {
  Kind kind = Kind::List;
  std::string text;
  BigInt value;
  std::vector<SExpr> items;
  SExpr tail;
  SourcePos pos;
};

SExpr SExpr::symbol(std::string_view text) {
  if (iequals(text, "nil")) return SExpr();
  auto node = std::make_shared<Node>();
  node->kind = Kind::Symbol;
  node->text = std::string(text);
  return SExpr(std::move(node));
}

SExpr SExpr::integer(BigInt value) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Integer;
  node->value = std::move(value);
  return SExpr(std::move(node));
}

SExpr SExpr::string(std::string text) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::String;
  node->text = std::move(text);
  return SExpr(std::move(node));
}

SExpr SExpr::list(std::vector<SExpr> items, SExpr tail) {
  if (tail.is_cons()) {
    auto rest = tail.items();
    items.insert(items.end(), rest.begin(), rest.end());
    tail = tail.tail();
  }
  if (items.empty()) return tail;
  auto node = std::make_shared<Node>();
  node->kind = Kind::List;
  node->items = std::move(items);
  node->tail = std::move(tail);
  return SExpr(std::move(node));
}

SExpr SExpr::cons(SExpr head, SExpr tail) {
  return list(std::vector<SExpr>{std::move(head)}, std::move(tail));
}

SExpr SExpr::quote(SExpr x) { return list({symbol("quote"), std::move(x)}); }

SExpr::Kind SExpr::kind() const { return node_ ? node_->kind : Kind::List; }

bool SExpr::is_symbol(std::string_view name) const {
  if (is_nil()) return iequals(name, "nil");
  return is_symbol() && iequals(node_->text, name);
}

bool SExpr::is_keyword() const {
  return is_symbol() && !node_->text.empty() && node_->text.front() == ':';
}

bool SExpr::is_proper() const { return is_list() && tail().is_nil(); }

bool SExpr::has_head(std::string_view name) const {
  return is_cons() && is_proper() && node_->items.front().is_symbol(name);
}

const std::string& SExpr::text() const {
  static const std::string nil_text = "nil";
  if (is_nil()) return nil_text;
  if (node_->kind != Kind::Symbol && node_->kind != Kind::String) {
    throw Error("text() on a non-symbol, non-string value");
  }
  return node_->text;
}

Symbol SExpr::as_symbol() const {
  if (is_nil()) return Symbol("nil");
  if (!is_symbol()) throw FormError("expected a symbol, got " + to_string(*this), pos());
  return Symbol(node_->text);
}

const BigInt& SExpr::integer_value() const {
  if (!is_integer()) throw Error("integer_value() on a non-integer");
  return node_->value;
}

std::span<const SExpr> SExpr::items() const {
  if (!is_cons()) return {};
  return node_->items;
}

const SExpr& SExpr::tail() const {
  static const SExpr nil;
  if (!is_cons()) return nil;
  return node_->tail;
}

SExpr SExpr::car() const {
  if (!is_cons()) return SExpr();
  return node_->items.front();
}

SExpr SExpr::cdr() const { return drop(1); }

SExpr SExpr::drop(std::size_t from) const {
  if (!is_cons()) return SExpr();
  if (from == 0) return *this;
  if (from >= node_->items.size()) return from == node_->items.size() ? node_->tail : SExpr();
  return list(std::vector<SExpr>(node_->items.begin() + static_cast<std::ptrdiff_t>(from),
                                 node_->items.end()),
              node_->tail);
}

SourcePos SExpr::pos() const { return node_ ? node_->pos : SourcePos{}; }

SExpr SExpr::with_pos(SourcePos pos) const {
  if (!node_) return *this;
  auto node = std::make_shared<Node>(*node_);
  node->pos = pos;
  return SExpr(std::move(node));
}

bool sexpr_equal(const SExpr& a, const SExpr& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case SExpr::Kind::Symbol:
      return iequals(a.text(), b.text());
    case SExpr::Kind::Integer:
      return a.integer_value() == b.integer_value();
    case SExpr::Kind::String:
      return a.text() == b.text();
    case SExpr::Kind::List: {
      auto xs = a.items();
      auto ys = b.items();
      if (xs.size() != ys.size()) return false;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!sexpr_equal(xs[i], ys[i])) return false;
      }
      return xs.empty() || sexpr_equal(a.tail(), b.tail());
    }
  }
  return false;
}

bool operator==(const SExpr& a, const SExpr& b) {
  return a.node_ == b.node_ || sexpr_equal(a, b);
}

// ---------------------------------------------------------------------------
// Reader

namespace {

bool is_delimiter(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '\'' ||
         c == '`' || c == ',' || c == '"' || c == ';';
}

bool looks_like_integer(std::string_view tok) {
  std::size_t i = 0;
  if (!tok.empty() && (tok[0] == '+' || tok[0] == '-')) i = 1;
  if (i >= tok.size()) return false;
  return std::all_of(tok.begin() + static_cast<std::ptrdiff_t>(i), tok.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool self_evaluating(const SExpr& x) {
  return x.is_nil() || x.is_integer() || x.is_string() || x.is_keyword() || x.is_symbol("t");
}

bool mentions_unquote(const SExpr& x) {
  if (x.is_symbol("unquote") || x.is_symbol("unquote-splicing")) return true;
  if (!x.is_cons()) return false;
  for (const auto& item : x.items()) {
    if (mentions_unquote(item)) return true;
  }
  return mentions_unquote(x.tail());
}

SExpr sym(std::string_view s) { return SExpr::symbol(s); }

// Prepends one element to a construction form, collapsing onto `list` when
// the rest is itself a `list` call.
SExpr build_cons(const SExpr& head, const SExpr& rest) {
  if (rest.has_head("list")) {
    std::vector<SExpr> items{sym("list"), head};
    auto args = rest.items().subspan(1);
    items.insert(items.end(), args.begin(), args.end());
    return SExpr::list(std::move(items));
  }
  return SExpr::list({sym("cons"), head, rest});
}

SExpr desugar_quasi(const SExpr& x, SourcePos pos) {
  if (x.has_head("unquote") && x.size() == 2) return x[1];
  if (x.has_head("unquote-splicing")) {
    throw ReadError(",@ must appear inside a list template", pos);
  }
  if (x.is_atom()) return self_evaluating(x) ? x : SExpr::quote(x);
  if (!mentions_unquote(x)) return SExpr::quote(x);

  auto items = x.items();
  std::size_t n = items.size();
  SExpr acc;
  bool have_acc = false;
  if (!x.tail().is_nil()) {
    acc = desugar_quasi(x.tail(), pos);
    have_acc = true;
  } else if (n >= 2 && items[n - 2].is_symbol("unquote")) {
    // `(a . ,rest)` reads as (a unquote rest)
    acc = items[n - 1];
    have_acc = true;
    n -= 2;
  } else if (n >= 2 && items[n - 2].is_symbol("unquote-splicing")) {
    throw ReadError(",@ after a dot is not allowed", pos);
  }
  for (std::size_t i = n; i-- > 0;) {
    const SExpr& item = items[i];
    if (item.has_head("unquote-splicing") && item.size() == 2) {
      acc = have_acc ? SExpr::list({sym("append"), item[1], acc}) : item[1];
    } else {
      SExpr piece = desugar_quasi(item, pos);
      acc = have_acc ? build_cons(piece, acc) : SExpr::list({sym("list"), piece});
    }
    have_acc = true;
  }
  return acc;
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    while (true) {
      skip_space();
      if (at_end()) break;
      out.push_back(read());
    }
    return out;
  }

 private:
  bool at_end() const { return i_ >= text_.size(); }
  char peek() const { return text_[i_]; }
  SourcePos here() const { return {line_, col_}; }

  char next() {
    char c = text_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (!at_end()) {
      char c = peek();
      if (c == ';') {
        while (!at_end() && peek() != '\n') next();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        next();
      } else {
        break;
      }
    }
  }

  SExpr read() {
    skip_space();
    SourcePos pos = here();
    if (at_end()) throw ReadError("unexpected end of input", pos);
    char c = peek();
    switch (c) {
      case '(':
        next();
        return read_list_rest(pos);
      case ')':
        throw ReadError("unbalanced parenthesis: unexpected ')'", pos);
      case '\'':
        next();
        return SExpr::quote(read_operand(pos, "'")).with_pos(pos);
      case '`': {
        next();
        if (quasi_depth_ > 0) throw ReadError("nested quasiquote is not supported", pos);
        ++quasi_depth_;
        SExpr body = read_operand(pos, "`");
        --quasi_depth_;
        return desugar_quasi(body, pos).with_pos(pos);
      }
      case ',': {
        next();
        std::string_view head = "unquote";
        if (!at_end() && peek() == '@') {
          next();
          head = "unquote-splicing";
        }
        if (quasi_depth_ == 0) throw ReadError("unquote outside quasiquote", pos);
        --quasi_depth_;
        SExpr body = read_operand(pos, ",");
        ++quasi_depth_;
        return SExpr::list({sym(head), body}).with_pos(pos);
      }
      case '"':
        next();
        return read_string(pos);
      default:
        return read_atom(pos);
    }
  }

  SExpr read_operand(SourcePos pos, std::string_view what) {
    skip_space();
    if (at_end() || peek() == ')') {
      throw ReadError(std::string("missing form after ") + std::string(what), pos);
    }
    return read();
  }

  SExpr read_list_rest(SourcePos open) {
    std::vector<SExpr> items;
    while (true) {
      skip_space();
      if (at_end()) throw ReadError("unbalanced parenthesis: missing ')'", open);
      if (peek() == ')') {
        next();
        return SExpr::list(std::move(items)).with_pos(open);
      }
      if (at_dot()) {
        SourcePos dot = here();
        next();
        if (items.empty()) throw ReadError("dotted pair with no head element", dot);
        skip_space();
        if (at_end() || peek() == ')') {
          throw ReadError("dotted pair must have exactly one tail element", dot);
        }
        SExpr tail = read();
        skip_space();
        if (at_end()) throw ReadError("unbalanced parenthesis: missing ')'", open);
        if (peek() != ')') throw ReadError("dotted pair must have exactly one tail element", dot);
        next();
        return SExpr::list(std::move(items), std::move(tail)).with_pos(open);
      }
      items.push_back(read());
    }
  }

  bool at_dot() const {
    return peek() == '.' && (i_ + 1 >= text_.size() || is_delimiter(text_[i_ + 1]));
  }

  SExpr read_string(SourcePos open) {
    std::string out;
    while (true) {
      if (at_end()) throw ReadError("unterminated string", open);
      char c = next();
      if (c == '"') break;
      if (c == '\\') {
        if (at_end()) throw ReadError("unterminated string", open);
        c = next();
      }
      out.push_back(c);
    }
    return SExpr::string(std::move(out));
  }

  SExpr read_atom(SourcePos pos) {
    std::size_t start = i_;
    while (!at_end() && !is_delimiter(peek())) next();
    std::string_view tok = text_.substr(start, i_ - start);
    if (looks_like_integer(tok)) {
      std::string digits(tok.front() == '+' ? tok.substr(1) : tok);
      return SExpr::integer(BigInt(digits));
    }
    if (tok == ".") throw ReadError("unexpected '.'", pos);
    return SExpr::symbol(tok);
  }

  std::string_view text_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
  int quasi_depth_ = 0;
};

}  // namespace

std::vector<SExpr> read_all(std::string_view text) { return Reader(text).read_all(); }

SExpr read_one(std::string_view text) {
  auto forms = read_all(text);
  if (forms.size() != 1) {
    throw ReadError("expected exactly one form, found " + std::to_string(forms.size()));
  }
  return forms.front();
}

// ---------------------------------------------------------------------------
// Printer

namespace {

constexpr std::size_t kLineWidth = 80;

bool is_quote_sugar(const SExpr& x) { return x.has_head("quote") && x.size() == 2; }

void print_flat(const SExpr& x, std::string& out) {
  switch (x.kind()) {
    case SExpr::Kind::Symbol:
      out += x.text();
      return;
    case SExpr::Kind::Integer:
      out += x.integer_value().str();
      return;
    case SExpr::Kind::String:
      out.push_back('"');
      for (char c : x.text()) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
      }
      out.push_back('"');
      return;
    case SExpr::Kind::List:
      break;
  }
  if (x.is_nil()) {
    out += "nil";
    return;
  }
  if (is_quote_sugar(x)) {
    out.push_back('\'');
    print_flat(x[1], out);
    return;
  }
  out.push_back('(');
  bool first = true;
  for (const auto& item : x.items()) {
    if (!first) out.push_back(' ');
    first = false;
    print_flat(item, out);
  }
  if (!x.tail().is_nil()) {
    out += " . ";
    print_flat(x.tail(), out);
  }
  out.push_back(')');
}

std::string flat_text(const SExpr& x) {
  std::string out;
  print_flat(x, out);
  return out;
}

void print_pretty(const SExpr& x, std::size_t col, std::string& out);

// Breaks a list that does not fit. Runs of atoms share a line with the head
// (or with each other), and a keyword stays on the line of its value.
void print_pretty_list(const SExpr& x, std::size_t col, std::string& out) {
  auto items = x.items();
  const std::size_t indent = col + 2;
  out.push_back('(');
  std::size_t line_col = col + 1;
  print_pretty(items[0], line_col, out);
  bool atomic_line = items[0].is_atom();
  line_col = items[0].is_atom() ? line_col + flat_text(items[0]).size() : indent;

  for (std::size_t i = 1; i < items.size(); ++i) {
    const SExpr& item = items[i];
    bool pair = item.is_keyword() && i + 1 < items.size();
    std::string flat = flat_text(item);
    if (pair) flat += " " + flat_text(items[i + 1]);
    bool atoms_only = item.is_atom() && (!pair || items[i + 1].is_atom());

    if (atoms_only && atomic_line && line_col + 1 + flat.size() + 1 <= kLineWidth) {
      out.push_back(' ');
      out += flat;
      line_col += 1 + flat.size();
      i += pair ? 1 : 0;
      continue;
    }
    out.push_back('\n');
    out.append(indent, ' ');
    if (pair) {
      out += item.text();
      out.push_back(' ');
      print_pretty(items[i + 1], indent + item.text().size() + 1, out);
      ++i;
    } else {
      print_pretty(item, indent, out);
    }
    atomic_line = atoms_only;
    line_col = indent + flat.size();
  }
  if (!x.tail().is_nil()) {
    out.push_back('\n');
    out.append(indent, ' ');
    out += ". ";
    print_pretty(x.tail(), indent + 2, out);
  }
  out.push_back(')');
}

void print_pretty(const SExpr& x, std::size_t col, std::string& out) {
  std::string flat = flat_text(x);
  if (x.is_atom() || col + flat.size() <= kLineWidth) {
    out += flat;
    return;
  }
  if (is_quote_sugar(x)) {
    out.push_back('\'');
    print_pretty(x[1], col + 1, out);
    return;
  }
  print_pretty_list(x, col, out);
}

}  // namespace

std::string print_canonical(const SExpr& x, PrintStyle style) {
  std::string out;
  if (style == PrintStyle::Compact) {
    print_flat(x, out);
  } else {
    print_pretty(x, 0, out);
  }
  return out;
}

SExpr substitute_symbol(const SExpr& term, const Symbol& from, const SExpr& to) {
  if (term.is_symbol()) return term.as_symbol() == from ? to : term;
  if (!term.is_cons() || term.has_head("quote")) return term;
  std::vector<SExpr> items;
  items.reserve(term.size());
  for (const auto& item : term.items()) items.push_back(substitute_symbol(item, from, to));
  return SExpr::list(std::move(items), substitute_symbol(term.tail(), from, to))
      .with_pos(term.pos());
}

std::string replace_all_ci(std::string_view text, std::string_view pattern,
                           std::string_view replacement) {
  if (pattern.empty()) return std::string(text);
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (i + pattern.size() <= text.size() && iequals(text.substr(i, pattern.size()), pattern)) {
      out += replacement;
      i += pattern.size();
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

}  // namespace mutgen
