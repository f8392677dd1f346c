#ifndef MUTGEN_SEXPR_HPP
#define MUTGEN_SEXPR_HPP

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mutgen/error.hpp"

namespace mutgen {

using BigInt = boost::multiprecision::cpp_int;

/// ASCII case-insensitive comparison; symbol identity everywhere in the
/// library goes through this.
bool iequals(std::string_view a, std::string_view b);

/// A symbol name. Comparison ignores ASCII case; the original spelling is kept
/// for printing. A package prefix (`acl2::?args`) is part of the identity.
class Symbol {
 public:
  Symbol() = default;
  explicit Symbol(std::string text) : text_(std::move(text)) {}

  const std::string& text() const { return text_; }
  bool empty() const { return text_.empty(); }
  bool is_keyword() const { return !text_.empty() && text_.front() == ':'; }

  /// Lower-cased text, usable as a map key.
  std::string key() const;

  friend bool operator==(const Symbol& a, const Symbol& b) {
    return iequals(a.text_, b.text_);
  }
  friend bool operator==(const Symbol& a, std::string_view b) {
    return iequals(a.text_, b);
  }

 private:
  std::string text_;
};

/// Immutable S-expression value. Copies share structure.
///
/// Lists are stored as a vector of elements plus a tail, which is `nil` for a
/// proper list and an atom for a dotted list. The empty list and the symbol
/// `nil` are the same value.
class SExpr {
 public:
  enum class Kind { Symbol, Integer, String, List };

  /// nil
  SExpr() = default;

  static SExpr symbol(std::string_view text);
  static SExpr symbol(const Symbol& sym) { return symbol(sym.text()); }
  static SExpr integer(BigInt value);
  static SExpr string(std::string text);
  /// Builds a list; a list-valued `tail` is spliced so the result stays
  /// normalized (`(a . (b))` is `(a b)`).
  static SExpr list(std::vector<SExpr> items, SExpr tail = {});
  static SExpr list(std::initializer_list<SExpr> items) {
    return list(std::vector<SExpr>(items));
  }
  static SExpr cons(SExpr head, SExpr tail);
  static SExpr quote(SExpr x);
  static SExpr t() { return symbol("t"); }

  Kind kind() const;
  bool is_nil() const { return node_ == nullptr; }
  bool is_symbol() const { return kind() == Kind::Symbol; }
  bool is_symbol(std::string_view name) const;
  bool is_keyword() const;
  bool is_integer() const { return kind() == Kind::Integer; }
  bool is_string() const { return kind() == Kind::String; }
  /// nil or a cons.
  bool is_list() const { return kind() == Kind::List; }
  bool is_cons() const { return !is_nil() && is_list(); }
  bool is_atom() const { return !is_cons(); }
  /// nil, or a list whose tail is nil.
  bool is_proper() const;
  /// A proper list whose first element is the symbol `name`.
  bool has_head(std::string_view name) const;

  /// Text of a symbol or string.
  const std::string& text() const;
  Symbol as_symbol() const;
  const BigInt& integer_value() const;

  /// Elements of a list; empty for atoms and nil.
  std::span<const SExpr> items() const;
  const SExpr& tail() const;
  std::size_t size() const { return items().size(); }
  const SExpr& operator[](std::size_t i) const { return items()[i]; }
  SExpr car() const;
  SExpr cdr() const;
  /// Elements from index `from` onwards, keeping the tail.
  SExpr drop(std::size_t from) const;

  /// Position recorded by the reader; unknown for constructed values.
  SourcePos pos() const;
  SExpr with_pos(SourcePos pos) const;

  friend bool operator==(const SExpr& a, const SExpr& b);

 private:
  struct Node;
  explicit SExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Structural equality; symbols compare case-insensitively, source positions
/// are ignored.
bool sexpr_equal(const SExpr& a, const SExpr& b);

/// Parses zero or more S-expressions. Quote sugar becomes `(quote x)` and
/// quasiquote templates are rewritten into `list`/`cons`/`append`/`quote`
/// construction forms.
std::vector<SExpr> read_all(std::string_view text);

/// Reads exactly one S-expression.
SExpr read_one(std::string_view text);

enum class PrintStyle { Pretty, Compact };

/// Deterministic printer. Pretty output breaks lists that would run past
/// column 80, indenting continuation lines two columns past the open paren.
std::string print_canonical(const SExpr& x, PrintStyle style = PrintStyle::Pretty);

/// Shorthand for the single-line form.
inline std::string to_string(const SExpr& x) {
  return print_canonical(x, PrintStyle::Compact);
}

/// Replaces every symbol equal to `from` by `to`, leaving quoted data alone.
SExpr substitute_symbol(const SExpr& term, const Symbol& from, const SExpr& to);

/// Replaces every case-insensitive occurrence of `pattern` in `text`.
std::string replace_all_ci(std::string_view text, std::string_view pattern,
                           std::string_view replacement);

}  // namespace mutgen

#endif  // MUTGEN_SEXPR_HPP
