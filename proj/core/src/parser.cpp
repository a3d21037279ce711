#include "foc/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "foc/structures.hpp"

namespace foc {

namespace {

enum class Tok : std::uint8_t {
  End, Ident, Int, Backtick,
  KwVocabulary, KwTheory, KwStructure, KwType, KwIn, KwIf, KwThen, KwElse,
  KwSum, KwLambda, KwTrue, KwFalse, KwUnknown,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Comma, Dot, DotDot, Colon, ColonColon, Assign,
  Bang, Question, Tilde, Amp, Pipe, Implies, Equiv,
  Eq, Neq, Leq, Lt, Geq, Gt, Arrow, LArrow, Star2, Minus,
  Dollar, Hash,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t num = 0;
  SourceSpan span;
};

const std::map<std::string, Tok, std::less<>> kKeywords = {
    {"vocabulary", Tok::KwVocabulary}, {"theory", Tok::KwTheory},
    {"structure", Tok::KwStructure},   {"type", Tok::KwType},
    {"in", Tok::KwIn},                 {"if", Tok::KwIf},
    {"then", Tok::KwThen},             {"else", Tok::KwElse},
    {"sum", Tok::KwSum},               {"lambda", Tok::KwLambda},
    {"true", Tok::KwTrue},             {"false", Tok::KwFalse},
};

class Lexer {
 public:
  Lexer(std::string_view text, DiagnosticSink& diags) : text_(text), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skipSpace();
      Token t = lexOne();
      out.push_back(t);
      if (t.kind == Tok::End) break;
    }
    return out;
  }

 private:
  std::string_view text_;
  DiagnosticSink& diags_;
  std::size_t pos_ = 0;
  std::int32_t line_ = 1, col_ = 1;

  char peek(std::size_t off = 0) const {
    return pos_ + off < text_.size() ? text_[pos_ + off] : '\0';
  }
  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  bool match(char c) {
    if (peek() == c) {
      advance();
      return true;
    }
    return false;
  }
  SourceSpan here(std::int32_t len = 1) const { return {line_, col_, len}; }

  void skipSpace() {
    while (pos_ < text_.size()) {
      char c = peek();
      if (c == '/' && peek(1) == '/') {
        while (pos_ < text_.size() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  Token make(Tok k, SourceSpan sp, std::string text = "") {
    Token t;
    t.kind = k;
    t.span = sp;
    t.text = std::move(text);
    return t;
  }

  Token lexOne() {
    if (pos_ >= text_.size()) return make(Tok::End, here(0));
    SourceSpan sp = here();
    char c = peek();

    if (std::isalpha(static_cast<unsigned char>(c))) return lexWord(sp);
    if (std::isdigit(static_cast<unsigned char>(c))) return lexNumber(sp);

    advance();
    switch (c) {
      case '(': return make(Tok::LParen, sp);
      case ')': return make(Tok::RParen, sp);
      case '{': return make(Tok::LBrace, sp);
      case '}': return make(Tok::RBrace, sp);
      case '[': return make(Tok::LBracket, sp);
      case ']': return make(Tok::RBracket, sp);
      case ',': return make(Tok::Comma, sp);
      case '!': return make(Tok::Bang, sp);
      case '?': return make(Tok::Question, sp);
      case '&': return make(Tok::Amp, sp);
      case '|': return make(Tok::Pipe, sp);
      case '$': return make(Tok::Dollar, sp);
      case '#': return make(Tok::Hash, sp);
      case '.':
        if (match('.')) return make(Tok::DotDot, {sp.line, sp.column, 2});
        return make(Tok::Dot, sp);
      case ':':
        if (match(':')) return make(Tok::ColonColon, {sp.line, sp.column, 2});
        if (match('=')) return make(Tok::Assign, {sp.line, sp.column, 2});
        return make(Tok::Colon, sp);
      case '~':
        if (match('=')) return make(Tok::Neq, {sp.line, sp.column, 2});
        return make(Tok::Tilde, sp);
      case '=':
        if (match('>')) return make(Tok::Implies, {sp.line, sp.column, 2});
        if (match('<')) return make(Tok::Leq, {sp.line, sp.column, 2});
        return make(Tok::Eq, sp);
      case '>':
        if (match('=')) return make(Tok::Geq, {sp.line, sp.column, 2});
        return make(Tok::Gt, sp);
      case '<':
        if (peek() == '=' && peek(1) == '>') {
          advance();
          advance();
          return make(Tok::Equiv, {sp.line, sp.column, 3});
        }
        if (match('-')) return make(Tok::LArrow, {sp.line, sp.column, 2});
        if (text_.compare(pos_, 8, "unknown>") == 0) {
          for (int i = 0; i < 8; ++i) advance();
          return make(Tok::KwUnknown, {sp.line, sp.column, 9});
        }
        return make(Tok::Lt, sp);
      case '-':
        if (match('>')) return make(Tok::Arrow, {sp.line, sp.column, 2});
        return make(Tok::Minus, sp);
      case '*':
        if (match('*')) return make(Tok::Star2, {sp.line, sp.column, 2});
        diags_.error(sp, "SyntaxError", "stray '*' (signatures use '**')");
        return lexOne();
      case '\\':
        // The listings write binary quantification as \in.
        if (peek() == 'i' && peek(1) == 'n') {
          advance();
          advance();
          return make(Tok::KwIn, {sp.line, sp.column, 3});
        }
        diags_.error(sp, "SyntaxError", "unexpected '\\'");
        return lexOne();
      case '`': {
        std::string name;
        while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
          name += advance();
        if (name.empty()) {
          diags_.error(sp, "SyntaxError", "'`' must be followed by a symbol name");
          return lexOne();
        }
        Token t = make(Tok::Backtick, sp, name);
        t.span.length = static_cast<std::int32_t>(name.size()) + 1;
        return t;
      }
      default:
        diags_.error(sp, "SyntaxError", std::string("unexpected character '") + c + "'");
        return lexOne();
    }
  }

  Token lexWord(SourceSpan sp) {
    std::string word;
    while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
      word += advance();
    sp.length = static_cast<std::int32_t>(word.size());
    auto it = kKeywords.find(word);
    if (it != kKeywords.end()) return make(it->second, sp, word);
    return make(Tok::Ident, sp, word);
  }

  Token lexNumber(SourceSpan sp) {
    std::int64_t v = 0;
    int len = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (advance() - '0');
      ++len;
    }
    Token t = make(Tok::Int, sp);
    t.num = v;
    t.span.length = len;
    return t;
  }
};

// ---------------------------------------------------------------------------

class Parser {
 public:
  Parser(std::vector<Token> tokens, DiagnosticSink& diags)
      : toks_(std::move(tokens)), diags_(diags) {}

  void parseFile(SourceFile& out) {
    while (!at(Tok::End)) {
      try {
        if (at(Tok::KwVocabulary)) {
          parseVocabulary(out);
        } else if (at(Tok::KwTheory)) {
          parseTheory(out);
        } else if (at(Tok::KwStructure)) {
          parseStructure(out);
        } else {
          fail(cur().span, "expected a vocabulary, theory or structure block");
        }
      } catch (const Bail&) {
        recoverToBlock();
      }
    }
  }

  // Entry point for parseExpression().
  std::optional<Expr> parseLoneExpr(Vocabulary& voc) {
    voc_ = &voc;
    try {
      Expr e = parseFormula();
      expect(Tok::End, "end of expression");
      return e;
    } catch (const Bail&) {
      return std::nullopt;
    }
  }

  // Entry point for loadStructure().
  std::optional<StructureDecl> parseLoneStructure(Vocabulary& voc) {
    voc_ = &voc;
    SourceFile dummy;
    dummy.hasVocabulary = true;
    try {
      if (!at(Tok::KwStructure)) fail(cur().span, "expected a structure block");
      parseStructure(dummy);
      if (dummy.structures.empty()) return std::nullopt;
      return dummy.structures.front();
    } catch (const Bail&) {
      return std::nullopt;
    }
  }

 private:
  struct Bail {};

  std::vector<Token> toks_;
  DiagnosticSink& diags_;
  std::size_t pos_ = 0;
  Vocabulary* voc_ = nullptr;  // the file's vocabulary once parsed
  std::vector<std::string> scope_;

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t off = 1) const {
    return toks_[std::min(pos_ + off, toks_.size() - 1)];
  }
  bool at(Tok k) const { return cur().kind == k; }
  Token take() { return toks_[pos_++]; }
  bool accept(Tok k) {
    if (at(k)) {
      ++pos_;
      return true;
    }
    return false;
  }
  Token expect(Tok k, const std::string& what) {
    if (!at(k)) fail(cur().span, "expected " + what);
    return take();
  }
  [[noreturn]] void fail(SourceSpan sp, const std::string& msg) {
    diags_.error(sp, "SyntaxError", msg);
    throw Bail{};
  }

  void recoverToBlock() {
    // Skip to the next block keyword at brace depth zero, or past the block's
    // closing brace, whichever comes first.
    int depth = 0;
    while (!at(Tok::End)) {
      if (at(Tok::LBrace)) ++depth;
      if (at(Tok::RBrace)) {
        take();
        if (--depth <= 0) return;
        continue;
      }
      if (depth == 0 &&
          (at(Tok::KwVocabulary) || at(Tok::KwTheory) || at(Tok::KwStructure)))
        return;
      take();
    }
  }

  void recoverToStatement() {
    int depth = 0;
    while (!at(Tok::End)) {
      if (at(Tok::Dot) && depth == 0) {
        take();
        return;
      }
      if (at(Tok::LBrace)) ++depth;
      if (at(Tok::RBrace)) {
        if (depth == 0) return;
        --depth;
      }
      take();
    }
  }

  Vocabulary& voc(SourceSpan sp) {
    if (!voc_) fail(sp, "no vocabulary declared before this block");
    return *voc_;
  }

  // ---- types and signatures ----

  TypeId parseTypeRef() {
    Token t = expect(Tok::Ident, "a type name");
    if (t.text == "Concept" && at(Tok::LBracket)) {
      take();
      Signature sig = parseSignature();
      expect(Tok::RBracket, "']'");
      return voc(t.span).subtypeOf(sig);
    }
    auto id = voc(t.span).findType(t.text);
    if (!id) fail(t.span, "unknown type '" + t.text + "'");
    return *id;
  }

  Signature parseSignature() {
    Signature sig;
    if (accept(Tok::LParen)) {
      if (!accept(Tok::RParen)) {
        sig.args.push_back(parseTypeRef());
        while (accept(Tok::Star2)) sig.args.push_back(parseTypeRef());
        expect(Tok::RParen, "')'");
      }
    } else {
      sig.args.push_back(parseTypeRef());
      while (accept(Tok::Star2)) sig.args.push_back(parseTypeRef());
    }
    expect(Tok::Arrow, "'->'");
    sig.out = parseTypeRef();
    return sig;
  }

  // ---- vocabulary blocks ----

  void parseVocabulary(SourceFile& out) {
    Token kw = take();
    if (out.hasVocabulary) fail(kw.span, "only one vocabulary block per file");
    out.hasVocabulary = true;
    voc_ = &out.vocabulary;
    if (at(Tok::Ident)) out.vocabulary.name = take().text;
    expect(Tok::LBrace, "'{'");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      try {
        if (at(Tok::KwType)) {
          parseTypeDecl();
        } else {
          parseSymbolDecl();
        }
      } catch (const Bail&) {
        recoverToStatement();
      }
    }
    expect(Tok::RBrace, "'}'");
  }

  void parseTypeDecl() {
    Token kw = take();
    Token name = expect(Tok::Ident, "a type name");
    TypeSymbol t;
    t.name = name.text;
    t.span = name.span;
    if (accept(Tok::Assign)) {
      if (at(Tok::Ident) && cur().text == "Int") {
        take();
        IntInterp ii;
        if (accept(Tok::LBracket)) {
          ii.bounds = parseBounds();
          expect(Tok::RBracket, "']'");
        }
        t.interp = ii;
      } else if (accept(Tok::LBrace)) {
        bool neg = at(Tok::Minus);
        if (at(Tok::Int) || neg) {
          IntBounds b = parseBounds();
          expect(Tok::RBrace, "'}'");
          t.interp = IntInterp{b};  // {lo..hi} is integer-range sugar
        } else {
          CustomInterp ci;
          ci.ctors.push_back(expect(Tok::Ident, "a constructor name").text);
          while (accept(Tok::Comma))
            ci.ctors.push_back(expect(Tok::Ident, "a constructor name").text);
          expect(Tok::RBrace, "'}'");
          t.interp = ci;
        }
      } else {
        fail(cur().span, "expected '{' or 'Int' after ':='");
      }
    } else {
      t.interp = CustomInterp{};  // abstract; validation requires an enumeration
    }
    (void)kw;
    if (voc_->findType(t.name)) fail(name.span, "type '" + t.name + "' already declared");
    voc_->addType(std::move(t));
  }

  IntBounds parseBounds() {
    auto integer = [&]() -> std::int64_t {
      bool neg = accept(Tok::Minus);
      Token v = expect(Tok::Int, "an integer");
      return neg ? -v.num : v.num;
    };
    IntBounds b;
    b.lo = integer();
    expect(Tok::DotDot, "'..'");
    b.hi = integer();
    return b;
  }

  void parseSymbolDecl() {
    std::vector<Token> names;
    names.push_back(expect(Tok::Ident, "a symbol name"));
    while (accept(Tok::Comma)) names.push_back(expect(Tok::Ident, "a symbol name"));
    expect(Tok::Colon, "':' and a signature");
    Signature sig = parseSignature();
    for (const auto& n : names) {
      for (const char* reserved : {"arity", "input", "output"})
        if (n.text == reserved)
          fail(n.span, "'" + n.text + "' is a built-in introspection function");
      if (voc_->findSymbol(n.text))
        fail(n.span, "symbol '" + n.text + "' already declared");
      voc_->addSymbol({n.text, sig, n.span});
    }
  }

  // ---- theory blocks ----

  void parseTheory(SourceFile& out) {
    Token kw = take();
    Theory th;
    if (at(Tok::Ident)) th.name = take().text;
    if (accept(Tok::Colon)) th.vocName = expect(Tok::Ident, "a vocabulary name").text;
    Vocabulary& v = voc(kw.span);
    if (!th.vocName.empty() && th.vocName != v.name)
      fail(kw.span, "theory references unknown vocabulary '" + th.vocName + "'");
    th.vocName = v.name;
    expect(Tok::LBrace, "'{'");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      try {
        if (at(Tok::LBrace)) {
          parseDefinitionBlock(th);
        } else if (at(Tok::Ident) && peek().kind == Tok::Assign) {
          th.assignments.push_back(parseAssignment());
        } else {
          Expr e = parseFormula();
          expect(Tok::Dot, "'.' after the sentence");
          th.axioms.push_back(std::move(e));
        }
      } catch (const Bail&) {
        recoverToStatement();
      }
    }
    expect(Tok::RBrace, "'}'");
    out.theories.push_back(std::move(th));
  }

  void parseDefinitionBlock(Theory& th) {
    expect(Tok::LBrace, "'{'");
    std::vector<DefRule> rules;
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      try {
        rules.push_back(parseRule());
      } catch (const Bail&) {
        recoverToStatement();
      }
    }
    expect(Tok::RBrace, "'}' closing the definition");
    // One Definition per defined symbol, grouped in first-appearance order.
    std::vector<Definition> defs;
    for (auto& r : rules) {
      auto it = std::find_if(defs.begin(), defs.end(),
                             [&](const Definition& d) { return d.symbol == r.symbol; });
      if (it == defs.end()) {
        defs.push_back({r.symbol, {}});
        it = defs.end() - 1;
      }
      it->rules.push_back(std::move(r));
    }
    for (auto& d : defs) th.definitions.push_back(std::move(d));
  }

  DefRule parseRule() {
    DefRule rule;
    rule.span = cur().span;
    std::vector<Binder> binders;
    std::vector<Expr> guards;
    std::size_t mark = scope_.size();
    while (at(Tok::Bang)) {
      take();
      parseBinderListScoped(binders, guards);
      expect(Tok::Colon, "':' after the rule's quantifier");
    }

    Token head = expect(Tok::Ident, "the defined symbol");
    auto sym = voc(head.span).findSymbol(head.text);
    if (!sym) fail(head.span, "unknown symbol '" + head.text + "'");
    rule.symbol = *sym;
    expect(Tok::LParen, "'(' after the defined symbol");
    std::vector<std::string> headVars;
    if (!accept(Tok::RParen)) {
      do {
        Token v = expect(Tok::Ident, "a head variable");
        headVars.push_back(v.text);
      } while (accept(Tok::Comma));
      expect(Tok::RParen, "')'");
    }
    std::vector<std::string> uniq = headVars;
    std::sort(uniq.begin(), uniq.end());
    if (std::adjacent_find(uniq.begin(), uniq.end()) != uniq.end())
      fail(head.span, "head arguments must be distinct variables");

    if (accept(Tok::Eq)) rule.outTerm = parseComparisonOperand();
    Expr body = mkBool(true);
    if (accept(Tok::LArrow)) body = parseFormula();
    expect(Tok::Dot, "'.' after the rule");

    // Predicate-range guards become body conjuncts.
    for (std::size_t i = guards.size(); i-- > 0;) {
      if (guards[i].kind == ExprKind::BoolLit && guards[i].boolValue) continue;
      body = mkBinary(ExprKind::And, std::move(guards[i]), std::move(body));
    }
    // Head variables keep their binder ranges; other quantified variables are
    // wrapped as existentials around the body.
    for (const auto& hv : headVars) {
      auto it = std::find_if(binders.begin(), binders.end(),
                             [&](const Binder& b) { return b.var == hv; });
      if (it == binders.end())
        fail(head.span, "head variable '" + hv + "' is not bound by the rule quantifier");
      rule.headVars.push_back(*it);
    }
    for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
      if (std::find(headVars.begin(), headVars.end(), it->var) != headVars.end()) continue;
      body = mkQuant(QuantKind::Exists, it->var, it->range, std::move(body));
    }
    rule.body = std::move(body);
    while (scope_.size() > mark) scope_.pop_back();
    return rule;
  }

  AssignmentStmt parseAssignment() {
    Token name = take();
    AssignmentStmt a;
    a.span = name.span;
    auto sym = voc(name.span).findSymbol(name.text);
    if (!sym) fail(name.span, "unknown symbol '" + name.text + "'");
    a.symbol = *sym;
    expect(Tok::Assign, "':='");
    a.table = parseTableLiteral();
    expect(Tok::Dot, "'.' after the assignment");
    return a;
  }

  RawElem parseRawElem() {
    RawElem e;
    e.span = cur().span;
    if (at(Tok::Int) || at(Tok::Minus)) {
      bool neg = accept(Tok::Minus);
      Token v = expect(Tok::Int, "an integer");
      e.kind = RawElem::Kind::Int;
      e.num = neg ? -v.num : v.num;
    } else if (at(Tok::Backtick)) {
      e.kind = RawElem::Kind::Backtick;
      e.name = take().text;
    } else if (at(Tok::KwTrue) || at(Tok::KwFalse)) {
      e.kind = RawElem::Kind::Bool;
      e.b = take().kind == Tok::KwTrue;
    } else if (at(Tok::Ident)) {
      e.kind = RawElem::Kind::Name;
      e.name = take().text;
    } else {
      fail(cur().span, "expected a domain element");
    }
    return e;
  }

  TableLiteral parseTableLiteral() {
    TableLiteral lit;
    lit.span = cur().span;
    if (accept(Tok::KwUnknown)) {
      lit.form = TableLiteral::Form::Unknown;
      return lit;
    }
    if (!at(Tok::LBrace)) {
      lit.form = TableLiteral::Form::Value;
      lit.value = parseRawElem();
      return lit;
    }
    take();  // {
    lit.form = TableLiteral::Form::Set;
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      std::vector<RawElem> tuple;
      if (accept(Tok::LParen)) {
        tuple.push_back(parseRawElem());
        while (accept(Tok::Comma)) tuple.push_back(parseRawElem());
        expect(Tok::RParen, "')'");
      } else {
        tuple.push_back(parseRawElem());
      }
      std::optional<RawElem> value;
      if (accept(Tok::Arrow)) {
        lit.form = TableLiteral::Form::Map;
        value = parseRawElem();
      }
      lit.entries.emplace_back(std::move(tuple), std::move(value));
      if (!accept(Tok::Comma)) break;
    }
    expect(Tok::RBrace, "'}'");
    if (accept(Tok::KwElse)) lit.elseValue = parseRawElem();
    return lit;
  }

  // ---- structure blocks ----

  void parseStructure(SourceFile& out) {
    Token kw = take();
    StructureDecl st;
    if (at(Tok::Ident)) st.name = take().text;
    if (accept(Tok::Colon)) st.vocName = expect(Tok::Ident, "a vocabulary name").text;
    Vocabulary& v = voc(kw.span);
    if (!st.vocName.empty() && st.vocName != v.name)
      fail(kw.span, "structure references unknown vocabulary '" + st.vocName + "'");
    st.vocName = v.name;
    expect(Tok::LBrace, "'{'");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      try {
        st.assignments.push_back(parseAssignment());
      } catch (const Bail&) {
        recoverToStatement();
      }
    }
    expect(Tok::RBrace, "'}'");
    out.structures.push_back(std::move(st));
  }

  // ---- formulas and terms ----

  // A range is a type, or a unary predicate P (binary quantification):
  // the binder then ranges over P's argument type with guard atom P(x).
  std::pair<TypeId, std::optional<SymId>> parseRange() {
    Token t = expect(Tok::Ident, "a type or unary predicate");
    if (t.text == "Concept" && at(Tok::LBracket)) {
      take();
      Signature sig = parseSignature();
      expect(Tok::RBracket, "']'");
      return {voc(t.span).subtypeOf(sig), std::nullopt};
    }
    if (auto ty = voc(t.span).findType(t.text)) return {*ty, std::nullopt};
    if (auto sym = voc(t.span).findSymbol(t.text)) {
      const Signature& sig = voc_->symbol(*sym).sig;
      if (sig.arity() != 1 || sig.out != kBoolType)
        fail(t.span, "'" + t.text + "' is not a type or unary predicate");
      return {sig.args[0], SymId{*sym}};
    }
    fail(t.span, "unknown type or predicate '" + t.text + "'");
  }

  Expr parseQuantified(QuantKind kind) {
    SourceSpan sp = cur().span;
    take();  // ! or ?
    std::vector<Binder> binders;
    std::vector<Expr> guards;
    std::size_t scopeMark = scope_.size();
    parseBinderListScoped(binders, guards);
    expect(Tok::Colon, "':' after the quantifier");
    Expr body = parseFormula();
    for (std::size_t i = scope_.size(); i > scopeMark; --i) scope_.pop_back();

    // Innermost binder first; guards attach to their own binder.
    for (std::size_t i = binders.size(); i-- > 0;) {
      if (guards[i].kind != ExprKind::BoolLit || !guards[i].boolValue) {
        Expr g = guards[i];
        body = kind == QuantKind::Forall
                   ? mkBinary(ExprKind::Implies, std::move(g), std::move(body))
                   : mkBinary(ExprKind::And, std::move(g), std::move(body));
      }
      body = mkQuant(kind, binders[i].var, binders[i].range, std::move(body));
      body.span = sp;
    }
    return body;
  }

  void parseBinderListScoped(std::vector<Binder>& out, std::vector<Expr>& guards) {
    while (true) {
      std::vector<Token> vars;
      vars.push_back(expect(Tok::Ident, "a variable name"));
      while (at(Tok::Comma) && peek().kind == Tok::Ident &&
             (peek(2).kind == Tok::Comma || peek(2).kind == Tok::KwIn)) {
        take();
        vars.push_back(expect(Tok::Ident, "a variable name"));
      }
      expect(Tok::KwIn, "'in' and a range");
      auto [range, guardSym] = parseRange();
      for (const auto& v : vars) {
        out.push_back({v.text, range});
        guards.push_back(guardSym ? mkSymApp(*guardSym, {mkVar(v.text)}) : mkBool(true));
        scope_.push_back(v.text);
      }
      if (!accept(Tok::Comma)) break;
    }
  }

  Expr parseFormula() { return parseEquiv(); }

  Expr parseEquiv() {
    Expr lhs = parseImplies();
    while (at(Tok::Equiv)) {
      SourceSpan sp = take().span;
      Expr rhs = parseImplies();
      lhs = mkBinary(ExprKind::Equiv, std::move(lhs), std::move(rhs));
      lhs.span = sp;
    }
    return lhs;
  }

  Expr parseImplies() {
    Expr lhs = parseDisj();
    if (at(Tok::Implies)) {
      SourceSpan sp = take().span;
      Expr rhs = parseImplies();  // right associative
      lhs = mkBinary(ExprKind::Implies, std::move(lhs), std::move(rhs));
      lhs.span = sp;
    }
    return lhs;
  }

  Expr parseDisj() {
    Expr lhs = parseConj();
    while (at(Tok::Pipe)) {
      SourceSpan sp = take().span;
      Expr rhs = parseConj();
      lhs = mkBinary(ExprKind::Or, std::move(lhs), std::move(rhs));
      lhs.span = sp;
    }
    return lhs;
  }

  Expr parseConj() {
    Expr lhs = parseNeg();
    while (at(Tok::Amp)) {
      SourceSpan sp = take().span;
      Expr rhs = parseNeg();
      lhs = mkBinary(ExprKind::And, std::move(lhs), std::move(rhs));
      lhs.span = sp;
    }
    return lhs;
  }

  Expr parseNeg() {
    if (at(Tok::Tilde)) {
      SourceSpan sp = take().span;
      Expr e = mkUnary(ExprKind::Not, parseNeg());
      e.span = sp;
      return e;
    }
    if (at(Tok::Bang)) return parseQuantified(QuantKind::Forall);
    if (at(Tok::Question)) return parseQuantified(QuantKind::Exists);
    if (at(Tok::KwIf)) return parseGuard();
    return parseComparison();
  }

  Expr parseGuard() {
    SourceSpan sp = take().span;  // if
    Token var = expect(Tok::Ident, "a guarded variable");
    expect(Tok::ColonColon, "'::' and a signature");
    Signature sig;
    if (at(Tok::Ident) && cur().text == "Concept" && peek().kind == Tok::LBracket) {
      take();
      take();
      sig = parseSignature();
      expect(Tok::RBracket, "']'");
    } else {
      expect(Tok::LBracket, "'[' and a signature");
      sig = parseSignature();
      expect(Tok::RBracket, "']'");
    }
    voc(sp).subtypeOf(sig);  // make the guard's subtype nameable downstream
    expect(Tok::KwThen, "'then'");
    Expr thenE = parseFormula();
    expect(Tok::KwElse, "'else'");
    Expr elseE = parseNeg();
    Expr e = mkIfGuard(var.text, std::move(sig), std::move(thenE), std::move(elseE));
    e.span = sp;
    return e;
  }

  Expr parseComparison() {
    Expr lhs = parseComparisonOperand();
    if (at(Tok::KwIn) && peek().kind == Tok::LBrace) {
      // membership sugar: e in {a, b} is a disjunction of equalities
      SourceSpan sp = take().span;
      take();  // {
      std::vector<Expr> elems;
      if (!at(Tok::RBrace)) {
        elems.push_back(parseComparisonOperand());
        while (accept(Tok::Comma)) elems.push_back(parseComparisonOperand());
      }
      expect(Tok::RBrace, "'}'");
      if (elems.empty()) return mkBool(false);
      Expr out = mkBinary(ExprKind::Eq, lhs, std::move(elems[0]));
      out.span = sp;
      for (std::size_t i = 1; i < elems.size(); ++i) {
        Expr eq = mkBinary(ExprKind::Eq, lhs, std::move(elems[i]));
        eq.span = sp;
        out = mkBinary(ExprKind::Or, std::move(out), std::move(eq));
        out.span = sp;
      }
      return out;
    }
    ExprKind op;
    switch (cur().kind) {
      case Tok::Eq: op = ExprKind::Eq; break;
      case Tok::Neq: op = ExprKind::Neq; break;
      case Tok::Leq: op = ExprKind::Leq; break;
      case Tok::Lt: op = ExprKind::Lt; break;
      case Tok::Geq: op = ExprKind::Geq; break;
      case Tok::Gt: op = ExprKind::Gt; break;
      default: return lhs;
    }
    SourceSpan sp = take().span;
    Expr rhs = parseComparisonOperand();
    Expr e = mkBinary(op, std::move(lhs), std::move(rhs));
    e.span = sp;
    return e;
  }

  Expr parseComparisonOperand() { return parsePrimary(); }

  std::vector<Expr> parseArgList() {
    std::vector<Expr> args;
    expect(Tok::LParen, "'('");
    if (!accept(Tok::RParen)) {
      args.push_back(parsePrimary());
      while (accept(Tok::Comma)) args.push_back(parsePrimary());
      expect(Tok::RParen, "')'");
    }
    return args;
  }

  bool inScope(const std::string& name) const {
    return std::find(scope_.rbegin(), scope_.rend(), name) != scope_.rend();
  }

  Expr parsePrimary() {
    SourceSpan sp = cur().span;
    switch (cur().kind) {
      case Tok::KwTrue:
        take();
        return withSpan(mkBool(true), sp);
      case Tok::KwFalse:
        take();
        return withSpan(mkBool(false), sp);
      case Tok::Int: {
        Token t = take();
        return withSpan(mkNum(t.num), sp);
      }
      case Tok::Minus: {
        take();
        Token t = expect(Tok::Int, "an integer");
        return withSpan(mkNum(-t.num), sp);
      }
      case Tok::Backtick: {
        Token t = take();
        Vocabulary& v = voc(sp);
        if (auto sym = v.findSymbol(t.text))
          return withSpan(mkIntension(ConceptRef::symbol(*sym)), sp);
        if (auto ty = v.findType(t.text))
          return withSpan(mkIntension(ConceptRef::type(*ty)), sp);
        fail(sp, "unknown symbol '`" + t.text + "'");
      }
      case Tok::Dollar: {
        take();
        expect(Tok::LParen, "'(' after '$'");
        Expr fn = parsePrimary();
        expect(Tok::RParen, "')'");
        std::vector<Expr> args = parseArgList();
        return withSpan(mkValueApp(std::move(fn), std::move(args)), sp);
      }
      case Tok::Hash: {
        take();
        expect(Tok::LBrace, "'{' after '#'");
        std::vector<Binder> binders;
        std::vector<Expr> guards;
        std::size_t mark = scope_.size();
        parseBinderListScoped(binders, guards);
        expect(Tok::Colon, "':' in the aggregate");
        Expr cond = parseFormula();
        expect(Tok::RBrace, "'}'");
        for (std::size_t i = scope_.size(); i > mark; --i) scope_.pop_back();
        for (std::size_t i = guards.size(); i-- > 0;) {
          if (guards[i].kind == ExprKind::BoolLit && guards[i].boolValue) continue;
          cond = mkBinary(ExprKind::And, std::move(guards[i]), std::move(cond));
        }
        return withSpan(mkCount(std::move(binders), std::move(cond)), sp);
      }
      case Tok::KwSum: {
        take();
        expect(Tok::LParen, "'('");
        expect(Tok::KwLambda, "'lambda'");
        Token var = expect(Tok::Ident, "a variable");
        expect(Tok::KwIn, "'in'");
        auto [range, guardSym] = parseRange();
        if (guardSym) fail(sp, "sum ranges over a type, not a predicate");
        expect(Tok::Colon, "':'");
        scope_.push_back(var.text);
        Expr term = parsePrimary();
        scope_.pop_back();
        expect(Tok::RParen, "')'");
        Expr e;
        e.kind = ExprKind::Sum;
        e.var = var.text;
        e.range = range;
        e.kids.push_back(std::move(term));
        return withSpan(std::move(e), sp);
      }
      case Tok::LParen: {
        take();
        Expr e = parseFormula();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident: {
        Token t = take();
        Vocabulary& v = voc(sp);
        if (t.text == "arity" || t.text == "input" || t.text == "output") {
          Expr e;
          e.kind = ExprKind::Introspect;
          e.query = t.text == "arity"   ? IntrospectQuery::Arity
                    : t.text == "input" ? IntrospectQuery::Input
                                        : IntrospectQuery::Output;
          expect(Tok::LParen, "'('");
          e.kids.push_back(parsePrimary());
          if (e.query == IntrospectQuery::Input) {
            expect(Tok::Comma, "',' and an index");
            Token idx = expect(Tok::Int, "an argument index");
            e.num = idx.num;
          }
          expect(Tok::RParen, "')'");
          return withSpan(std::move(e), sp);
        }
        if (at(Tok::LParen)) {
          auto sym = v.findSymbol(t.text);
          if (!sym) fail(sp, "unknown symbol '" + t.text + "'");
          std::vector<Expr> args = parseArgList();
          return withSpan(mkSymApp(*sym, std::move(args)), sp);
        }
        if (inScope(t.text)) return withSpan(mkVar(t.text), sp);
        if (auto sym = v.findSymbol(t.text)) {
          // nullary symbols may be written without parentheses
          if (v.symbol(*sym).sig.arity() != 0)
            fail(sp, "symbol '" + t.text + "' needs arguments");
          return withSpan(mkSymApp(*sym, {}), sp);
        }
        if (auto ctor = v.findCtor(t.text)) {
          Expr e;
          e.kind = ExprKind::ElemLit;
          e.elem = DomainElem::named(ctor->first, ctor->second);
          return withSpan(std::move(e), sp);
        }
        fail(sp, "unknown identifier '" + t.text + "'");
      }
      default:
        fail(sp, "expected a term or formula");
    }
  }

  static Expr withSpan(Expr e, SourceSpan sp) {
    e.span = sp;
    return e;
  }
};

}  // namespace

SourceFile parse(std::string_view text, std::string filename) {
  SourceFile out;
  out.name = std::move(filename);
  DiagnosticSink sink;
  Lexer lexer(text, sink);
  Parser parser(lexer.run(), sink);
  parser.parseFile(out);
  if (out.hasVocabulary)
    for (auto& d : out.vocabulary.validate()) sink.items.push_back(d);
  out.diagnostics = std::move(sink.items);
  return out;
}

std::optional<Expr> parseExpression(Vocabulary& voc, std::string_view text,
                                    DiagnosticSink& diags) {
  Lexer lexer(text, diags);
  Parser parser(lexer.run(), diags);
  return parser.parseLoneExpr(voc);
}

Structure loadStructure(Vocabulary& voc, const std::string& text, DiagnosticSink& diags) {
  Lexer lexer(text, diags);
  Parser parser(lexer.run(), diags);
  auto decl = parser.parseLoneStructure(voc);
  if (!decl) return makeStructure(voc);
  return resolveStructure(voc, *decl, diags);
}

}  // namespace foc
