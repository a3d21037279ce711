#include "foc/printer.hpp"

#include <sstream>

namespace foc {

namespace {

// Binding strength; children with lower strength get parentheses.
enum Prec : int {
  PrecEquiv = 1,
  PrecImplies = 2,
  PrecOr = 3,
  PrecAnd = 4,
  PrecNot = 5,
  PrecCmp = 6,
  PrecAtom = 7,
};

int precOf(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Equiv: return PrecEquiv;
    case ExprKind::Implies: return PrecImplies;
    case ExprKind::Or: return PrecOr;
    case ExprKind::And: return PrecAnd;
    case ExprKind::Not: return PrecNot;
    case ExprKind::Quant:
    case ExprKind::IfGuard: return 0;  // body extends right; parenthesize when nested
    case ExprKind::Eq:
    case ExprKind::Neq:
    case ExprKind::Leq:
    case ExprKind::Lt:
    case ExprKind::Geq:
    case ExprKind::Gt: return PrecCmp;
    default: return PrecAtom;
  }
}

class Printer {
 public:
  explicit Printer(const Vocabulary& voc) : voc_(voc) {}

  std::string print(const Expr& e) {
    os_.str("");
    emit(e, 0);
    return os_.str();
  }

  void emit(const Expr& e, int minPrec) {
    bool parens = precOf(e) < minPrec;
    if (parens) os_ << "(";
    switch (e.kind) {
      case ExprKind::BoolLit:
        os_ << (e.boolValue ? "true" : "false");
        break;
      case ExprKind::Num:
        os_ << e.num;
        break;
      case ExprKind::ElemLit:
        os_ << elemName(voc_, e.elem);
        break;
      case ExprKind::Var:
        os_ << e.var;
        break;
      case ExprKind::SymApp:
        os_ << voc_.symbol(e.symbol).name;
        emitArgs(e.kids, 0);
        break;
      case ExprKind::IntensionLit:
        os_ << elemName(voc_, DomainElem::intension(e.intension));
        break;
      case ExprKind::ValueApp:
        os_ << "$(";
        emit(e.kids[0], 0);
        os_ << ")";
        emitArgs(e.kids, 1);
        break;
      case ExprKind::Introspect:
        os_ << (e.query == IntrospectQuery::Arity    ? "arity"
                : e.query == IntrospectQuery::Input  ? "input"
                                                     : "output")
            << "(";
        emit(e.kids[0], 0);
        if (e.query == IntrospectQuery::Input) os_ << ", " << e.num;
        os_ << ")";
        break;
      case ExprKind::Not:
        os_ << "~";
        emit(e.kids[0], PrecNot);
        break;
      case ExprKind::And:
        emitBinary(e, "&", PrecAnd);
        break;
      case ExprKind::Or:
        emitBinary(e, "|", PrecOr);
        break;
      case ExprKind::Implies:
        // right associative
        emit(e.kids[0], PrecImplies + 1);
        os_ << " => ";
        emit(e.kids[1], PrecImplies);
        break;
      case ExprKind::Equiv:
        emitBinary(e, "<=>", PrecEquiv);
        break;
      case ExprKind::Eq: emitCmp(e, "="); break;
      case ExprKind::Neq: emitCmp(e, "~="); break;
      case ExprKind::Leq: emitCmp(e, "=<"); break;
      case ExprKind::Lt: emitCmp(e, "<"); break;
      case ExprKind::Geq: emitCmp(e, ">="); break;
      case ExprKind::Gt: emitCmp(e, ">"); break;
      case ExprKind::Quant:
        os_ << (e.quant == QuantKind::Forall ? "!" : "?") << e.var << " in "
            << voc_.typeName(e.range) << ": ";
        emit(e.kids[0], 0);
        break;
      case ExprKind::Count: {
        os_ << "#{";
        for (std::size_t i = 0; i < e.binders.size(); ++i) {
          if (i) os_ << ", ";
          os_ << e.binders[i].var << " in " << voc_.typeName(e.binders[i].range);
        }
        os_ << ": ";
        emit(e.kids[0], 0);
        os_ << "}";
        break;
      }
      case ExprKind::Sum:
        os_ << "sum(lambda " << e.var << " in " << voc_.typeName(e.range) << ": ";
        emit(e.kids[0], 0);
        os_ << ")";
        break;
      case ExprKind::IfGuard: {
        os_ << "if " << e.var << "::[" << voc_.signatureName(e.guardSig) << "] then ";
        emit(e.kids[0], 0);
        os_ << " else ";
        emit(e.kids[1], PrecNot);
        break;
      }
    }
    if (parens) os_ << ")";
  }

 private:
  void emitArgs(const std::vector<Expr>& kids, std::size_t from) {
    os_ << "(";
    for (std::size_t i = from; i < kids.size(); ++i) {
      if (i > from) os_ << ", ";
      emit(kids[i], PrecAtom);  // argument positions re-parse as primaries
    }
    os_ << ")";
  }

  void emitBinary(const Expr& e, const char* op, int prec) {
    emit(e.kids[0], prec);
    os_ << " " << op << " ";
    emit(e.kids[1], prec + 1);
  }

  void emitCmp(const Expr& e, const char* op) {
    emit(e.kids[0], PrecCmp + 1);
    os_ << " " << op << " ";
    emit(e.kids[1], PrecCmp + 1);
  }

  const Vocabulary& voc_;
  std::ostringstream os_;
};

void printTableLiteral(std::ostringstream& os, const TableLiteral& lit) {
  auto raw = [&](const RawElem& e) {
    switch (e.kind) {
      case RawElem::Kind::Int: os << e.num; break;
      case RawElem::Kind::Bool: os << (e.b ? "true" : "false"); break;
      case RawElem::Kind::Name: os << e.name; break;
      case RawElem::Kind::Backtick: os << "`" << e.name; break;
    }
  };
  switch (lit.form) {
    case TableLiteral::Form::Unknown:
      os << "<unknown>";
      return;
    case TableLiteral::Form::Value:
      raw(*lit.value);
      return;
    default:
      break;
  }
  os << "{";
  bool first = true;
  for (const auto& [tuple, value] : lit.entries) {
    if (!first) os << ", ";
    first = false;
    if (tuple.size() == 1) {
      raw(tuple[0]);
    } else {
      os << "(";
      for (std::size_t i = 0; i < tuple.size(); ++i) {
        if (i) os << ",";
        raw(tuple[i]);
      }
      os << ")";
    }
    if (value) {
      os << " -> ";
      raw(*value);
    }
  }
  os << "}";
  if (lit.elseValue) {
    os << " else ";
    raw(*lit.elseValue);
  }
}

}  // namespace

std::string prettyPrint(const Vocabulary& voc, const Expr& e) {
  return Printer(voc).print(e);
}

std::string prettyPrint(const Vocabulary& voc) {
  std::ostringstream os;
  os << "vocabulary";
  if (!voc.name.empty()) os << " " << voc.name;
  os << " {\n";
  for (std::int32_t i = kNumBuiltinTypes; i < static_cast<std::int32_t>(voc.types().size());
       ++i) {
    const TypeSymbol& t = voc.types()[i];
    if (t.isSubtype()) continue;  // structural, not declared
    os << "  type " << t.name;
    if (auto* c = std::get_if<CustomInterp>(&t.interp)) {
      if (!c->ctors.empty()) {
        os << " := {";
        for (std::size_t k = 0; k < c->ctors.size(); ++k)
          os << (k ? ", " : "") << c->ctors[k];
        os << "}";
      }
    } else if (auto* ii = std::get_if<IntInterp>(&t.interp)) {
      os << " := Int";
      if (ii->bounds) os << "[" << ii->bounds->lo << ".." << ii->bounds->hi << "]";
    }
    os << "\n";
  }
  for (const auto& s : voc.symbols())
    os << "  " << s.name << " : " << voc.signatureName(s.sig) << "\n";
  os << "}\n";
  return os.str();
}

std::string prettyPrint(const Vocabulary& voc, const Theory& th) {
  std::ostringstream os;
  os << "theory";
  if (!th.name.empty()) os << " " << th.name;
  if (!th.vocName.empty()) os << " : " << th.vocName;
  os << " {\n";
  for (const auto& a : th.assignments) {
    os << "  " << voc.symbol(a.symbol).name << " := ";
    printTableLiteral(os, a.table);
    os << ".\n";
  }
  for (const auto& d : th.definitions) {
    os << "  {\n";
    for (const auto& r : d.rules) {
      os << "    ";
      if (!r.headVars.empty()) {
        os << "!";
        for (std::size_t i = 0; i < r.headVars.size(); ++i)
          os << (i ? ", " : "") << r.headVars[i].var << " in "
             << voc.typeName(r.headVars[i].range);
        os << ": ";
      }
      os << voc.symbol(r.symbol).name << "(";
      for (std::size_t i = 0; i < r.headVars.size(); ++i)
        os << (i ? ", " : "") << r.headVars[i].var;
      os << ")";
      if (r.outTerm) os << " = " << prettyPrint(voc, *r.outTerm);
      bool trivialBody = r.body.kind == ExprKind::BoolLit && r.body.boolValue;
      if (!trivialBody) os << " <- " << prettyPrint(voc, r.body);
      os << ".\n";
    }
    os << "  }\n";
  }
  for (const auto& ax : th.axioms) os << "  " << prettyPrint(voc, ax) << ".\n";
  os << "}\n";
  return os.str();
}

std::string prettyPrint(const SourceFile& file) {
  std::ostringstream os;
  if (file.hasVocabulary) os << prettyPrint(file.vocabulary);
  for (const auto& th : file.theories) os << prettyPrint(file.vocabulary, th);
  for (const auto& st : file.structures) {
    os << "structure";
    if (!st.name.empty()) os << " " << st.name;
    if (!st.vocName.empty()) os << " : " << st.vocName;
    os << " {\n";
    for (const auto& a : st.assignments) {
      os << "  " << file.vocabulary.symbol(a.symbol).name << " := ";
      printTableLiteral(os, a.table);
      os << ".\n";
    }
    os << "}\n";
  }
  return os.str();
}

}  // namespace foc
