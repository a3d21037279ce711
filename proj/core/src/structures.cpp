#include "foc/structures.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace foc {

Universe Universe::build(const Vocabulary& voc) {
  Universe u;
  u.voc_ = &voc;
  const auto& types = voc.types();
  u.domains_.resize(types.size());
  u.index_.resize(types.size());

  auto concepts = conceptDomain(voc);

  for (std::int32_t i = 0; i < static_cast<std::int32_t>(types.size()); ++i) {
    const TypeSymbol& t = types[i];
    std::vector<DomainElem> dom;
    if (t.isBool()) {
      dom = {DomainElem::boolean(false), DomainElem::boolean(true)};
    } else if (t.isIntLike()) {
      const auto& bounds = std::get<IntInterp>(t.interp).bounds;
      if (!bounds) continue;  // unbounded: no finite domain
      dom.reserve(bounds->size());
      for (std::int64_t v = bounds->lo; v <= bounds->hi; ++v)
        dom.push_back(DomainElem::integer(v));
    } else if (t.isConcept()) {
      for (ConceptRef c : concepts) dom.push_back(DomainElem::intension(c));
    } else if (t.isCustom()) {
      const auto& ctors = std::get<CustomInterp>(t.interp).ctors;
      for (int k = 0; k < static_cast<int>(ctors.size()); ++k)
        dom.push_back(DomainElem::named(TypeId{i}, k));
    } else {  // subtype
      const Signature& sig = std::get<SubtypeInterp>(t.interp).sig;
      for (ConceptRef c : concepts)
        if (conceptSignature(voc, c) == sig) dom.push_back(DomainElem::intension(c));
    }
    for (int k = 0; k < static_cast<int>(dom.size()); ++k) u.index_[i][dom[k]] = k;
    u.domains_[i] = std::move(dom);
  }
  return u;
}

bool Universe::hasDomain(TypeId t) const {
  return t.v < static_cast<std::int32_t>(domains_.size()) && domains_[t.v].has_value();
}

const std::vector<DomainElem>& Universe::domain(TypeId t) const {
  if (t.v >= static_cast<std::int32_t>(domains_.size()))
    throw FocError("InternalError", "type '" + voc_->typeName(t) +
                                        "' was declared after this universe was built");
  if (!domains_[t.v])
    throw FocError("UnboundedInt", "type '" + voc_->typeName(t) +
                                       "' has no finite domain; declare bounds");
  return *domains_[t.v];
}

std::int64_t Universe::size(TypeId t) const {
  return static_cast<std::int64_t>(domain(t).size());
}

int Universe::indexOf(TypeId t, const DomainElem& e) const {
  if (t.v >= static_cast<std::int32_t>(domains_.size()) || !domains_[t.v]) return -1;
  auto it = index_[t.v].find(e);
  return it == index_[t.v].end() ? -1 : it->second;
}

TupleSpace::TupleSpace(const Universe& u, const Signature& sig)
    : u_(&u), args_(sig.args) {
  for (TypeId t : args_) count_ *= u.size(t);
}

std::vector<DomainElem> TupleSpace::tuple(std::int64_t rank) const {
  std::vector<DomainElem> out(args_.size(), DomainElem::boolean(false));
  for (int i = static_cast<int>(args_.size()) - 1; i >= 0; --i) {
    const auto& dom = u_->domain(args_[i]);
    std::int64_t n = static_cast<std::int64_t>(dom.size());
    out[i] = dom[rank % n];
    rank /= n;
  }
  return out;
}

std::int64_t TupleSpace::rank(std::span<const DomainElem> tuple) const {
  std::int64_t r = 0;
  for (std::size_t i = 0; i < args_.size(); ++i) {
    int idx = u_->indexOf(args_[i], tuple[i]);
    if (idx < 0) return -1;
    r = r * u_->size(args_[i]) + idx;
  }
  return r;
}

Structure makeStructure(const Vocabulary& voc, std::string name) {
  Structure s;
  s.voc = &voc;
  s.name = std::move(name);
  s.universe = Universe::build(voc);
  s.interp = Interp(voc.symbols().size());
  return s;
}

bool isTotal(const Structure& s) {
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(s.voc->symbols().size()); ++i)
    if (!s.interp.has(SymId{i})) return false;
  return true;
}

namespace {

// |outDomain|^|argDomain| with overflow clamped to cap+1.
std::int64_t powClamped(std::int64_t base, std::int64_t exp, std::int64_t cap) {
  std::int64_t r = 1;
  for (std::int64_t i = 0; i < exp; ++i) {
    if (r > cap) return cap + 1;
    r *= base;
  }
  return r;
}

}  // namespace

std::int64_t expansionCount(const Structure& s, std::int64_t cap) {
  std::int64_t total = 1;
  const Vocabulary& voc = *s.voc;
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(voc.symbols().size()); ++i) {
    SymId sym{i};
    if (s.interp.has(sym)) continue;
    const Signature& sig = voc.symbol(sym).sig;
    TupleSpace ts(s.universe, sig);
    std::int64_t outN = s.universe.size(sig.out);
    std::int64_t n = powClamped(outN, ts.count(), cap);
    if (n > cap || total > cap / std::max<std::int64_t>(n, 1))
      throw FocError("CombinatorialLimit",
                     "expansion count exceeds cap " + std::to_string(cap));
    total *= n;
  }
  return total;
}

ExpansionStream::ExpansionStream(const Structure& base, std::int64_t cap) : base_(&base) {
  expansionCount(base, cap);  // raises on unbounded/oversized spaces
  const Vocabulary& voc = *base.voc;
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(voc.symbols().size()); ++i) {
    SymId sym{i};
    if (base.interp.has(sym)) continue;
    open_.push_back(sym);
    const Signature& sig = voc.symbol(sym).sig;
    TupleSpace ts(base.universe, sig);
    outSize_.push_back(base.universe.size(sig.out));
    Table t;
    t.out.assign(ts.count(), base.universe.domain(sig.out)[0]);
    current_.push_back(std::move(t));
  }
}

std::optional<Structure> ExpansionStream::next() {
  if (done_) return std::nullopt;
  if (!first_) {
    // Odometer increment, last symbol's last tuple least significant.
    bool carried = true;
    for (int si = static_cast<int>(open_.size()) - 1; carried && si >= 0; --si) {
      const auto& dom = base_->universe.domain(base_->voc->symbol(open_[si]).sig.out);
      auto& cells = current_[si].out;
      for (int ci = static_cast<int>(cells.size()) - 1; carried && ci >= 0; --ci) {
        int idx = base_->universe.indexOf(base_->voc->symbol(open_[si]).sig.out, cells[ci]);
        if (idx + 1 < static_cast<int>(dom.size())) {
          cells[ci] = dom[idx + 1];
          carried = false;
        } else {
          cells[ci] = dom[0];
        }
      }
    }
    if (carried) {
      done_ = true;
      return std::nullopt;
    }
  }
  first_ = false;
  Structure out = *base_;
  for (std::size_t si = 0; si < open_.size(); ++si) out.interp.set(open_[si], current_[si]);
  return out;
}

// ---------------------------------------------------------------------------
// Table literal resolution
// ---------------------------------------------------------------------------

namespace {

std::optional<DomainElem> resolveElem(const Vocabulary& voc, const Universe& u, TypeId want,
                                      const RawElem& raw, DiagnosticSink& diags) {
  DomainElem e = DomainElem::boolean(false);
  switch (raw.kind) {
    case RawElem::Kind::Int:
      e = DomainElem::integer(raw.num);
      break;
    case RawElem::Kind::Bool:
      e = DomainElem::boolean(raw.b);
      break;
    case RawElem::Kind::Name: {
      auto ctor = voc.findCtor(raw.name);
      if (!ctor) {
        diags.error(raw.span, "UnknownElement",
                    "'" + raw.name + "' is not a constructor of any declared type");
        return std::nullopt;
      }
      e = DomainElem::named(ctor->first, ctor->second);
      break;
    }
    case RawElem::Kind::Backtick: {
      if (auto s = voc.findSymbol(raw.name)) {
        e = DomainElem::intension(ConceptRef::symbol(*s));
      } else if (auto t = voc.findType(raw.name)) {
        e = DomainElem::intension(ConceptRef::type(*t));
      } else {
        diags.error(raw.span, "UnknownElement", "unknown symbol '`" + raw.name + "'");
        return std::nullopt;
      }
      break;
    }
  }
  // Unbounded Int output positions accept any integer.
  const TypeSymbol& t = voc.type(want);
  if (t.isIntLike() && !std::get<IntInterp>(t.interp).bounds) {
    if (e.kind() != DomainElem::Kind::Int) {
      diags.error(raw.span, "TypeMismatch",
                  "value is not an integer for type '" + t.name + "'");
      return std::nullopt;
    }
    return e;
  }
  if (u.indexOf(want, e) < 0) {
    diags.error(raw.span, "TypeMismatch", "value '" + elemName(voc, e) +
                                              "' is not in the domain of type '" +
                                              t.name + "'");
    return std::nullopt;
  }
  return e;
}

std::optional<Table> resolveTable(const Vocabulary& voc, const Universe& u, SymId sym,
                                  const TableLiteral& lit, DiagnosticSink& diags) {
  const SymbolDecl& decl = voc.symbol(sym);
  const Signature& sig = decl.sig;
  TupleSpace ts(u, sig);
  bool pred = sig.out == kBoolType;

  if (lit.form == TableLiteral::Form::Unknown) return std::nullopt;

  if (lit.form == TableLiteral::Form::Value) {
    if (sig.arity() != 0) {
      diags.error(lit.span, "TypeMismatch",
                  "plain value assignment needs a nullary symbol; '" + decl.name +
                      "' has arity " + std::to_string(sig.arity()));
      return std::nullopt;
    }
    auto v = resolveElem(voc, u, sig.out, *lit.value, diags);
    if (!v) return std::nullopt;
    Table t;
    t.out = {*v};
    return t;
  }

  Table t;
  std::vector<bool> seen(ts.count(), false);
  if (pred) {
    t.out.assign(ts.count(), DomainElem::boolean(false));
  } else {
    t.out.assign(ts.count(), DomainElem::boolean(false));  // placeholder until filled
  }

  for (const auto& [tupleRaw, valueRaw] : lit.entries) {
    if (static_cast<int>(tupleRaw.size()) != sig.arity()) {
      diags.error(lit.span, "ArityMismatch",
                  "tuple of length " + std::to_string(tupleRaw.size()) + " for '" +
                      decl.name + "' of arity " + std::to_string(sig.arity()));
      return std::nullopt;
    }
    std::vector<DomainElem> tuple;
    bool ok = true;
    for (std::size_t i = 0; i < tupleRaw.size(); ++i) {
      auto e = resolveElem(voc, u, sig.args[i], tupleRaw[i], diags);
      if (!e) {
        ok = false;
        break;
      }
      tuple.push_back(*e);
    }
    if (!ok) return std::nullopt;
    std::int64_t r = ts.rank(tuple);
    if (r < 0) return std::nullopt;
    if (seen[r])
      diags.warning(lit.span, "DuplicateEntry",
                    "tuple listed twice in the table of '" + decl.name + "'");
    seen[r] = true;
    if (pred && !valueRaw) {
      t.out[r] = DomainElem::boolean(true);
    } else if (valueRaw) {
      auto v = resolveElem(voc, u, sig.out, *valueRaw, diags);
      if (!v) return std::nullopt;
      t.out[r] = *v;
    } else {
      diags.error(lit.span, "TotalityError",
                  "function table entry for '" + decl.name + "' lacks a value");
      return std::nullopt;
    }
  }

  if (!pred || lit.elseValue) {
    std::optional<DomainElem> dflt;
    if (lit.elseValue) {
      dflt = resolveElem(voc, u, sig.out, *lit.elseValue, diags);
      if (!dflt) return std::nullopt;
    } else if (pred) {
      dflt = DomainElem::boolean(false);
    }
    for (std::int64_t r = 0; r < ts.count(); ++r) {
      if (seen[r]) continue;
      if (!dflt) {
        std::ostringstream os;
        os << "table for '" << decl.name << "' omits a tuple (";
        auto tup = ts.tuple(r);
        for (std::size_t i = 0; i < tup.size(); ++i)
          os << (i ? "," : "") << elemName(voc, tup[i]);
        os << ") and has no else default";
        diags.error(lit.span, "TotalityError", os.str());
        return std::nullopt;
      }
      t.out[r] = *dflt;
    }
  }
  return t;
}

}  // namespace

void mergeAssignments(Structure& s, std::span<const AssignmentStmt> assigns,
                      DiagnosticSink& diags) {
  for (const auto& a : assigns) {
    auto t = resolveTable(*s.voc, s.universe, a.symbol, a.table, diags);
    if (!t) continue;
    if (s.interp.has(a.symbol)) {
      if (!(s.interp.table(a.symbol) == *t))
        diags.error(a.span, "ConflictError",
                    "symbol '" + s.voc->symbol(a.symbol).name +
                        "' already has a different table");
      continue;
    }
    s.interp.set(a.symbol, std::move(*t));
  }
}

Structure resolveStructure(const Vocabulary& voc, const StructureDecl& decl,
                           DiagnosticSink& diags) {
  Structure s = makeStructure(voc, decl.name.empty() ? "S" : decl.name);
  mergeAssignments(s, decl.assignments, diags);
  return s;
}

// ---------------------------------------------------------------------------
// Canonical save / load / JSON
// ---------------------------------------------------------------------------

std::string saveStructure(const Structure& s) {
  const Vocabulary& voc = *s.voc;
  std::ostringstream os;
  os << "structure " << s.name << " : " << (voc.name.empty() ? "V" : voc.name) << " {\n";
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(voc.symbols().size()); ++i) {
    SymId sym{i};
    const SymbolDecl& d = voc.symbol(sym);
    os << "  " << d.name << " := ";
    if (!s.interp.has(sym)) {
      os << "<unknown>.\n";
      continue;
    }
    const Table& t = s.interp.table(sym);
    bool pred = d.sig.out == kBoolType;
    if (d.sig.arity() == 0) {
      os << elemName(voc, t.out[0]) << ".\n";
      continue;
    }
    TupleSpace ts(s.universe, d.sig);
    os << "{";
    bool innerFirst = true;
    for (std::int64_t r = 0; r < ts.count(); ++r) {
      if (pred && !t.out[r].asBool()) continue;
      if (!innerFirst) os << ", ";
      innerFirst = false;
      auto tup = ts.tuple(r);
      if (tup.size() == 1) {
        os << elemName(voc, tup[0]);
      } else {
        os << "(";
        for (std::size_t k = 0; k < tup.size(); ++k)
          os << (k ? "," : "") << elemName(voc, tup[k]);
        os << ")";
      }
      if (!pred) os << " -> " << elemName(voc, t.out[r]);
    }
    os << "}.\n";
  }
  os << "}\n";
  return os.str();
}

std::string structureToJson(const Structure& s) {
  const Vocabulary& voc = *s.voc;
  nlohmann::json j;
  j["name"] = s.name;
  j["vocabulary"] = voc.name;
  nlohmann::json tables = nlohmann::json::object();
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(voc.symbols().size()); ++i) {
    SymId sym{i};
    const SymbolDecl& d = voc.symbol(sym);
    if (!s.interp.has(sym)) {
      tables[d.name] = nullptr;
      continue;
    }
    const Table& t = s.interp.table(sym);
    TupleSpace ts(s.universe, d.sig);
    nlohmann::json entries = nlohmann::json::array();
    for (std::int64_t r = 0; r < ts.count(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      nlohmann::json args = nlohmann::json::array();
      for (const auto& e : ts.tuple(r)) args.push_back(elemName(voc, e));
      row.push_back(args);
      row.push_back(elemName(voc, t.out[r]));
      entries.push_back(row);
    }
    tables[d.name] = entries;
  }
  j["tables"] = tables;
  return j.dump(2);
}

}  // namespace foc
