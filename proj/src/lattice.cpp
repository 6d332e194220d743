#include "bla/lattice.hpp"

#include <algorithm>
#include <set>

namespace bla {

std::strong_ordering operator<=>(const Atom& a, const Atom& b) {
  if (auto c = a.payload_.size() <=> b.payload_.size(); c != 0) return c;
  return a.payload_ <=> b.payload_;
}

std::optional<std::uint64_t> Atom::as_integer() const {
  if (payload_.empty() || payload_.size() > 19) return std::nullopt;
  if (payload_.size() > 1 && payload_[0] == '0') return std::nullopt;
  std::uint64_t v = 0;
  for (auto c : payload_) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

std::string Atom::display() const {
  bool printable = std::all_of(payload_.begin(), payload_.end(),
                               [](std::uint8_t c) { return c >= 0x20 && c < 0x7f; });
  if (printable) return {payload_.begin(), payload_.end()};
  return "0x" + to_hex(view(payload_));
}

Atom Atom::decode(ByteReader& r) {
  auto b = r.bytes();
  return Atom(Bytes(b.begin(), b.end()));
}

LatticeElement::LatticeElement(std::initializer_list<Atom> atoms)
    : LatticeElement(std::vector<Atom>(atoms)) {}

LatticeElement::LatticeElement(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  std::sort(atoms_.begin(), atoms_.end());
  atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
}

LatticeElement LatticeElement::of_integers(std::initializer_list<std::uint64_t> xs) {
  std::vector<Atom> atoms;
  for (auto x : xs) atoms.push_back(Atom::integer(x));
  return LatticeElement(std::move(atoms));
}

bool LatticeElement::contains(const Atom& a) const {
  return std::binary_search(atoms_.begin(), atoms_.end(), a);
}

void LatticeElement::insert(const Atom& a) {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a);
  if (it == atoms_.end() || *it != a) atoms_.insert(it, a);
}

void LatticeElement::encode(ByteWriter& w) const {
  w.u32(static_cast<std::uint32_t>(atoms_.size()));
  for (const auto& a : atoms_) a.encode(w);
}

Bytes LatticeElement::encode() const {
  ByteWriter w;
  encode(w);
  return w.take();
}

LatticeElement LatticeElement::decode(ByteReader& r) {
  auto n = r.count(4);
  std::vector<Atom> atoms;
  atoms.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    atoms.push_back(Atom::decode(r));
    if (i > 0 && !(atoms[i - 1] < atoms[i])) throw DecodeError("non-canonical element");
  }
  LatticeElement e;
  e.atoms_ = std::move(atoms);
  return e;
}

LatticeElement LatticeElement::decode(BytesView b) {
  ByteReader r(b);
  auto e = decode(r);
  r.expect_done();
  return e;
}

LatticeElement join(const LatticeElement& a, const LatticeElement& b) {
  std::vector<Atom> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return LatticeElement(std::move(out));
}

bool leq(const LatticeElement& a, const LatticeElement& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool comparable(const LatticeElement& a, const LatticeElement& b) {
  return leq(a, b) || leq(b, a);
}

LatticeElement join_all(const std::vector<LatticeElement>& vs) {
  LatticeElement acc;
  for (const auto& v : vs) acc = join(acc, v);
  return acc;
}

Atom WrappedAtom::to_atom() const {
  ByteWriter w;
  w.u32(pid);
  value.encode(w);
  return Atom(w.take());
}

std::optional<WrappedAtom> WrappedAtom::from_atom(const Atom& a) {
  try {
    ByteReader r(view(a.payload()));
    WrappedAtom out;
    out.pid = r.u32();
    out.value = LatticeElement::decode(r);
    r.expect_done();
    return out;
  } catch (const DecodeError&) {
    return std::nullopt;
  }
}

AllowedProposals AllowedProposals::any() {
  return {"any", [](const LatticeElement&) { return true; }};
}

AllowedProposals AllowedProposals::finite(std::vector<LatticeElement> members) {
  std::set<LatticeElement> set(members.begin(), members.end());
  return {"finite", [set = std::move(set)](const LatticeElement& e) { return set.count(e) > 0; }};
}

AllowedProposals AllowedProposals::max_size(std::size_t k) {
  return {"max_size(" + std::to_string(k) + ")",
          [k](const LatticeElement& e) { return e.size() <= k; }};
}

AllowedProposals AllowedProposals::integer_singletons(std::uint64_t n) {
  return {"singletons(1.." + std::to_string(n) + ")", [n](const LatticeElement& e) {
            if (e.size() != 1) return false;
            auto v = e.atoms().front().as_integer();
            return v && *v >= 1 && *v <= n;
          }};
}

AllowedProposals AllowedProposals::wrapped(std::uint32_t n, AllowedProposals inner) {
  auto name = "wrapped(" + inner.name() + ")";
  return {std::move(name), [n, inner = std::move(inner)](const LatticeElement& e) {
            if (e.size() != 1) return false;
            auto w = WrappedAtom::from_atom(e.atoms().front());
            return w && w->pid >= 1 && w->pid <= n && inner.admits(w->value);
          }};
}

nlohmann::json to_json(const LatticeElement& e) {
  auto arr = nlohmann::json::array();
  for (const auto& a : e) arr.push_back(a.display());
  return arr;
}

}  // namespace bla
