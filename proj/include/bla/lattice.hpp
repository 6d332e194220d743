#pragma once

#include <compare>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bla/common.hpp"

namespace bla {

// An element of E. Ordered by canonical encoding: length first, then bytes,
// so decimal integer atoms sort numerically.
class Atom {
 public:
  Atom() = default;
  explicit Atom(Bytes payload) : payload_(std::move(payload)) {}

  static Atom text(std::string_view s) { return Atom(Bytes(s.begin(), s.end())); }
  static Atom integer(std::uint64_t v) { return text(std::to_string(v)); }

  const Bytes& payload() const { return payload_; }
  std::optional<std::uint64_t> as_integer() const;
  // Printable payloads render as text, anything else as 0x-prefixed hex.
  std::string display() const;

  void encode(ByteWriter& w) const { w.bytes(view(payload_)); }
  static Atom decode(ByteReader& r);

  friend bool operator==(const Atom&, const Atom&) = default;
  friend std::strong_ordering operator<=>(const Atom& a, const Atom& b);

 private:
  Bytes payload_;
};

class LatticeElement {
 public:
  LatticeElement() = default;
  LatticeElement(std::initializer_list<Atom> atoms);
  explicit LatticeElement(std::vector<Atom> atoms);

  static LatticeElement of_integers(std::initializer_list<std::uint64_t> xs);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  std::size_t height() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  bool contains(const Atom& a) const;
  void insert(const Atom& a);

  auto begin() const { return atoms_.begin(); }
  auto end() const { return atoms_.end(); }

  void encode(ByteWriter& w) const;
  Bytes encode() const;
  static LatticeElement decode(ByteReader& r);
  static LatticeElement decode(BytesView b);

  friend bool operator==(const LatticeElement&, const LatticeElement&) = default;
  friend auto operator<=>(const LatticeElement& a, const LatticeElement& b) {
    return a.atoms_ <=> b.atoms_;
  }

 private:
  std::vector<Atom> atoms_;
};

LatticeElement join(const LatticeElement& a, const LatticeElement& b);
bool leq(const LatticeElement& a, const LatticeElement& b);
bool comparable(const LatticeElement& a, const LatticeElement& b);
LatticeElement join_all(const std::vector<LatticeElement>& vs);

// One pair (pid, value) of the product used by the arbitrary-lattice wrapper.
struct WrappedAtom {
  ProcessId pid = 0;
  LatticeElement value;

  Atom to_atom() const;
  static std::optional<WrappedAtom> from_atom(const Atom& a);

  friend bool operator==(const WrappedAtom&, const WrappedAtom&) = default;
};

// Membership predicate for allowed proposal values. Atom-level checks are used
// by protocols whose values are single atoms.
class AllowedProposals {
 public:
  using Pred = std::function<bool(const LatticeElement&)>;

  AllowedProposals(std::string name, Pred pred)
      : name_(std::move(name)), pred_(std::make_shared<Pred>(std::move(pred))) {}

  static AllowedProposals any();
  static AllowedProposals finite(std::vector<LatticeElement> members);
  static AllowedProposals max_size(std::size_t k);
  // Singletons {1}, ..., {n} of integer atoms.
  static AllowedProposals integer_singletons(std::uint64_t n);
  // Singletons of wrapped atoms (pid, y) with pid in [1,n] and y admitted by inner.
  static AllowedProposals wrapped(std::uint32_t n, AllowedProposals inner);

  bool admits(const LatticeElement& e) const { return (*pred_)(e); }
  bool admits_atom(const Atom& a) const { return admits(LatticeElement{a}); }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::shared_ptr<const Pred> pred_;
};

nlohmann::json to_json(const LatticeElement& e);

}  // namespace bla
