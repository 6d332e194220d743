#include <gtest/gtest.h>

#include "bla/lattice.hpp"

using namespace bla;

namespace {

LatticeElement ints(std::initializer_list<std::uint64_t> xs) { return LatticeElement::of_integers(xs); }

LatticeElement from_mask(unsigned mask) {
  LatticeElement e;
  for (unsigned i = 0; i < 4; ++i)
    if (mask & (1u << i)) e.insert(Atom::integer(i + 1));
  return e;
}

}  // namespace

TEST(Lattice, JoinExamples) {
  EXPECT_EQ(join(ints({1}), ints({2, 3})), ints({1, 2, 3}));
  auto x = ints({4, 7});
  EXPECT_EQ(join(x, x), x);
  EXPECT_EQ(join(x, LatticeElement{}), x);
}

TEST(Lattice, LeqExamples) {
  EXPECT_TRUE(leq(ints({1}), ints({1, 3, 4})));
  EXPECT_FALSE(leq(ints({2}), ints({3})));
  auto x = ints({5, 9});
  EXPECT_TRUE(leq(x, x));
}

TEST(Lattice, ComparableExamples) {
  EXPECT_TRUE(comparable(ints({1}), ints({1, 2})));
  EXPECT_FALSE(comparable(ints({1}), ints({2})));
  EXPECT_FALSE(comparable(ints({1, 2}), ints({2, 3})));
}

TEST(Lattice, JoinAllExamples) {
  EXPECT_EQ(join_all({ints({1}), ints({2}), ints({3})}), ints({1, 2, 3}));
  EXPECT_EQ(join_all({}), LatticeElement{});
  EXPECT_EQ(join_all({ints({1, 2}), ints({2})}), ints({1, 2}));
}

// Every pair of subsets of a 4-atom universe against bitmask arithmetic.
TEST(Lattice, ExhaustiveAgainstBitmasks) {
  for (unsigned a = 0; a < 16; ++a)
    for (unsigned b = 0; b < 16; ++b) {
      auto x = from_mask(a), y = from_mask(b);
      ASSERT_EQ(join(x, y), from_mask(a | b));
      ASSERT_EQ(leq(x, y), (a & ~b) == 0u);
      ASSERT_EQ(comparable(x, y), (a & ~b) == 0u || (b & ~a) == 0u);
      ASSERT_EQ(join(x, y), join(y, x));
      for (unsigned c = 0; c < 16; ++c) {
        auto z = from_mask(c);
        ASSERT_EQ(join(join(x, y), z), join(x, join(y, z)));
      }
      ASSERT_TRUE(leq(x, join(x, y)));
    }
}

TEST(Lattice, AtomOrderIsCanonical) {
  EXPECT_LT(Atom::integer(9), Atom::integer(10));
  EXPECT_LT(Atom::text("b"), Atom::text("aa"));
  LatticeElement e{Atom::integer(10), Atom::integer(2), Atom::integer(2)};
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e.atoms().front(), Atom::integer(2));
}

TEST(Lattice, EncodeRoundTrip) {
  LatticeElement e{Atom::text("x"), Atom(Bytes{0, 255, 7}), Atom::integer(3)};
  auto bytes = e.encode();
  EXPECT_EQ(LatticeElement::decode(view(bytes)), e);
}

TEST(Lattice, DecodeRejectsNonCanonical) {
  ByteWriter w;
  w.u32(2);
  Atom::integer(2).encode(w);
  Atom::integer(1).encode(w);
  EXPECT_THROW(LatticeElement::decode(view(w.data())), DecodeError);
}

TEST(Lattice, WrappedAtomRoundTrip) {
  WrappedAtom w{3, ints({1, 2})};
  auto back = WrappedAtom::from_atom(w.to_atom());
  ASSERT_TRUE(back);
  EXPECT_EQ(*back, w);
  EXPECT_FALSE(WrappedAtom::from_atom(Atom::text("x")));
}

TEST(Lattice, AllowedProposals) {
  auto e = AllowedProposals::integer_singletons(4);
  EXPECT_TRUE(e.admits(ints({4})));
  EXPECT_FALSE(e.admits(ints({5})));
  EXPECT_FALSE(e.admits(ints({1, 2})));
  auto w = AllowedProposals::wrapped(4, AllowedProposals::max_size(1));
  EXPECT_TRUE(w.admits_atom(WrappedAtom{2, ints({9})}.to_atom()));
  EXPECT_FALSE(w.admits_atom(WrappedAtom{5, ints({9})}.to_atom()));
  EXPECT_FALSE(w.admits_atom(WrappedAtom{2, ints({1, 9})}.to_atom()));
  EXPECT_FALSE(w.admits_atom(Atom::integer(1)));
}
