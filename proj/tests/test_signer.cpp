#include <gtest/gtest.h>

#include "bla/signer.hpp"

using namespace bla;

class SignerTest : public ::testing::TestWithParam<SignerBackend> {};

TEST_P(SignerTest, RoundTrip) {
  KeyRegistry reg(4, 7, GetParam());
  auto sig = reg.sign(reg.issue(1), view("x"));
  EXPECT_TRUE(reg.verify(view("x"), sig));
}

TEST_P(SignerTest, WrongKey) {
  KeyRegistry reg(4, 7, GetParam());
  auto sig = reg.sign(reg.issue(1), view("x"));
  sig.signer = 2;
  EXPECT_FALSE(reg.verify(view("x"), sig));
}

TEST_P(SignerTest, WrongMessage) {
  KeyRegistry reg(4, 7, GetParam());
  auto sig = reg.sign(reg.issue(1), view("x"));
  EXPECT_FALSE(reg.verify(view("y"), sig));
}

TEST_P(SignerTest, DeterministicKeysAndSignatures) {
  KeyRegistry a(4, 11, GetParam()), b(4, 11, GetParam()), c(4, 12, GetParam());
  EXPECT_EQ(a.public_key(3), b.public_key(3));
  EXPECT_NE(a.public_key(3), c.public_key(3));
  EXPECT_EQ(a.sign(a.issue(2), view("m")), b.sign(b.issue(2), view("m")));
  EXPECT_NE(a.public_key(1), a.public_key(2));
}

TEST_P(SignerTest, ForeignRegistryRejects) {
  KeyRegistry a(4, 1, GetParam()), b(4, 2, GetParam());
  auto sig = a.sign(a.issue(1), view("m"));
  EXPECT_FALSE(b.verify(view("m"), sig));
}

TEST_P(SignerTest, TamperedBindingRejected) {
  KeyRegistry reg(4, 3, GetParam());
  auto sig = reg.sign(reg.issue(4), view("payload"));
  sig.binding[0] ^= 1;
  EXPECT_FALSE(reg.verify(view("payload"), sig));
  sig.signer = 9;
  EXPECT_FALSE(reg.verify(view("payload"), sig));
}

TEST_P(SignerTest, SignatureEncoding) {
  KeyRegistry reg(2, 5, GetParam());
  auto sig = reg.sign(reg.issue(2), view("z"));
  ByteWriter w;
  sig.encode(w);
  ByteReader r(view(w.data()));
  EXPECT_EQ(Signature::decode(r), sig);
}

INSTANTIATE_TEST_SUITE_P(Backends, SignerTest,
                         ::testing::Values(SignerBackend::mock, SignerBackend::ed25519),
                         [](const auto& info) { return info.param == SignerBackend::mock ? "mock" : "ed25519"; });
