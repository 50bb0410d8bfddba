//
// Copyright 2026 The dpls Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpls/paillier.h"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"

namespace dpls {
namespace paillier {
namespace {

class PaillierTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    BigRandom rng(uint64_t{101});
    key_ = new Keypair(*KeyGen(512, rng));
  }
  static void TearDownTestSuite() { delete key_; }

  static Keypair* key_;
};
Keypair* PaillierTest::key_ = nullptr;

TEST_F(PaillierTest, KeyShape) {
  const Keypair& k = *key_;
  EXPECT_EQ(mpz_sizeinbase(k.pk.n.get_mpz_t(), 2), 512u);
  EXPECT_EQ(k.sk.p * k.sk.q, k.pk.n);
  EXPECT_NE(k.sk.p, k.sk.q);
  EXPECT_NE(mpz_probab_prime_p(k.sk.p.get_mpz_t(), 30), 0);
  EXPECT_NE(mpz_probab_prime_p(k.sk.q.get_mpz_t(), 30), 0);
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), k.pk.n.get_mpz_t(),
          mpz_class((k.sk.p - 1) * (k.sk.q - 1)).get_mpz_t());
  EXPECT_EQ(g, 1);
}

TEST_F(PaillierTest, RoundTripEdgeValues) {
  BigRandom rng(uint64_t{1});
  const mpz_class n = key_->pk.n;
  for (const mpz_class& m : {mpz_class(0), mpz_class(1), mpz_class(n - 1),
                             mpz_class(n / 2), mpz_class(12345)}) {
    auto c = Encrypt(key_->pk, m, rng);
    ASSERT_TRUE(c.ok());
    EXPECT_EQ(*Decrypt(*key_, *c), m);
  }
}

TEST_F(PaillierTest, RandomRoundTrips) {
  BigRandom rng(uint64_t{2});
  for (int t = 0; t < 200; ++t) {
    const mpz_class m = rng.Below(key_->pk.n);
    EXPECT_EQ(*Decrypt(*key_, *Encrypt(key_->pk, m, rng)), m);
  }
}

TEST_F(PaillierTest, EncryptionIsRandomized) {
  BigRandom rng(uint64_t{3});
  auto a = *Encrypt(key_->pk, mpz_class(7), rng);
  auto b = *Encrypt(key_->pk, mpz_class(7), rng);
  EXPECT_NE(a.value, b.value);
  EXPECT_EQ(*Decrypt(*key_, a), *Decrypt(*key_, b));
}

TEST_F(PaillierTest, Homomorphisms) {
  BigRandom rng(uint64_t{4});
  const PublicKey& pk = key_->pk;
  auto five = *Encrypt(pk, mpz_class(5), rng);
  auto seven = *Encrypt(pk, mpz_class(7), rng);
  EXPECT_EQ(*Decrypt(*key_, *HomAdd(pk, five, seven)), 12);
  auto three = *Encrypt(pk, mpz_class(3), rng);
  EXPECT_EQ(*Decrypt(*key_, *HomScale(pk, three, mpz_class(4))), 12);

  // (E(a) E(-b))^k = E(k (a - b)) mod N.
  const mpz_class a = 1000, b = 1234, k = 97;
  auto diff = *HomAdd(pk, *Encrypt(pk, a, rng), *Encrypt(pk, pk.n - b, rng));
  const mpz_class got = *Decrypt(*key_, *HomScale(pk, diff, k));
  EXPECT_EQ(got, pk.n - k * (b - a));

  // Addition wraps mod N.
  auto wrap = *HomAdd(pk, *Encrypt(pk, pk.n - 1, rng), *Encrypt(pk, 2, rng));
  EXPECT_EQ(*Decrypt(*key_, wrap), 1);
}

TEST_F(PaillierTest, Errors) {
  BigRandom rng(uint64_t{5});
  const PublicKey& pk = key_->pk;
  EXPECT_TRUE(absl::IsOutOfRange(Encrypt(pk, pk.n, rng).status()));
  EXPECT_TRUE(absl::IsOutOfRange(Encrypt(pk, mpz_class(-1), rng).status()));
  auto c = *Encrypt(pk, mpz_class(1), rng);
  EXPECT_FALSE(HomScale(pk, c, mpz_class(0)).ok());

  BigRandom other_rng(uint64_t{6});
  const Keypair other = *KeyGen(512, other_rng);
  auto foreign = *Encrypt(other.pk, mpz_class(1), other_rng);
  EXPECT_FALSE(HomAdd(pk, c, foreign).ok());
  EXPECT_FALSE(HomScale(pk, foreign, mpz_class(2)).ok());
  EXPECT_FALSE(Decrypt(*key_, foreign).ok());
  EXPECT_FALSE(KeyGen(128, rng).ok());
}

TEST(KeyGenTest, SeedDeterminesKey) {
  BigRandom a(uint64_t{9}), b(uint64_t{9}), c(uint64_t{10});
  const Keypair ka = *KeyGen(256, a);
  const Keypair kb = *KeyGen(256, b);
  const Keypair kc = *KeyGen(256, c);
  EXPECT_EQ(ka.pk.n, kb.pk.n);
  EXPECT_NE(ka.pk.n, kc.pk.n);
}

TEST(FixedPointCodecTest, SignedValues) {
  BigRandom rng(uint64_t{11});
  const Keypair key = *KeyGen(512, rng);
  auto codec = *FixedPointCodec::Create(key.pk.n, 40);

  const mpz_class neg = *codec.Encode(-1.5);
  EXPECT_EQ(codec.Lift(neg), mpz_class(-3) * (mpz_class(1) << 39));
  EXPECT_EQ(codec.Decode(neg), -1.5L);
  auto c = *Encrypt(key.pk, neg, rng);
  EXPECT_EQ(codec.Decode(*Decrypt(key, c)), -1.5L);

  EXPECT_NEAR(static_cast<double>(codec.Decode(*codec.Encode(M_PI))), M_PI,
              std::ldexp(1.0, -40));
  EXPECT_EQ(codec.Wrap(codec.Lift(neg)), neg);

  EXPECT_TRUE(absl::IsOutOfRange(codec.Encode(1e200).status()));
  EXPECT_FALSE(codec.Encode(NAN).ok());
}

TEST(FixedPointCodecTest, EncryptedSumMatchesPlainSum) {
  BigRandom rng(uint64_t{12});
  const Keypair key = *KeyGen(512, rng);
  auto codec = *FixedPointCodec::Create(key.pk.n, 40);
  Rng draw(13);
  std::uniform_real_distribution<double> u(-1000.0, 1000.0);
  long double plain = 0;
  mpz_class integer_sum = 0;
  Ciphertext acc = *Encrypt(key.pk, mpz_class(0), rng);
  for (int t = 0; t < 500; ++t) {
    const double x = u(draw);
    const mpz_class e = *codec.Encode(x);
    integer_sum += codec.Lift(e);
    plain += x;
    acc = *HomAdd(key.pk, acc, *Encrypt(key.pk, e, rng));
  }
  const mpz_class decrypted = *Decrypt(key, acc);
  EXPECT_EQ(codec.Lift(decrypted), integer_sum);
  EXPECT_NEAR(static_cast<double>(codec.Decode(decrypted)),
              static_cast<double>(plain), 500 * std::ldexp(1.0, -41));
}

TEST(FixedPointCodecTest, ToLongDouble) {
  EXPECT_EQ(ToLongDouble(mpz_class(3), 1), 1.5L);
  EXPECT_EQ(ToLongDouble(mpz_class(-5), 2), -1.25L);
  mpz_class big = mpz_class(1) << 2000;
  EXPECT_EQ(ToLongDouble(big, 1990), 1024.0L);
}

TEST(SelfTestTest, SmallConfigurationPasses) {
  SelfTestOptions options;
  options.exhaustive_max = 10;
  options.full_key_bits = 512;
  options.random_round_trips = 20;
  auto report = SelfTest(options);
  ASSERT_TRUE(report.ok()) << report.status();
  EXPECT_EQ(report->exhaustive_checks, 11 * 11);
  EXPECT_GE(report->round_trips, 20);
}

}  // namespace
}  // namespace paillier
}  // namespace dpls
