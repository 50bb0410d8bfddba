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

// Simulation-grade Paillier cryptosystem (generator g = N + 1) and a
// fixed-point codec for carrying signed reals through it. Keys default to a
// 1024-bit modulus; this is NOT hardened for production use.

#ifndef DPLS_PAILLIER_H_
#define DPLS_PAILLIER_H_

#include <cstdint>
#include <string>

#include <gmpxx.h>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpls/random.h"

namespace dpls {
namespace paillier {

inline constexpr int kDefaultKeyBits = 1024;
inline constexpr int kMinKeyBits = 256;
inline constexpr int kDefaultScaleBits = 40;

// Arbitrary-precision randomness. Seeded once from a 64-bit generator so that
// everything downstream is reproducible.
class BigRandom {
 public:
  explicit BigRandom(Rng& seed_source);
  explicit BigRandom(uint64_t seed);

  // Uniform on [0, bound).
  mpz_class Below(const mpz_class& bound);
  // Uniform on [0, 2^bits).
  mpz_class Bits(int bits);

 private:
  gmp_randclass state_;
};

struct PublicKey {
  mpz_class n;
  mpz_class n_squared;
};

struct PrivateKey {
  mpz_class p;
  mpz_class q;
  mpz_class lambda;  // lcm(p - 1, q - 1)
  mpz_class mu;      // lambda^{-1} mod n
  // CRT decryption constants.
  mpz_class p_squared;
  mpz_class q_squared;
  mpz_class h_p;
  mpz_class h_q;
  mpz_class q_inv_mod_p;
};

struct Keypair {
  PublicKey pk;
  PrivateKey sk;
};

// Carries the modulus it was produced under so mismatched keys are caught.
struct Ciphertext {
  mpz_class value;
  mpz_class n;
};

// N = p q with |p| = |q| = bits/2 and N exactly `bits` bits long. Primes pass
// 40 Miller-Rabin rounds (error < 2^-80).
absl::StatusOr<Keypair> KeyGen(int bits, BigRandom& rng);

absl::StatusOr<Ciphertext> Encrypt(const PublicKey& pk,
                                   const mpz_class& plaintext, BigRandom& rng);
absl::StatusOr<mpz_class> Decrypt(const Keypair& key, const Ciphertext& c);

// E(a) E(b) = E(a + b mod N).
absl::StatusOr<Ciphertext> HomAdd(const PublicKey& pk, const Ciphertext& a,
                                  const Ciphertext& b);
// E(a)^k = E(k a mod N), k >= 1.
absl::StatusOr<Ciphertext> HomScale(const PublicKey& pk, const Ciphertext& c,
                                    const mpz_class& k);

// Signed reals as residues mod N: x -> round(x 2^scale_bits), negatives
// wrapped to N - |v|. Residues above N/2 decode as negative.
class FixedPointCodec {
 public:
  static absl::StatusOr<FixedPointCodec> Create(
      mpz_class modulus, int scale_bits = kDefaultScaleBits);

  int scale_bits() const { return scale_bits_; }
  const mpz_class& modulus() const { return modulus_; }
  // N / 4: magnitudes of every intermediate signed value must stay below it.
  const mpz_class& headroom() const { return headroom_; }

  // Signed integer round(x * S); fails if |x| S exceeds the headroom.
  absl::StatusOr<mpz_class> EncodeSigned(double x) const;
  absl::StatusOr<mpz_class> Encode(double x) const;
  // Residue -> signed representative in (-N/2, N/2].
  mpz_class Lift(const mpz_class& residue) const;
  mpz_class Wrap(const mpz_class& signed_value) const;
  long double Decode(const mpz_class& residue) const;
  long double DecodeSigned(const mpz_class& signed_value) const;

 private:
  FixedPointCodec(mpz_class modulus, int scale_bits);

  mpz_class modulus_;
  mpz_class half_;
  mpz_class headroom_;
  int scale_bits_;
};

// Extended-precision value of a big integer times 2^-shift.
long double ToLongDouble(const mpz_class& value, int shift = 0);

struct SelfTestOptions {
  int small_key_bits = 256;
  int exhaustive_max = 50;
  int full_key_bits = kDefaultKeyBits;
  int random_round_trips = 1000;
  uint64_t seed = 1;
};

struct SelfTestReport {
  int64_t exhaustive_checks = 0;
  int64_t round_trips = 0;
};

// Homomorphism checks over [0, exhaustive_max]^2 on a small key plus random
// round trips (including 0, 1 and N - 1) on a full-size key.
absl::StatusOr<SelfTestReport> SelfTest(const SelfTestOptions& options = {});

}  // namespace paillier
}  // namespace dpls

#endif  // DPLS_PAILLIER_H_
