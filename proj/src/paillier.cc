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
#include <utility>
#include <vector>

#include "absl/strings/str_cat.h"
#include "dpls/status_macros.h"

namespace dpls {
namespace paillier {
namespace {

mpz_class PowMod(const mpz_class& base, const mpz_class& exp,
                 const mpz_class& mod) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

mpz_class InvertMod(const mpz_class& a, const mpz_class& mod) {
  mpz_class out;
  mpz_invert(out.get_mpz_t(), a.get_mpz_t(), mod.get_mpz_t());
  return out;
}

// Prime with exactly `bits` bits and the top two bits set, so the product of
// two of them has exactly 2 * bits bits.
mpz_class RandomPrime(int bits, BigRandom& rng) {
  while (true) {
    mpz_class candidate = rng.Bits(bits);
    mpz_setbit(candidate.get_mpz_t(), bits - 1);
    mpz_setbit(candidate.get_mpz_t(), bits - 2);
    mpz_nextprime(candidate.get_mpz_t(), candidate.get_mpz_t());
    if (static_cast<int>(mpz_sizeinbase(candidate.get_mpz_t(), 2)) != bits) {
      continue;
    }
    if (mpz_probab_prime_p(candidate.get_mpz_t(), 40) > 0) return candidate;
  }
}

absl::Status CheckSameKey(const PublicKey& pk, const Ciphertext& c) {
  if (c.n != pk.n) {
    return absl::InvalidArgumentError(
        "ciphertext was produced under a different public key");
  }
  return absl::OkStatus();
}

// L(x) = (x - 1) / d.
mpz_class LFunction(const mpz_class& x, const mpz_class& d) {
  mpz_class out = (x - 1) / d;
  return out;
}

}  // namespace

BigRandom::BigRandom(Rng& seed_source) : BigRandom(seed_source()) {}

BigRandom::BigRandom(uint64_t seed) : state_(gmp_randinit_mt) {
  mpz_class s;
  mpz_import(s.get_mpz_t(), 1, 1, sizeof(seed), 0, 0, &seed);
  state_.seed(s);
}

mpz_class BigRandom::Below(const mpz_class& bound) {
  return state_.get_z_range(bound);
}

mpz_class BigRandom::Bits(int bits) { return state_.get_z_bits(bits); }

absl::StatusOr<Keypair> KeyGen(int bits, BigRandom& rng) {
  if (bits < kMinKeyBits || bits % 2 != 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "key size must be an even number of bits >= ", kMinKeyBits, ", got ",
        bits));
  }
  mpz_class p;
  mpz_class q;
  do {
    p = RandomPrime(bits / 2, rng);
    q = RandomPrime(bits / 2, rng);
  } while (p == q);
  if (p < q) std::swap(p, q);

  Keypair key;
  key.pk.n = p * q;
  key.pk.n_squared = key.pk.n * key.pk.n;

  PrivateKey& sk = key.sk;
  sk.p = p;
  sk.q = q;
  mpz_class p1 = p - 1;
  mpz_class q1 = q - 1;
  mpz_lcm(sk.lambda.get_mpz_t(), p1.get_mpz_t(), q1.get_mpz_t());
  sk.mu = InvertMod(sk.lambda, key.pk.n);

  const mpz_class generator = key.pk.n + 1;
  sk.p_squared = p * p;
  sk.q_squared = q * q;
  sk.h_p = InvertMod(LFunction(PowMod(generator, p1, sk.p_squared), p), p);
  sk.h_q = InvertMod(LFunction(PowMod(generator, q1, sk.q_squared), q), q);
  sk.q_inv_mod_p = InvertMod(q, p);
  return key;
}

absl::StatusOr<Ciphertext> Encrypt(const PublicKey& pk,
                                   const mpz_class& plaintext, BigRandom& rng) {
  if (plaintext < 0 || plaintext >= pk.n) {
    return absl::OutOfRangeError("plaintext must lie in [0, N)");
  }
  mpz_class r;
  do {
    r = rng.Below(pk.n);
  } while (r == 0 || gcd(r, pk.n) != 1);
  // (N + 1)^m = 1 + m N mod N^2.
  mpz_class head = (1 + plaintext * pk.n) % pk.n_squared;
  Ciphertext c;
  c.value = (head * PowMod(r, pk.n, pk.n_squared)) % pk.n_squared;
  c.n = pk.n;
  return c;
}

absl::StatusOr<mpz_class> Decrypt(const Keypair& key, const Ciphertext& c) {
  DPLS_RETURN_IF_ERROR(CheckSameKey(key.pk, c));
  if (c.value <= 0 || c.value >= key.pk.n_squared) {
    return absl::InvalidArgumentError("ciphertext outside [1, N^2)");
  }
  const PrivateKey& sk = key.sk;
  const mpz_class m_p =
      (LFunction(PowMod(c.value, sk.p - 1, sk.p_squared), sk.p) * sk.h_p) %
      sk.p;
  const mpz_class m_q =
      (LFunction(PowMod(c.value, sk.q - 1, sk.q_squared), sk.q) * sk.h_q) %
      sk.q;
  mpz_class diff = ((m_p - m_q) * sk.q_inv_mod_p) % sk.p;
  if (diff < 0) diff += sk.p;
  return m_q + diff * sk.q;
}

absl::StatusOr<Ciphertext> HomAdd(const PublicKey& pk, const Ciphertext& a,
                                  const Ciphertext& b) {
  DPLS_RETURN_IF_ERROR(CheckSameKey(pk, a));
  DPLS_RETURN_IF_ERROR(CheckSameKey(pk, b));
  Ciphertext out;
  out.value = (a.value * b.value) % pk.n_squared;
  out.n = pk.n;
  return out;
}

absl::StatusOr<Ciphertext> HomScale(const PublicKey& pk, const Ciphertext& c,
                                    const mpz_class& k) {
  DPLS_RETURN_IF_ERROR(CheckSameKey(pk, c));
  if (k < 1) {
    return absl::InvalidArgumentError("scaling factor must be >= 1");
  }
  Ciphertext out;
  out.value = PowMod(c.value, k, pk.n_squared);
  out.n = pk.n;
  return out;
}

absl::StatusOr<FixedPointCodec> FixedPointCodec::Create(mpz_class modulus,
                                                        int scale_bits) {
  if (scale_bits < 1 || scale_bits > 512) {
    return absl::InvalidArgumentError(
        absl::StrCat("scale_bits out of range: ", scale_bits));
  }
  if (mpz_sizeinbase(modulus.get_mpz_t(), 2) <
      static_cast<size_t>(scale_bits + 4)) {
    return absl::InvalidArgumentError("modulus too small for the scale");
  }
  return FixedPointCodec(std::move(modulus), scale_bits);
}

FixedPointCodec::FixedPointCodec(mpz_class modulus, int scale_bits)
    : modulus_(std::move(modulus)), scale_bits_(scale_bits) {
  half_ = modulus_ / 2;
  headroom_ = modulus_ / 4;
}

absl::StatusOr<mpz_class> FixedPointCodec::EncodeSigned(double x) const {
  if (!std::isfinite(x)) {
    return absl::InvalidArgumentError("cannot encode a non-finite value");
  }
  // Exact: scaling by a power of two, then rounding to an integer.
  const double scaled = std::nearbyint(std::ldexp(x, scale_bits_));
  mpz_class v(scaled);
  if (abs(v) > headroom_) {
    return absl::OutOfRangeError(
        absl::StrCat("|x| = ", std::abs(x), " exceeds the codec headroom N/(4S)"));
  }
  return v;
}

absl::StatusOr<mpz_class> FixedPointCodec::Encode(double x) const {
  DPLS_ASSIGN_OR_RETURN(mpz_class v, EncodeSigned(x));
  return Wrap(v);
}

mpz_class FixedPointCodec::Lift(const mpz_class& residue) const {
  return residue > half_ ? mpz_class(residue - modulus_) : residue;
}

mpz_class FixedPointCodec::Wrap(const mpz_class& signed_value) const {
  mpz_class out = signed_value % modulus_;
  if (out < 0) out += modulus_;
  return out;
}

long double FixedPointCodec::Decode(const mpz_class& residue) const {
  return ToLongDouble(Lift(residue), scale_bits_);
}

long double FixedPointCodec::DecodeSigned(const mpz_class& signed_value) const {
  return ToLongDouble(signed_value, scale_bits_);
}

long double ToLongDouble(const mpz_class& value, int shift) {
  const int sign = sgn(value);
  if (sign == 0) return 0.0L;
  mpz_class mag = abs(value);
  const int bits = static_cast<int>(mpz_sizeinbase(mag.get_mpz_t(), 2));
  int drop = 0;
  if (bits > 64) {
    drop = bits - 64;
    mpz_fdiv_q_2exp(mag.get_mpz_t(), mag.get_mpz_t(), drop);
  }
  // mag now fits in 64 bits; split into two limbs portable across ulong sizes.
  mpz_class hi = mag >> 32;
  mpz_class lo = mag - (hi << 32);
  const long double top = static_cast<long double>(hi.get_ui()) * 4294967296.0L +
                          static_cast<long double>(lo.get_ui());
  return sign * std::ldexp(top, drop - shift);
}

absl::StatusOr<SelfTestReport> SelfTest(const SelfTestOptions& options) {
  SelfTestReport report;
  BigRandom rng(options.seed);

  DPLS_ASSIGN_OR_RETURN(Keypair small, KeyGen(options.small_key_bits, rng));
  const PublicKey& spk = small.pk;
  std::vector<Ciphertext> enc;
  std::vector<Ciphertext> enc_neg;
  for (int a = 0; a <= options.exhaustive_max; ++a) {
    DPLS_ASSIGN_OR_RETURN(Ciphertext c, Encrypt(spk, mpz_class(a), rng));
    DPLS_ASSIGN_OR_RETURN(Ciphertext cn,
                          Encrypt(spk, (spk.n - a) % spk.n, rng));
    enc.push_back(std::move(c));
    enc_neg.push_back(std::move(cn));
  }
  for (int a = 0; a <= options.exhaustive_max; ++a) {
    for (int b = 0; b <= options.exhaustive_max; ++b) {
      DPLS_ASSIGN_OR_RETURN(Ciphertext sum, HomAdd(spk, enc[a], enc[b]));
      DPLS_ASSIGN_OR_RETURN(mpz_class got_sum, Decrypt(small, sum));
      if (got_sum != a + b) {
        return absl::InternalError(
            absl::StrCat("HomAdd mismatch at (", a, ",", b, ")"));
      }
      if (b >= 1) {
        DPLS_ASSIGN_OR_RETURN(Ciphertext scaled,
                              HomScale(spk, enc[a], mpz_class(b)));
        DPLS_ASSIGN_OR_RETURN(mpz_class got_scaled, Decrypt(small, scaled));
        if (got_scaled != a * b) {
          return absl::InternalError(
              absl::StrCat("HomScale mismatch at (", a, ",", b, ")"));
        }
        // (E(a) E(-b))^k with k = b decrypts to b (a - b) mod N.
        DPLS_ASSIGN_OR_RETURN(Ciphertext diff, HomAdd(spk, enc[a], enc_neg[b]));
        DPLS_ASSIGN_OR_RETURN(Ciphertext diff_scaled,
                              HomScale(spk, diff, mpz_class(b)));
        DPLS_ASSIGN_OR_RETURN(mpz_class got_diff, Decrypt(small, diff_scaled));
        mpz_class want = (mpz_class(b) * (a - b)) % spk.n;
        if (want < 0) want += spk.n;
        if (got_diff != want) {
          return absl::InternalError(
              absl::StrCat("scaled difference mismatch at (", a, ",", b, ")"));
        }
      }
      ++report.exhaustive_checks;
    }
  }

  DPLS_ASSIGN_OR_RETURN(Keypair full, KeyGen(options.full_key_bits, rng));
  for (int t = 0; t < options.random_round_trips; ++t) {
    mpz_class m;
    if (t == 0) {
      m = 0;
    } else if (t == 1) {
      m = 1;
    } else if (t == 2) {
      m = full.pk.n - 1;
    } else {
      m = rng.Below(full.pk.n);
    }
    DPLS_ASSIGN_OR_RETURN(Ciphertext c, Encrypt(full.pk, m, rng));
    DPLS_ASSIGN_OR_RETURN(mpz_class back, Decrypt(full, c));
    if (back != m) {
      return absl::InternalError(absl::StrCat("round trip failed at trial ", t));
    }
    ++report.round_trips;
  }
  return report;
}

}  // namespace paillier
}  // namespace dpls
