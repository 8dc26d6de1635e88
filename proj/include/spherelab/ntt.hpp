#pragma once

// Exact integer convolution via number-theoretic transforms over several
// 62-bit primes, with Chinese-remainder reconstruction into cpp_int.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "spherelab/errors.hpp"
#include "spherelab/parallel.hpp"

namespace spherelab {

using BigCount = boost::multiprecision::cpp_int;

namespace ntt {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

/// Largest supported transform length is 2^kMaxLog2.
inline constexpr int kMaxLog2 = 26;

/// Montgomery arithmetic modulo an odd prime p < 2^62.
class Modulus {
public:
  Modulus() = default;

  explicit Modulus(u64 p) : p_(p) {
    u64 inv = p;  // Newton iteration for p^{-1} mod 2^64
    for (int i = 0; i < 6; ++i) inv *= 2 - p * inv;
    neg_inv_ = ~inv + 1;
    r2_ = static_cast<u64>((static_cast<u128>(1) << 64) % p);
    r2_ = static_cast<u64>(static_cast<u128>(r2_) * r2_ % p);
  }

  u64 value() const { return p_; }

  u64 reduce(u128 t) const {
    const u64 m = static_cast<u64>(t) * neg_inv_;
    u64 r = static_cast<u64>((t + static_cast<u128>(m) * p_) >> 64);
    return r >= p_ ? r - p_ : r;
  }

  u64 to_mont(u64 a) const { return reduce(static_cast<u128>(a % p_) * r2_); }
  u64 from_mont(u64 a) const { return reduce(a); }
  u64 mul(u64 a, u64 b) const { return reduce(static_cast<u128>(a) * b); }
  u64 add(u64 a, u64 b) const {
    u64 s = a + b;
    return s >= p_ ? s - p_ : s;
  }
  u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + p_ - b; }

  /// a^e for a in Montgomery form; result in Montgomery form.
  u64 pow(u64 a, u64 e) const {
    u64 r = to_mont(1);
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }

  u64 inverse(u64 a) const { return pow(a, p_ - 2); }

private:
  u64 p_ = 0;
  u64 neg_inv_ = 0;
  u64 r2_ = 0;
};

/// Plain (non-Montgomery) modular exponentiation, used for primality tests.
inline u64 powmod(u64 a, u64 e, u64 m) {
  u128 r = 1, b = a % m;
  while (e) {
    if (e & 1) r = r * b % m;
    b = b * b % m;
    e >>= 1;
  }
  return static_cast<u64>(r);
}

/// Deterministic Miller-Rabin for 64-bit inputs.
inline bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % q == 0) return n == q;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = static_cast<u64>(static_cast<u128>(x) * x % n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

/// An NTT-friendly prime p = c * 2^kMaxLog2 + 1 with a generator of Z_p^*.
struct NttPrime {
  Modulus mod;
  u64 generator = 0;
};

namespace detail {

inline u64 find_generator(u64 p) {
  std::vector<u64> factors;
  u64 m = p - 1;
  for (u64 q = 2; q * q <= m; ++q) {
    if (m % q == 0) {
      factors.push_back(q);
      while (m % q == 0) m /= q;
    }
  }
  if (m > 1) factors.push_back(m);
  for (u64 g = 2;; ++g) {
    bool ok = true;
    for (u64 q : factors) {
      if (powmod(g, (p - 1) / q, p) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
}

}  // namespace detail

/// The i-th prime of the form c * 2^kMaxLog2 + 1 below 2^62, in decreasing
/// order. Generated on first use and cached.
inline const NttPrime& prime(std::size_t i) {
  static std::mutex m;
  static std::vector<NttPrime> primes;
  static u64 next_c = ((u64{1} << 62) - 1) >> kMaxLog2;
  std::lock_guard lock(m);
  while (primes.size() <= i) {
    for (;; --next_c) {
      const u64 p = (next_c << kMaxLog2) + 1;
      if (is_prime(p)) {
        primes.push_back({Modulus(p), detail::find_generator(p)});
        --next_c;
        break;
      }
    }
  }
  return primes[i];
}

/// In-place cyclic NTT of Montgomery-form values; length must be a power of two.
inline void transform(std::vector<u64>& a, const NttPrime& pr, bool inverse) {
  const Modulus& md = pr.mod;
  const std::size_t n = a.size();
  const int log_n = std::countr_zero(n);
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const u64 p = md.value();
  u64 root = md.pow(md.to_mont(pr.generator), (p - 1) >> log_n);
  if (inverse) root = md.inverse(root);
  std::vector<u64> roots(n / 2 + 1);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const u64 w_len = md.pow(root, n / len);
    const std::size_t half = len / 2;
    roots[0] = md.to_mont(1);
    for (std::size_t k = 1; k < half; ++k) roots[k] = md.mul(roots[k - 1], w_len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const u64 u = a[i + k];
        const u64 v = md.mul(a[i + k + half], roots[k]);
        a[i + k] = md.add(u, v);
        a[i + k + half] = md.sub(u, v);
      }
    }
  }
  if (inverse) {
    const u64 n_inv = md.inverse(md.to_mont(n % p));
    for (auto& x : a) x = md.mul(x, n_inv);
  }
}

inline std::size_t transform_length(std::size_t a_len, std::size_t b_len, std::size_t out_len) {
  const std::size_t needed = std::min(a_len + b_len - 1, 2 * out_len);
  const std::size_t n = std::bit_ceil(std::max<std::size_t>(needed, 1));
  if (std::countr_zero(n) > kMaxLog2)
    throw ResourceError("convolution length " + std::to_string(needed) + " exceeds transform limit 2^" +
                        std::to_string(kMaxLog2));
  return n;
}

/// Truncated product of two Montgomery-form residue sequences.
inline std::vector<u64> multiply(std::span<const u64> a, std::span<const u64> b, std::size_t out_len,
                                 const NttPrime& pr) {
  if (a.empty() || b.empty()) return std::vector<u64>(out_len, 0);
  // Only the first out_len terms of each factor can contribute.
  a = a.first(std::min(a.size(), out_len));
  b = b.first(std::min(b.size(), out_len));
  const std::size_t n = transform_length(a.size(), b.size(), out_len);
  std::vector<u64> fa(n, 0), fb;
  std::copy(a.begin(), a.end(), fa.begin());
  const bool square = a.data() == b.data() && a.size() == b.size();
  transform(fa, pr, false);
  if (square) {
    for (auto& x : fa) x = pr.mod.mul(x, x);
  } else {
    fb.assign(n, 0);
    std::copy(b.begin(), b.end(), fb.begin());
    transform(fb, pr, false);
    for (std::size_t i = 0; i < n; ++i) fa[i] = pr.mod.mul(fa[i], fb[i]);
  }
  transform(fa, pr, true);
  // With n >= 2*out_len - 1 the wrapped terms land at indices >= out_len.
  fa.resize(out_len);
  return fa;
}

/// base^exponent truncated to out_len terms, by repeated squaring.
inline std::vector<u64> power(std::span<const u64> base, unsigned exponent, std::size_t out_len,
                              const NttPrime& pr) {
  std::vector<u64> result(out_len, 0);
  if (out_len == 0) return result;
  result[0] = pr.mod.to_mont(1);
  std::vector<u64> sq(base.begin(), base.begin() + std::min(base.size(), out_len));
  while (exponent) {
    if (exponent & 1) result = multiply(result, sq, out_len, pr);
    exponent >>= 1;
    if (exponent) sq = multiply(sq, sq, out_len, pr);
  }
  return result;
}

/// Number of primes whose product exceeds `bound`.
inline std::size_t primes_for_bound(const BigCount& bound) {
  BigCount product = 1;
  std::size_t n = 0;
  while (product <= bound) product *= prime(n++).mod.value();
  return std::max<std::size_t>(n, 1);
}

/// Montgomery-form residues of nonnegative integers modulo prime i.
template <class Int>
std::vector<u64> residues(std::span<const Int> values, const NttPrime& pr) {
  std::vector<u64> r(values.size());
  const u64 p = pr.mod.value();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if constexpr (std::is_same_v<Int, BigCount>) {
      r[i] = pr.mod.to_mont(static_cast<u64>(values[i] % p));
    } else {
      r[i] = pr.mod.to_mont(static_cast<u64>(values[i]) % p);
    }
  }
  return r;
}

/// Garner reconstruction of the unique integers in [0, prod p_i) from
/// Montgomery-form residues (one row per prime).
inline std::vector<BigCount> reconstruct(const std::vector<std::vector<u64>>& rows, unsigned threads = 0) {
  const std::size_t m = rows.size();
  const std::size_t len = m ? rows[0].size() : 0;
  std::vector<std::vector<u64>> inv(m, std::vector<u64>(m, 0));  // inv[j][i] = p_i^{-1} mod p_j
  for (std::size_t j = 0; j < m; ++j) {
    const auto& mj = prime(j).mod;
    for (std::size_t i = 0; i < j; ++i) inv[j][i] = mj.inverse(mj.to_mont(prime(i).mod.value()));
  }
  std::vector<BigCount> out(len);
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (len + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    std::vector<u64> digits(m);
    const std::size_t end = std::min(len, (c + 1) * kChunk);
    for (std::size_t t = c * kChunk; t < end; ++t) {
      for (std::size_t j = 0; j < m; ++j) {
        const auto& mj = prime(j).mod;
        u64 x = rows[j][t];  // Montgomery form
        for (std::size_t i = 0; i < j; ++i) {
          x = mj.mul(mj.sub(x, mj.to_mont(digits[i])), inv[j][i]);
        }
        digits[j] = mj.from_mont(x);
      }
      BigCount v = 0;
      for (std::size_t j = m; j-- > 0;) {
        v *= prime(j).mod.value();
        v += digits[j];
      }
      out[t] = std::move(v);
    }
  });
  return out;
}

/// Exact truncated product of nonnegative integer sequences. `bound` must be
/// an upper bound on every output coefficient.
inline std::vector<BigCount> convolve(std::span<const BigCount> a, std::span<const BigCount> b, std::size_t out_len,
                                      const BigCount& bound, unsigned threads = 0) {
  const std::size_t m = primes_for_bound(bound);
  std::vector<std::vector<u64>> rows(m);
  parallel_for(m, threads, [&](std::size_t j) {
    const auto& pr = prime(j);
    rows[j] = multiply(residues(a, pr), residues(b, pr), out_len, pr);
  });
  return reconstruct(rows, threads);
}

}  // namespace ntt
}  // namespace spherelab
