#pragma once

// Number-theoretic kernels: primes, Kloosterman sums, complex-order divisor
// sums, Satake parameters and the Hecke prime-power recursion.

#include <cstdint>
#include <vector>

#include "lowlying/numerics.hpp"
#include "lowlying/parallel.hpp"

namespace lowlying::arithmetic {

inline constexpr std::int64_t kPrimeCap = 1'000'000'000;

/// All primes <= N in ascending order (segmented sieve). Throws
/// CapacityError above kPrimeCap.
std::vector<std::uint32_t> primes_up_to(std::int64_t N, Exec exec = Exec::serial);

std::int64_t gcd(std::int64_t a, std::int64_t b);
/// Number of divisors d(n), n >= 1.
int divisor_count(std::int64_t n);

/// Precomputed data for one modulus c: the units mod c with their inverses and
/// a cosine table, so S(m, n; c) for many (m, n) costs one pass over the units.
class KloostermanModulus {
 public:
  explicit KloostermanModulus(std::int64_t c);
  std::int64_t modulus() const { return c_; }
  double sum(std::int64_t m, std::int64_t n) const;
  /// S(a, n; c) for a = 0, ..., c - 1 (S(m, n; c) depends on m only mod c).
  std::vector<double> row(std::int64_t n) const;

 private:
  std::int64_t c_;
  std::vector<std::int64_t> units_;
  std::vector<std::int64_t> inverses_;
  std::vector<double> cos_table_;
};

/// S(m, n; c) = sum over x mod c coprime to c of cos(2 pi (m x + n xbar)/c).
double kloosterman_sum(std::int64_t m, std::int64_t n, std::int64_t c);

/// S(m, n; c) for c = 1..c_max (index c - 1).
std::vector<double> kloosterman_column(std::int64_t m, std::int64_t n, std::int64_t c_max, Exec exec = Exec::serial);

/// sum_{d | n} d^s.
Complex divisor_sigma_complex(Complex s, std::int64_t n);

struct SatakePair {
  Complex alpha;
  Complex beta;
};

/// Roots of X^2 - lambda_p X + 1, alpha with non-negative imaginary part.
SatakePair satake_from_lambda(double lambda_p);

/// lambda_{p^k} from the Hecke recursion.
double hecke_prime_power(double lambda_p, int k);

}  // namespace lowlying::arithmetic
