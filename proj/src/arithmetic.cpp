#include "lowlying/arithmetic.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lowlying/errors.hpp"

namespace lowlying {

namespace {
int g_threads = 0;
}

void set_thread_count(int threads) {
  g_threads = threads;
  if (threads > 0) omp_set_num_threads(threads);
}

int thread_count() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

}  // namespace lowlying

namespace lowlying::arithmetic {

namespace {

constexpr std::int64_t kSegment = 1 << 18;

std::vector<std::uint32_t> small_primes(std::int64_t n) {
  std::vector<char> composite(static_cast<std::size_t>(n + 1), 0);
  std::vector<std::uint32_t> out;
  for (std::int64_t i = 2; i <= n; ++i) {
    if (composite[i]) continue;
    out.push_back(static_cast<std::uint32_t>(i));
    for (std::int64_t j = i * i; j <= n; j += i) composite[j] = 1;
  }
  return out;
}

void sieve_segment(std::int64_t lo, std::int64_t hi, const std::vector<std::uint32_t>& base,
                   std::vector<std::uint32_t>& out) {
  // [lo, hi)
  std::vector<char> composite(static_cast<std::size_t>(hi - lo), 0);
  for (std::uint32_t p32 : base) {
    const std::int64_t p = p32;
    if (p * p >= hi) break;
    std::int64_t start = std::max(p * p, (lo + p - 1) / p * p);
    for (std::int64_t j = start; j < hi; j += p) composite[j - lo] = 1;
  }
  for (std::int64_t i = std::max<std::int64_t>(lo, 2); i < hi; ++i) {
    if (!composite[i - lo]) out.push_back(static_cast<std::uint32_t>(i));
  }
}

std::int64_t mod_inverse(std::int64_t a, std::int64_t c) {
  std::int64_t r0 = c, r1 = a % c, t0 = 0, t1 = 1;
  while (r1 != 0) {
    const std::int64_t q = r0 / r1;
    std::tie(r0, r1) = std::make_pair(r1, r0 - q * r1);
    std::tie(t0, t1) = std::make_pair(t1, t0 - q * t1);
  }
  // r0 == gcd == 1 for units
  return ((t0 % c) + c) % c;
}

}  // namespace

std::vector<std::uint32_t> primes_up_to(std::int64_t N, Exec exec) {
  if (N > kPrimeCap) throw CapacityError("primes_up_to: N above the 1e9 cap");
  if (N < 2) return {};
  const auto root = static_cast<std::int64_t>(std::sqrt(static_cast<double>(N))) + 1;
  const auto base = small_primes(root);
  const std::int64_t segments = (N + 1 + kSegment - 1) / kSegment;
  std::vector<std::vector<std::uint32_t>> parts(static_cast<std::size_t>(segments));
  auto run = [&](std::int64_t s) {
    const std::int64_t lo = s * kSegment;
    const std::int64_t hi = std::min(N + 1, lo + kSegment);
    sieve_segment(lo, hi, base, parts[s]);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t s = 0; s < segments; ++s) run(s);
  } else {
    for (std::int64_t s = 0; s < segments; ++s) run(s);
  }
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  std::vector<std::uint32_t> out;
  out.reserve(total);
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::int64_t gcd(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }

int divisor_count(std::int64_t n) {
  if (n < 1) throw DomainError("divisor_count: n must be >= 1");
  int count = 1;
  for (std::int64_t p = 2; p * p <= n; ++p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    count *= e + 1;
  }
  if (n > 1) count *= 2;
  return count;
}

KloostermanModulus::KloostermanModulus(std::int64_t c) : c_(c) {
  if (c < 1) throw DomainError("KloostermanModulus: c must be >= 1");
  cos_table_.resize(static_cast<std::size_t>(c));
  for (std::int64_t k = 0; k < c; ++k) {
    // cos(2 pi k / c) evaluated on the reduced angle for accuracy.
    const std::int64_t kk = (2 * k <= c) ? k : k - c;
    cos_table_[k] = std::cos(2.0 * kPi * static_cast<double>(kk) / static_cast<double>(c));
  }
  for (std::int64_t x = (c == 1 ? 0 : 1); x < std::max<std::int64_t>(c, 1); ++x) {
    if (std::gcd(x, c) != 1) continue;
    units_.push_back(x);
    inverses_.push_back(c == 1 ? 0 : mod_inverse(x, c));
  }
}

double KloostermanModulus::sum(std::int64_t m, std::int64_t n) const {
  const std::int64_t mm = ((m % c_) + c_) % c_;
  const std::int64_t nn = ((n % c_) + c_) % c_;
  CompensatedSum<double> acc;
  for (std::size_t i = 0; i < units_.size(); ++i) {
    const std::int64_t k = (mm * units_[i] + nn * inverses_[i]) % c_;
    acc.add(cos_table_[k]);
  }
  return acc.value();
}

std::vector<double> KloostermanModulus::row(std::int64_t n) const {
  std::vector<double> out(static_cast<std::size_t>(c_));
  for (std::int64_t a = 0; a < c_; ++a) out[a] = sum(a, n);
  return out;
}

double kloosterman_sum(std::int64_t m, std::int64_t n, std::int64_t c) {
  if (m < 1 || n < 1) throw DomainError("kloosterman_sum: m, n must be >= 1");
  return KloostermanModulus(c).sum(m, n);
}

std::vector<double> kloosterman_column(std::int64_t m, std::int64_t n, std::int64_t c_max, Exec exec) {
  if (m < 1 || n < 1 || c_max < 0) throw DomainError("kloosterman_column: m, n >= 1 and c_max >= 0 required");
  std::vector<double> out(static_cast<std::size_t>(c_max));
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t c = 1; c <= c_max; ++c) out[c - 1] = KloostermanModulus(c).sum(m, n);
  } else {
    for (std::int64_t c = 1; c <= c_max; ++c) out[c - 1] = KloostermanModulus(c).sum(m, n);
  }
  return out;
}

Complex divisor_sigma_complex(Complex s, std::int64_t n) {
  if (n < 1) throw DomainError("divisor_sigma_complex: n must be >= 1");
  CompensatedSum<Complex> acc;
  for (std::int64_t d = 1; d * d <= n; ++d) {
    if (n % d != 0) continue;
    acc.add(std::exp(s * std::log(static_cast<double>(d))));
    const std::int64_t e = n / d;
    if (e != d) acc.add(std::exp(s * std::log(static_cast<double>(e))));
  }
  return acc.value();
}

SatakePair satake_from_lambda(double lambda_p) {
  if (!(std::abs(lambda_p) <= 10.0)) throw DomainError("satake_from_lambda: |lambda_p| must be <= 10");
  const double disc = lambda_p * lambda_p - 4.0;
  if (disc >= 0.0) {
    // Real roots; the larger-magnitude one from the stable formula, its
    // partner as the reciprocal so alpha * beta = 1 exactly.
    const double q = 0.5 * (lambda_p + std::copysign(std::sqrt(disc), lambda_p));
    if (q == 0.0) return {1.0, 1.0};
    return {q, 1.0 / q};
  }
  const double im = 0.5 * std::sqrt(-disc);
  return {Complex(0.5 * lambda_p, im), Complex(0.5 * lambda_p, -im)};
}

double hecke_prime_power(double lambda_p, int k) {
  if (k < 0) throw DomainError("hecke_prime_power: k must be >= 0");
  double prev = 0.0, cur = 1.0;  // lambda_{p^{-1}} = 0, lambda_{p^0} = 1
  for (int j = 0; j < k; ++j) {
    const double next = lambda_p * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace lowlying::arithmetic
