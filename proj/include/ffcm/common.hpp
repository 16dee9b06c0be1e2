#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

namespace ffcm {

using BigInt = boost::multiprecision::cpp_int;
// Exact rational amounts (values of |.|, densities, assembled identities).
using Rational = boost::rational<BigInt>;
// Exact rational *exponents* of q (Q = 3(d+1)/2 and the profile exponents).
using Frac = boost::rational<long long>;

// deg(0).  Distinguished sentinel, safe to add small offsets to.
inline constexpr int kNegInfDeg = std::numeric_limits<int>::min() / 4;
// Laurent precision floor of exactly-known values.
inline constexpr int kExactFloor = std::numeric_limits<int>::min() / 4;

struct domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct capacity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct truncation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline BigInt pow_big(BigInt base, unsigned e) {
  BigInt r = 1;
  while (e) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

// q^e as an exact rational, e of either sign.
inline Rational qpow(std::uint64_t q, long long e) {
  if (e >= 0) return Rational(pow_big(BigInt(q), static_cast<unsigned>(e)));
  return Rational(BigInt(1), pow_big(BigInt(q), static_cast<unsigned>(-e)));
}

// Evaluation budget shared by the enumeration kernels.  Tasks precheck their
// full cost before running so a refusal carries the required budget.
class Budget {
 public:
  explicit Budget(std::uint64_t cap = (1ull << 31)) : cap_(cap) {}

  // cumulative: a task must fit in what is left of the cap
  void precheck(std::uint64_t required, const char* what) const {
    std::uint64_t u = used_.load(std::memory_order_relaxed);
    if (required > cap_ || u + required > cap_) {
      throw capacity_error(std::string(what) + ": requires budget " +
                           std::to_string(required) + " but " +
                           std::to_string(cap_ - std::min(u, cap_)) +
                           " of cap " + std::to_string(cap_) + " remains");
    }
  }
  void charge(std::uint64_t amount) {
    used_.fetch_add(amount, std::memory_order_relaxed);
  }
  std::uint64_t used() const { return used_.load(std::memory_order_relaxed); }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t cap_;
  std::atomic<std::uint64_t> used_{0};
};

inline unsigned resolve_workers(unsigned configured) {
  if (const char* env = std::getenv("FFCM_WORKERS")) {
    int w = std::atoi(env);
    if (w >= 1) return static_cast<unsigned>(w);
  }
  return configured ? configured : 1;
}

// Splits [0, count) into contiguous blocks, one per worker, and combines the
// per-block results in block order.  Every reduction we run through here is
// an exact integer sum, so the result is independent of the partitioning.
template <class T, class BlockFn, class CombineFn>
T parallel_blocks(std::uint64_t count, unsigned workers, BlockFn block,
                  CombineFn combine, T init) {
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2 * workers) {
    T acc = init;
    combine(acc, block(std::uint64_t{0}, count));
    return acc;
  }
  std::vector<T> partial;
  partial.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) partial.push_back(init);
  std::vector<std::thread> pool;
  std::uint64_t chunk = count / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::uint64_t lo = w * chunk;
    std::uint64_t hi = (w + 1 == workers) ? count : lo + chunk;
    // each thread runs its own copy of the functor, so by-value captures
    // (scratch buffers, counters) are thread-private
    pool.emplace_back([blk = block, &partial, lo, hi, w]() mutable {
      partial[w] = blk(lo, hi);
    });
  }
  for (auto& th : pool) th.join();
  T acc = init;
  for (unsigned w = 0; w < workers; ++w) combine(acc, partial[w]);
  return acc;
}

}  // namespace ffcm
