#ifndef BAYESREGION_COMMON_HPP
#define BAYESREGION_COMMON_HPP

#include <algorithm>
#include <complex>
#include <cstdint>
#include <exception>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace bayesregion {

using ParamVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Bad user input: unknown labels, malformed configs, inconsistent shapes.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that could not produce a meaningful number.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Process-wide cap on worker threads. 0 means hardware concurrency.
inline unsigned& thread_cap() {
  static unsigned cap = 0;
  return cap;
}

inline void set_thread_count(unsigned n) { thread_cap() = n; }

inline unsigned effective_threads() {
  unsigned n = thread_cap();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Independent generator for sub-stream `stream` of a run seeded with `seed`.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream & 0xffffffffu),
                    static_cast<std::uint32_t>(stream >> 32), 0x6a09e667u};
  return std::mt19937_64(seq);
}

/// Runs fn(chunk) for chunk in [0, n_chunks) on up to effective_threads()
/// workers. Work is split by chunk index only, so results written per chunk
/// do not depend on the number of threads.
template <typename Fn>
void parallel_for_chunks(std::size_t n_chunks, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(effective_threads(), n_chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t c = w; c < n_chunks; c += workers) fn(c);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace bayesregion

#endif  // BAYESREGION_COMMON_HPP
