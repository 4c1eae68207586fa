#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mood {

/// Base class of every error thrown by the library. `kind()` is a short
/// machine-readable tag (e.g. "corpus", "vocabulary-mismatch").
class Error : public std::runtime_error
{
public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind))
  {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

class CorpusError : public Error
{
public:
  explicit CorpusError(const std::string& message) : Error("corpus", message) {}
};

class InvalidArgument : public Error
{
public:
  explicit InvalidArgument(const std::string& message)
      : Error("invalid-argument", message)
  {}
};

class NumericalError : public Error
{
public:
  explicit NumericalError(const std::string& message)
      : Error("numerical", message)
  {}
};

class VocabularyMismatch : public Error
{
public:
  explicit VocabularyMismatch(const std::string& message)
      : Error("vocabulary-mismatch", message)
  {}
};

class FormatError : public Error
{
public:
  explicit FormatError(const std::string& message) : Error("format", message) {}
};

/// Random source whose output is identical on every platform.
///
/// std::mt19937_64 has a fully specified output sequence, but the standard
/// distributions do not, so bounded integers and uniform reals are derived
/// here directly from the raw 64-bit stream.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). Rejection sampling removes modulo bias.
  std::uint64_t below(std::uint64_t bound)
  {
    if (bound == 0) throw InvalidArgument("Rng::below: bound must be positive");
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do { r = next(); } while (r >= limit);
    return r % bound;
  }

  /// Standard normal via Box-Muller (one value per call).
  double normal()
  {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  template <typename RandomIt>
  void shuffle(RandomIt first, RandomIt last)
  {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i)
    {
      const auto j = below(i);
      std::iter_swap(first + (i - 1), first + j);
    }
  }

private:
  std::mt19937_64 engine_;
};

/// Runs fn(i) for i in [0, n) on up to `threads` threads. Each index is
/// handled exactly once; callers write results into per-index slots.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn)
{
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1)
  {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try
      {
        for (std::size_t i = t; i < n; i += threads) fn(i);
      }
      catch (...)
      {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// splitmix64 finalizer, used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

} // namespace mood
