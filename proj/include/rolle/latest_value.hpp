#pragma once

#include <cstdint>
#include <mutex>

namespace rolle {

// Single-producer/single-consumer latest-wins cell. Readers always see the
// most recent value and a monotonically increasing version counter.
template <class T>
class LatestValue {
 public:
  explicit LatestValue(T initial = T{}) : value_(std::move(initial)) {}

  void store(T v) {
    std::lock_guard lock(mu_);
    value_ = std::move(v);
    ++version_;
  }
  T load() const {
    std::lock_guard lock(mu_);
    return value_;
  }
  // Value plus the number of stores so far.
  std::pair<T, std::uint64_t> snapshot() const {
    std::lock_guard lock(mu_);
    return {value_, version_};
  }

 private:
  mutable std::mutex mu_;
  T value_;
  std::uint64_t version_ = 0;
};

}  // namespace rolle
