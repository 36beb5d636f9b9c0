#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace numdiff {

// Fixed-capacity history indexed by lag: at_lag(1) is the most recent push,
// at_lag(capacity) the oldest retained one. Slots never written hold the
// fill value, so lags reaching before the first push read as fill.
template <typename T>
class LagBuffer {
 public:
  LagBuffer(std::size_t capacity, T fill)
      : fill_(std::move(fill)), slots_(capacity, fill_) {}

  void push(const T& value) {
    ++pushes_;
    if (slots_.empty()) return;
    head_ = (head_ + 1) % slots_.size();
    slots_[head_] = value;
  }

  const T& at_lag(std::size_t lag) const {
    if (lag == 0 || lag > slots_.size()) {
      throw std::out_of_range("lag outside buffer capacity");
    }
    return slots_[(head_ + slots_.size() - (lag - 1)) % slots_.size()];
  }

  std::size_t capacity() const { return slots_.size(); }
  long long pushes() const { return pushes_; }

 private:
  T fill_;
  std::vector<T> slots_;
  std::size_t head_ = 0;
  long long pushes_ = 0;
};

}  // namespace numdiff
