#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "parasent/numeric.h"

namespace parasent {

inline constexpr std::string_view kWordEmbeddings = "W_w";
inline constexpr std::string_view kHeadPrefix = "head.";

// Ordered collection of named tensors. Insertion order is the flattening
// order and the checkpoint order.
template <class T>
class ParameterSet {
 public:
  std::size_t add(std::string name, Matrix<T> value) {
    if (index_.contains(name)) {
      throw ConfigError("duplicate parameter name '" + name + "'");
    }
    index_.emplace(name, tensors_.size());
    names_.push_back(std::move(name));
    tensors_.push_back(std::move(value));
    return tensors_.size() - 1;
  }

  std::size_t count() const noexcept { return tensors_.size(); }
  bool contains(std::string_view name) const {
    return index_.contains(std::string(name));
  }

  std::size_t index(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) {
      throw ConfigError("unknown parameter '" + std::string(name) + "'");
    }
    return it->second;
  }
  std::optional<std::size_t> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& name(std::size_t i) const { return names_[i]; }
  Matrix<T>& operator[](std::size_t i) { return tensors_[i]; }
  const Matrix<T>& operator[](std::size_t i) const { return tensors_[i]; }
  Matrix<T>& operator[](std::string_view n) { return tensors_[index(n)]; }
  const Matrix<T>& operator[](std::string_view n) const {
    return tensors_[index(n)];
  }

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t.size();
    return n;
  }

  // Same names and shapes, all zeros.
  ParameterSet zeros_like() const {
    ParameterSet out;
    for (std::size_t i = 0; i < count(); ++i) {
      out.add(names_[i], Matrix<T>(tensors_[i].rows(), tensors_[i].cols()));
    }
    return out;
  }

  void set_zero() {
    for (auto& t : tensors_) t.fill(T(0));
  }

  std::vector<T> flatten() const {
    std::vector<T> flat;
    flat.reserve(total_size());
    for (const auto& t : tensors_) {
      flat.insert(flat.end(), t.data().begin(), t.data().end());
    }
    return flat;
  }

  void unflatten(std::span<const T> flat) {
    if (flat.size() != total_size()) {
      throw DimensionError("unflatten: expected " +
                           std::to_string(total_size()) + " values, got " +
                           std::to_string(flat.size()));
    }
    std::size_t k = 0;
    for (auto& t : tensors_) {
      for (auto& x : t.data()) x = flat[k++];
    }
  }

  // Locates flat coordinate k as (tensor, offset).
  std::pair<std::size_t, std::size_t> locate(std::size_t k) const {
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
      if (k < tensors_[i].size()) return {i, k};
      k -= tensors_[i].size();
    }
    throw DimensionError("coordinate out of range");
  }

  template <class U>
  ParameterSet<U> cast() const {
    ParameterSet<U> out;
    for (std::size_t i = 0; i < count(); ++i) {
      out.add(names_[i], tensors_[i].template cast<U>());
    }
    return out;
  }

  bool same_layout(const ParameterSet& o) const {
    if (o.count() != count()) return false;
    for (std::size_t i = 0; i < count(); ++i) {
      if (o.names_[i] != names_[i] || !o.tensors_[i].same_shape(tensors_[i])) {
        return false;
      }
    }
    return true;
  }

  friend bool operator==(const ParameterSet& a, const ParameterSet& b) {
    return a.names_ == b.names_ && a.tensors_ == b.tensors_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Matrix<T>> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Compositional parameters: everything except the word embeddings and the
// supervised head.
inline bool is_compositional(std::string_view name) {
  return name != kWordEmbeddings && !name.starts_with(kHeadPrefix);
}

inline bool is_head(std::string_view name) {
  return name.starts_with(kHeadPrefix);
}

}  // namespace parasent
