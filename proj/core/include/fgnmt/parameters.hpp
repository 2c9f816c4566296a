#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fgnmt/tensor.hpp"

namespace fgnmt {

/// Learnable tensors keyed by name, kept in insertion order so that
/// checkpoints and optimizer state line up deterministically.
class ParameterSet {
 public:
  using Entry = std::pair<std::string, Tensor>;

  // Registers t as a gradient-tracked leaf. Duplicate names are an error.
  const Tensor& add(std::string name, Tensor t);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>::const_iterator begin() const { return entries_.begin(); }
  std::vector<Entry>::const_iterator end() const { return entries_.end(); }

  void zero_grad();
  // Deep copy: the new set shares no buffers with this one.
  ParameterSet clone() const;

 private:
  std::vector<Entry> entries_;
};

// Glorot-uniform matrix: U(-s, s) with s = sqrt(6 / (rows + cols)).
Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

}  // namespace fgnmt
