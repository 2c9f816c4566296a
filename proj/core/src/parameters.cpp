#include "fgnmt/parameters.hpp"

#include <algorithm>
#include <cmath>

#include "fgnmt/error.hpp"

namespace fgnmt {

const Tensor& ParameterSet::add(std::string name, Tensor t) {
  if (contains(name)) throw ContractError("duplicate parameter name: " + name);
  if (!t.defined()) throw ContractError("undefined tensor for parameter " + name);
  t.set_requires_grad(true);
  entries_.emplace_back(std::move(name), std::move(t));
  return entries_.back().second;
}

const Tensor& ParameterSet::get(const std::string& name) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const Entry& e) { return e.first == name; });
  if (it == entries_.end()) throw ContractError("unknown parameter: " + name);
  return it->second;
}

bool ParameterSet::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.first == name; });
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [name, t] : entries_) {
    Tensor handle = t;
    handle.zero_grad();
  }
}

ParameterSet ParameterSet::clone() const {
  ParameterSet copy;
  for (const auto& [name, t] : entries_) copy.add(name, t.detach());
  return copy;
}

Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return Tensor::uniform({rows, cols}, -s, s, rng);
}

}  // namespace fgnmt
