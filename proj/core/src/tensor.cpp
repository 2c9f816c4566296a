#include "fgnmt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <unordered_set>

#include "fgnmt/error.hpp"

namespace fgnmt {

namespace {

thread_local bool g_recording = true;

using detail::Node;

std::shared_ptr<Node> make_leaf(Shape shape, std::vector<double> data, bool requires_grad) {
  if (data.size() != shape_size(shape)) {
    throw DimensionError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_string(shape));
  }
  for (auto extent : shape) {
    if (extent == 0) throw DimensionError("zero extent in shape " + shape_string(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return node;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

void require_rank(const Tensor& a, std::size_t rank, const char* op) {
  if (a.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + shape_string(a.shape()));
  }
}

void require_defined(const Tensor& a, const char* op) {
  if (!a.defined()) throw ContractError(std::string(op) + ": undefined tensor");
}

}  // namespace

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

// ---- Tensor ---------------------------------------------------------------

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto n = shape_size(shape);
  return Tensor(make_leaf(std::move(shape), std::vector<double>(n, 0.0), requires_grad));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  auto n = shape_size(shape);
  return Tensor(make_leaf(std::move(shape), std::vector<double>(n, value), requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  return Tensor(make_leaf(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(make_leaf({}, {value}, requires_grad));
}

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  Shape shape{values.size()};
  return Tensor(make_leaf(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                      bool requires_grad) {
  return Tensor(make_leaf({rows, cols}, std::move(values), requires_grad));
}

Tensor Tensor::uniform(Shape shape, double lo, double hi, std::mt19937_64& rng,
                       bool requires_grad) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> values(shape_size(shape));
  for (auto& v : values) v = dist(rng);
  return Tensor(make_leaf(std::move(shape), std::move(values), requires_grad));
}

const Shape& Tensor::shape() const {
  if (!node_) throw ContractError("shape of undefined tensor");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_string(s));
  }
  return s[axis];
}

std::size_t Tensor::size() const { return node_ ? node_->data.size() : 0; }

std::span<const double> Tensor::data() const {
  if (!node_) return {};
  return node_->data;
}

std::span<double> Tensor::mutable_data() {
  if (!node_) return {};
  return node_->data;
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + shape_string(shape()));
  return node_->data[0];
}

double Tensor::at(std::size_t i) const {
  if (i >= size()) throw IndexError("index " + std::to_string(i) + " out of range");
  return node_->data[i];
}

double Tensor::at(std::size_t i, std::size_t j) const {
  require_rank(*this, 2, "at");
  if (i >= node_->shape[0] || j >= node_->shape[1]) {
    throw IndexError("index (" + std::to_string(i) + "," + std::to_string(j) +
                     ") out of range for " + shape_string(node_->shape));
  }
  return node_->data[i * node_->shape[1] + j];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool value) {
  if (!node_) throw ContractError("set_requires_grad on undefined tensor");
  if (!node_->is_leaf) throw ContractError("requires_grad can only be set on leaf tensors");
  node_->requires_grad = value;
}

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  if (!node_) return {};
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad.assign(node_->data.size(), 0.0);
}

Tensor Tensor::detach() const {
  require_defined(*this, "detach");
  return Tensor(make_leaf(node_->shape, node_->data, false));
}

Tensor Tensor::clone() const {
  require_defined(*this, "clone");
  auto copy = make_leaf(node_->shape, node_->data, node_->requires_grad);
  copy->grad = node_->grad;
  return Tensor(std::move(copy));
}

// ---- recording ------------------------------------------------------------

NoGradGuard::NoGradGuard() : previous_(g_recording) { g_recording = false; }
NoGradGuard::~NoGradGuard() { g_recording = previous_; }

bool grad_recording_enabled() { return g_recording; }

namespace {

// Records inputs and the backward rule only when some input needs a gradient,
// so evaluation under NoGradGuard allocates no graph bookkeeping.
template <class Backward>
Tensor build(Shape shape, std::vector<double> data, std::span<const Tensor> inputs,
             Backward&& backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->is_leaf = false;
  if (g_recording) {
    bool needs = std::any_of(inputs.begin(), inputs.end(),
                             [](const Tensor& t) { return t.requires_grad(); });
    if (needs) {
      node->requires_grad = true;
      node->inputs.reserve(inputs.size());
      for (const auto& t : inputs) node->inputs.push_back(t.node_ptr());
      node->backward = std::forward<Backward>(backward);
    }
  }
  return Tensor(std::move(node));
}

template <class Backward>
Tensor build(Shape shape, std::vector<double> data, std::initializer_list<Tensor> inputs,
             Backward&& backward) {
  return build(std::move(shape), std::move(data),
               std::span<const Tensor>(inputs.begin(), inputs.size()),
               std::forward<Backward>(backward));
}

}  // namespace

Tensor make_result(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward) {
  return build(std::move(shape), std::move(data), std::span<const Tensor>(inputs),
               std::move(backward));
}

Graph Graph::trace(const Tensor& root) {
  require_defined(root, "Graph::trace");
  Graph graph;
  std::unordered_set<const Node*> visited;
  // Iterative post-order DFS; recursion depth would otherwise grow with
  // sequence length.
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node(), 0);
  visited.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      graph.nodes_.push_back(node);
      stack.pop_back();
    }
  }
  return graph;
}

std::vector<std::size_t> Graph::input_positions(std::size_t i) const {
  std::vector<std::size_t> positions;
  for (const auto& input : nodes_.at(i)->inputs) {
    auto it = std::find(nodes_.begin(), nodes_.end(), input.get());
    positions.push_back(static_cast<std::size_t>(it - nodes_.begin()));
  }
  return positions;
}

void backward(const Tensor& loss) {
  require_defined(loss, "backward");
  if (loss.size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        shape_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;
  Graph graph = Graph::trace(loss);
  std::vector<Node*> interior;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    auto* node = const_cast<Node*>(&graph.node(i));
    if (!node->is_leaf) {
      node->grad.assign(node->data.size(), 0.0);
      interior.push_back(node);
    }
  }
  Node* root = loss.node();
  root->ensure_grad();
  root->grad[0] += 1.0;
  for (auto it = interior.rbegin(); it != interior.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
  for (auto* node : interior) {
    std::vector<double>().swap(node->grad);
  }
}

// ---- operations -----------------------------------------------------------

namespace {

// Accumulation target for an input, or nullptr when it needs no gradient.
std::vector<double>* grad_of(Node& self, std::size_t input) {
  Node& in = *self.inputs[input];
  if (!in.requires_grad) return nullptr;
  in.ensure_grad();
  return &in.grad;
}

void check_finite(std::span<const double> values, const char* op) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string(op) + ": non-finite input");
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      const double* brow = &B[p * n];
      double* orow = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return build({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const auto& g = self.grad;
    const auto& A = self.inputs[0]->data;
    const auto& B = self.inputs[1]->data;
    if (auto* ga = grad_of(self, 0)) {
      // ga += g · Bᵀ
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * B[p * n + j];
          (*ga)[i * k + p] += acc;
        }
      }
    }
    if (auto* gb = grad_of(self, 1)) {
      // gb += Aᵀ · g
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double av = A[i * k + p];
          for (std::size_t j = 0; j < n; ++j) (*gb)[p * n + j] += av * g[i * n + j];
        }
      }
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_defined(x, "linear");
  require_defined(weight, "linear");
  require_rank(weight, 2, "linear");
  if (x.rank() != 1 && x.rank() != 2) {
    throw DimensionError("linear: input must be rank 1 or 2, got " + shape_string(x.shape()));
  }
  const std::size_t out_dim = weight.dim(0), in_dim = weight.dim(1);
  const std::size_t rows = x.rank() == 1 ? 1 : x.dim(0);
  const std::size_t x_cols = x.rank() == 1 ? x.dim(0) : x.dim(1);
  if (x_cols != in_dim) {
    throw DimensionError("linear: input " + shape_string(x.shape()) + " incompatible with weight " +
                         shape_string(weight.shape()));
  }
  const bool has_bias = bias.defined();
  if (has_bias && (bias.rank() != 1 || bias.dim(0) != out_dim)) {
    throw DimensionError("linear: bias " + shape_string(bias.shape()) +
                         " incompatible with weight " + shape_string(weight.shape()));
  }
  std::vector<double> out(rows * out_dim);
  auto X = x.data();
  auto W = weight.data();
  auto b = bias.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = &X[r * in_dim];
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double* wr = &W[o * in_dim];
      double acc = has_bias ? b[o] : 0.0;
      for (std::size_t i = 0; i < in_dim; ++i) acc += wr[i] * xr[i];
      out[r * out_dim + o] = acc;
    }
  }
  Shape shape = x.rank() == 1 ? Shape{out_dim} : Shape{rows, out_dim};
  std::vector<Tensor> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return build(std::move(shape), std::move(out), std::move(inputs),
                     [rows, in_dim, out_dim, has_bias](Node& self) {
                       const auto& g = self.grad;
                       const auto& X = self.inputs[0]->data;
                       const auto& W = self.inputs[1]->data;
                       if (auto* gx = grad_of(self, 0)) {
                         for (std::size_t r = 0; r < rows; ++r) {
                           for (std::size_t o = 0; o < out_dim; ++o) {
                             const double go = g[r * out_dim + o];
                             if (go == 0.0) continue;
                             const double* wr = &W[o * in_dim];
                             double* gxr = &(*gx)[r * in_dim];
                             for (std::size_t i = 0; i < in_dim; ++i) gxr[i] += go * wr[i];
                           }
                         }
                       }
                       if (auto* gw = grad_of(self, 1)) {
                         for (std::size_t r = 0; r < rows; ++r) {
                           const double* xr = &X[r * in_dim];
                           for (std::size_t o = 0; o < out_dim; ++o) {
                             const double go = g[r * out_dim + o];
                             if (go == 0.0) continue;
                             double* gwr = &(*gw)[o * in_dim];
                             for (std::size_t i = 0; i < in_dim; ++i) gwr[i] += go * xr[i];
                           }
                         }
                       }
                       if (has_bias) {
                         if (auto* gb = grad_of(self, 2)) {
                           for (std::size_t r = 0; r < rows; ++r) {
                             for (std::size_t o = 0; o < out_dim; ++o) {
                               (*gb)[o] += g[r * out_dim + o];
                             }
                           }
                         }
                       }
                     });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] + B[i];
  return build(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (auto* gi = grad_of(self, k)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) (*gi)[i] += self.grad[i];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] - B[i];
  return build(a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i];
    }
    if (auto* gb = grad_of(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*gb)[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] * B[i];
  return build(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& A = self.inputs[0]->data;
    const auto& B = self.inputs[1]->data;
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i] * B[i];
    }
    if (auto* gb = grad_of(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*gb)[i] += self.grad[i] * A[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  require_defined(a, "scale");
  std::vector<double> out(a.data().begin(), a.data().end());
  for (auto& v : out) v *= factor;
  return build(a.shape(), std::move(out), {a}, [factor](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i] * factor;
    }
  });
}

Tensor tanh(const Tensor& a) {
  require_defined(a, "tanh");
  std::vector<double> out(a.size());
  auto A = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(A[i]);
  return build(a.shape(), std::move(out), {a}, [](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        const double y = self.data[i];
        (*ga)[i] += self.grad[i] * (1.0 - y * y);
      }
    }
  });
}

Tensor sigmoid(const Tensor& a) {
  require_defined(a, "sigmoid");
  std::vector<double> out(a.size());
  auto A = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-A[i]));
  return build(a.shape(), std::move(out), {a}, [](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        const double y = self.data[i];
        (*ga)[i] += self.grad[i] * y * (1.0 - y);
      }
    }
  });
}

Tensor elementwise(ElementwiseOp op, std::span<const Tensor> args) {
  const std::size_t arity = (op == ElementwiseOp::add || op == ElementwiseOp::mul) ? 2 : 1;
  if (args.size() != arity) {
    throw ContractError("elementwise: expected " + std::to_string(arity) + " operands, got " +
                        std::to_string(args.size()));
  }
  switch (op) {
    case ElementwiseOp::add: return add(args[0], args[1]);
    case ElementwiseOp::mul: return mul(args[0], args[1]);
    case ElementwiseOp::tanh: return tanh(args[0]);
    case ElementwiseOp::sigmoid: return sigmoid(args[0]);
  }
  throw ContractError("elementwise: unknown op");
}

Tensor add_row(const Tensor& a, const Tensor& row_vec) {
  require_rank(a, 2, "add_row");
  require_rank(row_vec, 1, "add_row");
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (row_vec.dim(0) != n) {
    throw DimensionError("add_row: shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(row_vec.shape()));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  auto R = row_vec.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += R[j];
  }
  return build(a.shape(), std::move(out), {a, row_vec}, [m, n](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i];
    }
    if (auto* gr = grad_of(self, 1)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) (*gr)[j] += self.grad[i * n + j];
      }
    }
  });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  require_defined(x, "softmax");
  const auto& shape = x.shape();
  if (axis >= shape.size()) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " out of range for " +
                         shape_string(shape));
  }
  check_finite(x.data(), "softmax");
  // View the tensor as [outer × len × inner]; slices run along the middle axis.
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t len = shape[axis];
  auto X = x.data();
  std::vector<double> out(x.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double mx = X[base];
      for (std::size_t k = 1; k < len; ++k) mx = std::max(mx, X[base + k * inner]);
      double total = 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        const double e = std::exp(X[base + k * inner] - mx);
        out[base + k * inner] = e;
        total += e;
      }
      for (std::size_t k = 0; k < len; ++k) out[base + k * inner] /= total;
    }
  }
  return build(shape, std::move(out), {x}, [outer, inner, len](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    const auto& y = self.data;
    const auto& g = self.grad;
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * len * inner + in;
        double dot = 0.0;
        for (std::size_t k = 0; k < len; ++k) dot += g[base + k * inner] * y[base + k * inner];
        for (std::size_t k = 0; k < len; ++k) {
          const std::size_t idx = base + k * inner;
          (*gx)[idx] += y[idx] * (g[idx] - dot);
        }
      }
    }
  });
}

Tensor log_softmax(const Tensor& x) {
  require_rank(x, 1, "log_softmax");
  check_finite(x.data(), "log_softmax");
  auto X = x.data();
  const double mx = *std::max_element(X.begin(), X.end());
  double total = 0.0;
  for (double v : X) total += std::exp(v - mx);
  const double log_z = mx + std::log(total);
  std::vector<double> out(X.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = X[i] - log_z;
  return build(x.shape(), std::move(out), {x}, [](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    double gsum = 0.0;
    for (double g : self.grad) gsum += g;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      (*gx)[i] += self.grad[i] - std::exp(self.data[i]) * gsum;
    }
  });
}

Tensor sum(const Tensor& a) {
  require_defined(a, "sum");
  double total = 0.0;
  for (double v : a.data()) total += v;
  return build({}, {total}, {a}, [](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (auto& v : *ga) v += self.grad[0];
    }
  });
}

Tensor sum_rows(const Tensor& a) {
  require_rank(a, 2, "sum_rows");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(n, 0.0);
  auto A = a.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j] += A[i * n + j];
  }
  return build({n}, std::move(out), {a}, [m, n](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) (*ga)[i * n + j] += self.grad[j];
      }
    }
  });
}

Tensor mean_rows(const Tensor& a) {
  require_rank(a, 2, "mean_rows");
  return scale(sum_rows(a), 1.0 / static_cast<double>(a.dim(0)));
}

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("concat: no operands");
  const std::size_t rank = parts[0].rank();
  if (rank != 1 && rank != 2) {
    throw DimensionError("concat: operands must be rank 1 or 2, got " +
                         shape_string(parts[0].shape()));
  }
  const std::size_t rows = rank == 1 ? 1 : parts[0].dim(0);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_defined(p, "concat");
    if (p.rank() != rank || (rank == 2 && p.dim(0) != rows)) {
      throw DimensionError("concat: shape mismatch " + shape_string(parts[0].shape()) + " vs " +
                           shape_string(p.shape()));
    }
    widths.push_back(p.shape().back());
    total += widths.back();
  }
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto P = parts[k].data();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(&P[r * widths[k]], widths[k], &out[r * total + offset]);
    }
    offset += widths[k];
  }
  Shape shape = rank == 1 ? Shape{total} : Shape{rows, total};
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return build(std::move(shape), std::move(out), std::move(inputs),
                     [rows, total, widths](Node& self) {
                       std::size_t offset = 0;
                       for (std::size_t k = 0; k < widths.size(); ++k) {
                         if (auto* gk = grad_of(self, k)) {
                           for (std::size_t r = 0; r < rows; ++r) {
                             for (std::size_t j = 0; j < widths[k]; ++j) {
                               (*gk)[r * widths[k] + j] += self.grad[r * total + offset + j];
                             }
                           }
                         }
                         offset += widths[k];
                       }
                     });
}

Tensor concat(std::initializer_list<Tensor> parts) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor slice_last(const Tensor& a, std::size_t begin, std::size_t end) {
  require_defined(a, "slice_last");
  if (a.rank() != 1 && a.rank() != 2) {
    throw DimensionError("slice_last: rank 1 or 2 expected, got " + shape_string(a.shape()));
  }
  const std::size_t width = a.shape().back();
  if (begin >= end || end > width) {
    throw IndexError("slice_last: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for " + shape_string(a.shape()));
  }
  const std::size_t rows = a.rank() == 1 ? 1 : a.dim(0);
  const std::size_t w = end - begin;
  std::vector<double> out(rows * w);
  auto A = a.data();
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(&A[r * width + begin], w, &out[r * w]);
  Shape shape = a.rank() == 1 ? Shape{w} : Shape{rows, w};
  return build(std::move(shape), std::move(out), {a}, [rows, width, begin, w](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < w; ++j) (*ga)[r * width + begin + j] += self.grad[r * w + j];
      }
    }
  });
}

Tensor row(const Tensor& a, std::size_t i) {
  require_rank(a, 2, "row");
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (i >= m) throw IndexError("row " + std::to_string(i) + " out of range for " +
                               shape_string(a.shape()));
  auto A = a.data();
  std::vector<double> out(&A[i * n], &A[i * n] + n);
  return build({n}, std::move(out), {a}, [i, n](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t j = 0; j < n; ++j) (*ga)[i * n + j] += self.grad[j];
    }
  });
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw ContractError("stack_rows: no operands");
  const std::size_t n = rows[0].size();
  std::vector<double> out;
  out.reserve(rows.size() * n);
  for (const auto& r : rows) {
    require_rank(r, 1, "stack_rows");
    if (r.dim(0) != n) {
      throw DimensionError("stack_rows: shape mismatch " + shape_string(rows[0].shape()) +
                           " vs " + shape_string(r.shape()));
    }
    out.insert(out.end(), r.data().begin(), r.data().end());
  }
  std::vector<Tensor> inputs(rows.begin(), rows.end());
  return build({rows.size(), n}, std::move(out), std::move(inputs), [n](Node& self) {
    for (std::size_t k = 0; k < self.inputs.size(); ++k) {
      if (auto* gk = grad_of(self, k)) {
        for (std::size_t j = 0; j < n; ++j) (*gk)[j] += self.grad[k * n + j];
      }
    }
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  require_defined(a, "reshape");
  if (shape_size(shape) != a.size()) {
    throw DimensionError("reshape: cannot view " + shape_string(a.shape()) + " as " +
                         shape_string(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return build(std::move(shape), std::move(out), {a}, [](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i];
    }
  });
}

Tensor pick(const Tensor& a, std::size_t index) {
  require_rank(a, 1, "pick");
  if (index >= a.dim(0)) {
    throw IndexError("pick: index " + std::to_string(index) + " out of range for " +
                     shape_string(a.shape()));
  }
  return build({}, {a.data()[index]}, {a}, [index](Node& self) {
    if (auto* ga = grad_of(self, 0)) (*ga)[index] += self.grad[0];
  });
}

Tensor gather_columns(const Tensor& table, std::span<const std::size_t> ids) {
  require_rank(table, 2, "gather_columns");
  if (ids.empty()) throw ContractError("gather_columns: empty id sequence");
  const std::size_t rows = table.dim(0), cols = table.dim(1);
  std::vector<double> out(ids.size() * rows);
  auto Tb = table.data();
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] >= cols) {
      throw IndexError("gather_columns: id " + std::to_string(ids[t]) + " out of range for " +
                       shape_string(table.shape()));
    }
    for (std::size_t e = 0; e < rows; ++e) out[t * rows + e] = Tb[e * cols + ids[t]];
  }
  std::vector<std::size_t> id_copy(ids.begin(), ids.end());
  return build({ids.size(), rows}, std::move(out), {table},
                     [rows, cols, id_copy = std::move(id_copy)](Node& self) {
                       if (auto* gt = grad_of(self, 0)) {
                         for (std::size_t t = 0; t < id_copy.size(); ++t) {
                           for (std::size_t e = 0; e < rows; ++e) {
                             (*gt)[e * cols + id_copy[t]] += self.grad[t * rows + e];
                           }
                         }
                       }
                     });
}

// ---- gradient checking ----------------------------------------------------

double grad_check(const std::function<Tensor()>& f, Tensor& x, double eps) {
  return grad_check(f, std::span<Tensor>(&x, 1), eps);
}

double grad_check(const std::function<Tensor()>& f, std::span<Tensor> xs, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    throw ContractError("grad_check: eps must lie in [1e-7, 1e-3]");
  }
  std::vector<bool> previous;
  for (auto& x : xs) {
    previous.push_back(x.requires_grad());
    x.set_requires_grad(true);
    x.zero_grad();
  }
  backward(f());
  double worst = 0.0;
  NoGradGuard no_grad;
  for (auto& x : xs) {
    auto values = x.mutable_data();
    auto analytic = x.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = f().item();
      values[i] = saved - eps;
      const double down = f().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
      worst = std::max(worst, err);
    }
  }
  for (std::size_t k = 0; k < xs.size(); ++k) xs[k].set_requires_grad(previous[k]);
  return worst;
}

}  // namespace fgnmt
