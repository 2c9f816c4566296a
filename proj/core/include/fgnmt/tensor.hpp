#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace fgnmt {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

// One vertex of the dynamic differentiation graph. Leaves are created by the
// user (parameters, inputs); interior nodes by operations.
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first touched by backward
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the inputs' grads.
  std::function<void(Node&)> backward;

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

}  // namespace detail

/// Dense row-major tensor of doubles with an attached differentiation record.
///
/// Copies share the underlying buffer (handle semantics); use clone() for a
/// deep copy and detach() for a copy cut off from the graph.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                       bool requires_grad = false);
  // Uniform(lo, hi) entries drawn from rng in row-major order.
  static Tensor uniform(Shape shape, double lo, double hi, std::mt19937_64& rng,
                        bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> data() const;
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t i) const;
  double at(std::size_t i, std::size_t j) const;

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool has_grad() const;
  std::span<const double> grad() const;
  void zero_grad();

  Tensor detach() const;
  Tensor clone() const;

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_recording_enabled();

/// Builds an interior node. `backward` is only kept when recording is on and
/// at least one input requires a gradient. Exposed for custom operations.
Tensor make_result(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                   std::function<void(detail::Node&)> backward);

/// Topologically ordered view of the nodes reachable from a root.
class Graph {
 public:
  static Graph trace(const Tensor& root);

  std::size_t size() const { return nodes_.size(); }
  const detail::Node& node(std::size_t i) const { return *nodes_[i]; }
  // Positions of node i's inputs within this ordering.
  std::vector<std::size_t> input_positions(std::size_t i) const;

 private:
  std::vector<detail::Node*> nodes_;
};

/// Accumulates dLoss/dT into every requires_grad leaf reachable from loss.
void backward(const Tensor& loss);

// ---- operations -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
// x·Wᵀ + b for x of shape [in] or [m×in], W of shape [out×in]; b may be empty.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

enum class ElementwiseOp { add, mul, tanh, sigmoid };
Tensor elementwise(ElementwiseOp op, std::span<const Tensor> args);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
// a[m×n] + row[n] broadcast over rows.
Tensor add_row(const Tensor& a, const Tensor& row);

Tensor softmax(const Tensor& x, std::size_t axis);
Tensor log_softmax(const Tensor& x);  // rank-1 only

Tensor sum(const Tensor& a);
Tensor sum_rows(const Tensor& a);   // [m×n] -> [n]
Tensor mean_rows(const Tensor& a);  // [m×n] -> [n]

Tensor concat(std::span<const Tensor> parts);  // along the last axis
Tensor concat(std::initializer_list<Tensor> parts);
Tensor slice_last(const Tensor& a, std::size_t begin, std::size_t end);
Tensor row(const Tensor& a, std::size_t i);
Tensor stack_rows(std::span<const Tensor> rows);
Tensor reshape(const Tensor& a, Shape shape);
Tensor pick(const Tensor& a, std::size_t index);
// Columns ids[t] of table[E×V], stacked as rows of a [T×E] result.
Tensor gather_columns(const Tensor& table, std::span<const std::size_t> ids);

/// Max over coordinates of |analytic − central difference| / max(1, |analytic|).
/// f must rebuild its graph from the current contents of the checked tensors.
double grad_check(const std::function<Tensor()>& f, Tensor& x, double eps);
double grad_check(const std::function<Tensor()>& f, std::span<Tensor> xs, double eps);

}  // namespace fgnmt
