#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "unotb/cost.hpp"
#include "unotb/divergence.hpp"
#include "unotb/tensor.hpp"

namespace unotb {

// Eager reverse-mode tape over Tensor. Ops compute their value immediately
// and record parents; backward() walks the nodes in reverse creation order,
// which is a valid topological order by construction.
//
// Leaves borrow their tensors (parameters live in the model, not here) and a
// leaf registered twice for the same tensor returns the same node, so shared
// parameters accumulate gradients correctly. The tape is rebuilt every
// training step; reset() keeps the node vector's capacity.
class Tape {
 public:
  // External tensor; requires_grad marks it as a differentiation target.
  // Re-registering the same pointer must request the same requires_grad.
  int leaf(const Tensor* t, bool requires_grad);
  // Tape-owned constant (no gradient).
  int constant(Tensor value);

  int linear(int x, int w, int b);           // x*W + bias row broadcast
  int relu(int x);
  int concat_cols(int a, int b);
  int add(int a, int b);
  int sub(int a, int b);
  int add_scaled(int a, int b, double beta);  // a + beta*b, same shapes
  int add_scalar(int a, int s, double beta);  // a + beta*s[0] broadcast
  int scale(int a, double alpha);
  int pair_cost(int y, const Tensor* x, CostFn cost);  // [B,D] -> [B,1]
  int div_conj(int a, Divergence d);
  int mean_groups(int a, int64_t group_size);  // [B*S,1] -> [B,1]
  int mean_all(int a);                         // -> [1]

  const Tensor& value(int id) const;
  // Gradient of the last backward() target w.r.t. node id. Zero-shaped if
  // the node was not reached.
  const Tensor& grad(int id) const;
  void backward(int loss_id);  // loss must be a [1] tensor
  void reset();
  int64_t node_count() const { return static_cast<int64_t>(nodes_.size()); }

 private:
  enum class Op {
    kLeaf,
    kConstant,
    kLinear,
    kRelu,
    kConcatCols,
    kAddScaled,
    kAddScalar,
    kScale,
    kPairCost,
    kDivConj,
    kMeanGroups,
    kMeanAll,
  };

  struct Node {
    Op op;
    int a = -1, b = -1, c = -1;
    double alpha = 0.0;
    int64_t group = 1;
    const Tensor* external = nullptr;  // leaf storage or pair_cost anchor
    CostFn cost;
    Divergence div;
    Tensor value;  // owned; unused for leaves
    Tensor grad;
    bool needs_grad = false;
  };

  int push(Node n);
  const Tensor& val(int id) const;
  Tensor& ensure_grad(int id);
  void check_id(int id) const;

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, int> leaf_ids_;
  Tensor empty_;
};

}  // namespace unotb
