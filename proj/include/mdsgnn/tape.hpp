#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "mdsgnn/matrix.hpp"
#include "mdsgnn/rng.hpp"
#include "mdsgnn/sparse.hpp"

namespace mdsgnn {

class Tape;

// Handle into a Tape. Cheap to copy; valid for the tape's lifetime.
struct Tensor {
    Tape* tape = nullptr;
    int id = -1;

    const Matrix& val() const;
    int rows() const;
    int cols() const;
};

// Reverse-mode record. Nodes are appended in execution order; backward
// visits them in reverse exactly once. Backward closures capture node ids
// and auxiliary data by value, never references into the node vector.
class Tape {
public:
    Tensor leaf(Matrix value, bool requires_grad = false);

    // Extension point for ops with hand-written backwards. requires_grad is
    // inherited from parents; backward runs only when gradient reached the
    // node and receives the node's own id as `self`.
    Tensor record(Matrix value, const std::vector<int>& parents,
                  std::function<void(Tape&, int self)> backward);

    const Matrix& value(int id) const { return nodes_[id].value; }
    Matrix& value(int id) { return nodes_[id].value; }
    Matrix& grad(int id);
    bool grad_reached(int id) const { return nodes_[id].grad_alloc; }
    bool requires_grad(int id) const { return nodes_[id].requires_grad; }
    double scalar(int id) const;

    // Seeds d(loss)/d(loss) = 1 and propagates. loss must be 1x1.
    void backward(int loss_id);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        bool grad_alloc = false;
        std::function<void(Tape&, int)> backward;
    };
    std::vector<Node> nodes_;
};

// Closed primitive set. All throw on shape mismatch.
Tensor matmul(Tensor a, Tensor b);
Tensor matmul_nt(Tensor a, Tensor b);  // a * b^T
Tensor spmm(std::shared_ptr<const SparseMatrix> s, Tensor d);
Tensor add(Tensor a, Tensor b);
Tensor sub(Tensor a, Tensor b);
Tensor scale(Tensor a, double c);
Tensor mul(Tensor a, Tensor b);  // elementwise
Tensor add_rowvec(Tensor a, Tensor bias);  // bias is 1 x cols, broadcast over rows
Tensor relu(Tensor a);
Tensor leakyrelu(Tensor a, double slope);
Tensor elu(Tensor a);
Tensor sigmoid(Tensor a);
Tensor row_softmax(Tensor a);
Tensor row_log_softmax(Tensor a);
Tensor dropout(Tensor a, double rate, Rng& rng, bool train);
Tensor concat_cols(const std::vector<Tensor>& xs);
Tensor mean_cols(Tensor a);  // n x c -> n x 1 row means
Tensor sum(Tensor a);        // -> 1 x 1
Tensor row_l2_normalize(Tensor a);  // zero rows stay zero
Tensor cosine_similarity(Tensor a, Tensor b);  // normalize + matmul_nt

}  // namespace mdsgnn
