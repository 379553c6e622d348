#include "mdsgnn/gradcheck.hpp"

#include <cmath>

#include "mdsgnn/errors.hpp"

namespace mdsgnn {

namespace {
double eval_loss(
    const std::function<Tensor(Tape&, const std::vector<Tensor>&)>& build,
    const std::vector<Matrix>& inputs) {
    Tape t;
    std::vector<Tensor> leaves;
    leaves.reserve(inputs.size());
    for (const Matrix& m : inputs) leaves.push_back(t.leaf(m, false));
    Tensor loss = build(t, leaves);
    return t.scalar(loss.id);
}
}  // namespace

GradCheckReport grad_check(
    const std::function<Tensor(Tape&, const std::vector<Tensor>&)>& build,
    const std::vector<Matrix>& inputs, double eps) {
    // analytic pass
    std::vector<Matrix> analytic;
    {
        Tape t;
        std::vector<Tensor> leaves;
        leaves.reserve(inputs.size());
        for (const Matrix& m : inputs) leaves.push_back(t.leaf(m, true));
        Tensor loss = build(t, leaves);
        t.backward(loss.id);
        for (const Tensor& l : leaves) analytic.push_back(t.grad(l.id));
    }

    GradCheckReport rep;
    std::vector<Matrix> probe = inputs;
    for (std::size_t a = 0; a < inputs.size(); ++a) {
        for (std::size_t i = 0; i < inputs[a].data.size(); ++i) {
            const double orig = probe[a].data[i];
            probe[a].data[i] = orig + eps;
            double up = eval_loss(build, probe);
            probe[a].data[i] = orig - eps;
            double down = eval_loss(build, probe);
            probe[a].data[i] = orig;
            if (!std::isfinite(up) || !std::isfinite(down))
                throw NumericError("grad_check: non-finite loss during probing");
            double fd = (up - down) / (2.0 * eps);
            double an = analytic[a].data[i];
            double rel = std::abs(an - fd) / std::max(1.0, std::abs(fd));
            if (rel > rep.max_rel_err) {
                rep.max_rel_err = rel;
                rep.arg = static_cast<int>(a);
                rep.index = static_cast<int>(i);
                rep.analytic = an;
                rep.fd = fd;
            }
        }
    }
    return rep;
}

}  // namespace mdsgnn
