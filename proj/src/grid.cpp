#include "cpseg/grid.hpp"

namespace cpseg {

BinaryMask threshold(const ProbabilityMap& prob, double tau) {
    BinaryMask out(prob.height, prob.width);
    for (size_t i = 0; i < prob.values.size(); ++i)
        out.bits[i] = (prob.values[i] > tau) ? 1 : 0;
    return out;
}

} // namespace cpseg
